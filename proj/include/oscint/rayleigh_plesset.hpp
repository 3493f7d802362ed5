#pragma once

/**
 * Rayleigh-Plesset bubble dynamics
 *
 *   rho (R R'' + 3/2 R'^2) = dp - p(t) - 2 sigma / R - 4 mu R' / R
 *                            + (2 sigma / R0 - dp) (R0 / R)^(3 kappa)
 *   p(t) = A cos(omega t),  R(0) = R0,  R'(0) = 0
 *
 * integrated as a first-order system in (R, R') with the Dormand-Prince 5(4)
 * pair and its fourth-order continuous extension.
 *
 * Under the default drive the bubble grows to a few hundred R0 and then
 * collapses to radii near 1e-13 m, where the local time scale is far below
 * the double-precision spacing of t. Time is therefore accumulated with a
 * compensated (hi, lo) sum so steps smaller than ulp(t) still advance.
 */

#include <cstddef>
#include <vector>

namespace oscint {

struct RpConfig {
  double rho = 750.0;                      // kg/m^3
  double R0 = 2.6e-6;                      // m
  double T = 1e-4;                         // s
  double delta_p = -7670.0;                // Pa
  double surface_tension = 0.0725;         // N/m
  double viscosity = 8.9e-4;               // Pa s
  double polytropic_k = 1.33;
  double drive_amplitude = 1.3e6;          // Pa
  double drive_angular_frequency = 53000.0 * 3.14159265358979323846;  // rad/s
  double rtol = 1e-8;
  double atol = 1e-12;                     // m
  /// Steps below this (absolute, seconds) abort with StiffnessFailure.
  double min_step = 1e-40;
  /// Nonzero only for diagnostics; the physical problem starts at rest.
  double initial_velocity = 0.0;

  bool operator==(const RpConfig&) const = default;
};

void validate(const RpConfig& cfg);

/// Accepted-step record with the dense-output coefficients for R.
struct RpSegment {
  double t_hi = 0.0;
  double t_lo = 0.0;
  double h = 0.0;
  double c[5] = {0, 0, 0, 0, 0};
};

struct RpTrajectory {
  std::vector<double> times;
  std::vector<double> radii;
  std::vector<double> radial_velocities;
  std::vector<RpSegment> segments;
  /// Integral of R over [0, T], carried as an extra state of the ODE.
  double radius_integral = 0.0;
  double horizon = 0.0;
  std::size_t rejected_steps = 0;

  /// Dense output R(t) for t in [0, horizon].
  double radius_at(double t) const;
};

RpTrajectory rp_solve(const RpConfig& cfg);

/// Right-hand side acceleration R'' for the state (R, R').
double rp_acceleration(const RpConfig& cfg, double t, double radius, double velocity);

}  // namespace oscint
