#include "oscint/rayleigh_plesset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "oscint/error.hpp"

namespace oscint {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension (Hairer, Norsett & Wanner, dopri5 contd5).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

// (R, R', integral of R)
using State = std::array<double, 3>;

State axpy(const State& y, double h, std::initializer_list<std::pair<double, const State*>> terms) {
  State out = y;
  for (std::size_t i = 0; i < out.size(); ++i) {
    double acc = 0.0;
    for (const auto& [coef, k] : terms) acc += coef * (*k)[i];
    out[i] += h * acc;
  }
  return out;
}

bool usable(const State& y) {
  return y[0] > 0.0 && std::isfinite(y[0]) && std::isfinite(y[1]) && std::isfinite(y[2]);
}

}  // namespace

void validate(const RpConfig& cfg) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::InvalidArgument, what);
  };
  require(cfg.rho > 0.0, "rho must be positive");
  require(cfg.R0 > 0.0, "R0 must be positive");
  require(cfg.T > 0.0, "horizon T must be positive");
  require(cfg.rtol > 0.0 && cfg.atol > 0.0, "rtol and atol must be positive");
  require(cfg.viscosity >= 0.0 && cfg.surface_tension >= 0.0,
          "viscosity and surface tension must be non-negative");
  require(cfg.polytropic_k > 0.0, "polytropic exponent must be positive");
  require(cfg.min_step > 0.0, "min_step must be positive");
}

double rp_acceleration(const RpConfig& cfg, double t, double radius, double velocity) {
  const double drive = cfg.drive_amplitude * std::cos(cfg.drive_angular_frequency * t);
  const double gas = (2.0 * cfg.surface_tension / cfg.R0 - cfg.delta_p) *
                     std::pow(cfg.R0 / radius, 3.0 * cfg.polytropic_k);
  const double pressure = cfg.delta_p - drive - 2.0 * cfg.surface_tension / radius -
                          4.0 * cfg.viscosity * velocity / radius + gas;
  return (pressure / cfg.rho - 1.5 * velocity * velocity) / radius;
}

double RpTrajectory::radius_at(double t) const {
  if (segments.empty()) return radii.empty() ? 0.0 : radii.front();
  if (t <= 0.0) return radii.front();
  if (t >= horizon) return radii.back();
  auto it = std::upper_bound(segments.begin(), segments.end(), t,
                             [](double v, const RpSegment& s) { return v < s.t_hi; });
  std::size_t idx = it == segments.begin() ? 0 : static_cast<std::size_t>(it - segments.begin()) - 1;
  while (idx > 0 && (t - segments[idx].t_hi) - segments[idx].t_lo < 0.0) --idx;
  const RpSegment& s = segments[idx];
  const double theta = std::clamp(((t - s.t_hi) - s.t_lo) / s.h, 0.0, 1.0);
  const double theta1 = 1.0 - theta;
  return s.c[0] + theta * (s.c[1] + theta1 * (s.c[2] + theta * (s.c[3] + theta1 * s.c[4])));
}

RpTrajectory rp_solve(const RpConfig& cfg) {
  validate(cfg);
  auto rhs = [&cfg](double t, const State& y) -> State {
    return {y[1], rp_acceleration(cfg, t, y[0], y[1]), y[0]};
  };

  RpTrajectory traj;
  traj.horizon = cfg.T;
  State y{cfg.R0, cfg.initial_velocity, 0.0};
  traj.times.push_back(0.0);
  traj.radii.push_back(y[0]);
  traj.radial_velocities.push_back(y[1]);

  double t_hi = 0.0;
  double t_lo = 0.0;
  double h = std::min(cfg.T, 1e-6 * cfg.T);
  State k1 = rhs(0.0, y);
  bool last_failure_was_radius = false;

  for (;;) {
    const double remaining = (cfg.T - t_hi) - t_lo;
    if (remaining <= 0.0) break;
    bool final_step = false;
    if (h >= remaining) {
      h = remaining;
      final_step = true;
    }
    const double t = t_hi + t_lo;

    double err_norm = 0.0;
    bool ok = true;
    State k2, k3, k4, k5, k6, k7, y_new;
    {
      const State y2 = axpy(y, h, {{a21, &k1}});
      ok = usable(y2);
      if (ok) {
        k2 = rhs(t + c2 * h, y2);
        const State y3 = axpy(y, h, {{a31, &k1}, {a32, &k2}});
        ok = usable(y3);
        if (ok) {
          k3 = rhs(t + c3 * h, y3);
          const State y4 = axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}});
          ok = usable(y4);
          if (ok) {
            k4 = rhs(t + c4 * h, y4);
            const State y5 = axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}});
            ok = usable(y5);
            if (ok) {
              k5 = rhs(t + c5 * h, y5);
              const State y6 =
                  axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}});
              ok = usable(y6);
              if (ok) {
                k6 = rhs(t + h, y6);
                y_new = axpy(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
                ok = usable(y_new);
                if (ok) {
                  k7 = rhs(t + h, y_new);
                  for (std::size_t i = 0; i < y.size(); ++i) {
                    const double err = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                            e6 * k6[i] + e7 * k7[i]);
                    const double scale =
                        cfg.atol + cfg.rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
                    err_norm += (err / scale) * (err / scale);
                  }
                  err_norm = std::sqrt(err_norm / static_cast<double>(y.size()));
                  ok = std::isfinite(err_norm) && std::isfinite(k7[1]);
                }
              }
            }
          }
        }
      }
      last_failure_was_radius = !ok;
    }

    if (ok && err_norm <= 1.0) {
      RpSegment seg;
      seg.t_hi = t_hi;
      seg.t_lo = t_lo;
      seg.h = h;
      const double ydiff = y_new[0] - y[0];
      const double bspl = h * k1[0] - ydiff;
      seg.c[0] = y[0];
      seg.c[1] = ydiff;
      seg.c[2] = bspl;
      seg.c[3] = ydiff - h * k7[0] - bspl;
      seg.c[4] = h * (d1 * k1[0] + d3 * k3[0] + d4 * k4[0] + d5 * k5[0] + d6 * k6[0] +
                      d7 * k7[0]);
      traj.segments.push_back(seg);

      // Two-sum: keeps the low-order bits of t that a plain add would drop.
      const double sum = t_hi + h;
      const double bp = sum - t_hi;
      t_lo += (t_hi - (sum - bp)) + (h - bp);
      t_hi = sum;
      y = y_new;
      k1 = k7;

      traj.times.push_back(final_step ? cfg.T : t_hi + t_lo);
      traj.radii.push_back(y[0]);
      traj.radial_velocities.push_back(y[1]);
      if (final_step) break;

      const double factor = err_norm > 0.0 ? 0.9 * std::pow(err_norm, -0.2) : 10.0;
      h *= std::clamp(factor, 0.2, 10.0);
    } else {
      ++traj.rejected_steps;
      const double factor = ok ? 0.9 * std::pow(err_norm, -0.2) : 0.5;
      h *= std::clamp(factor, 0.1, 0.9);
      if (h < cfg.min_step) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "step size " << h << " below minimum at t = " << t << " s (R = " << y[0] << " m)";
        if (last_failure_was_radius) throw Error(ErrorCode::NonPositiveRadius, msg.str());
        throw Error(ErrorCode::StiffnessFailure, msg.str());
      }
    }
  }

  traj.radius_integral = y[2];
  return traj;
}

}  // namespace oscint
