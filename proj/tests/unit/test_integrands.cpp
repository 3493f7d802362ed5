#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include "oscint/bessel.hpp"
#include "oscint/error.hpp"
#include "oscint/integrands.hpp"
#include "oscint/rayleigh_plesset.hpp"

using namespace oscint;

namespace {

template <typename F>
ErrorCode code_of(F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an oscint::Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("bessel j0 against frozen high-precision values") {
  // 30-digit reference values.
  const struct {
    double x, j0;
  } ref[] = {
      {0.0, 1.0},
      {1.0, 0.76519768655796655145},
      {5.0, -0.17759677131433830435},
      {10.0, -0.2459357644513483352},
      {11.9, 0.02504944169958964508},
      {12.0, 0.047689310796833536624},
      {12.5, 0.14688405470042110231},
      {20.0, 0.16702466434058315473},
      {50.0, 0.055812327669251815005},
      {75.0, 0.034643913805097056137},
      {100.0, 0.019985850304223122424},
      {150.0, -0.00077409037539429124695},
      {175.0, -0.0086853963594555009961},
      {199.5, -0.039613637334785146078},
  };
  for (const auto& r : ref) {
    CAPTURE(r.x);
    CHECK(std::abs(bessel_j0(r.x) - r.j0) < 1e-10);
  }
  CHECK(std::abs(bessel_j0(2.404825557695773)) < 1e-7);
  CHECK(std::abs(bessel_j0(10.0) - (-0.2459357645)) < 1e-7);
}

TEST_CASE("bessel j0 against the standard library on a dense grid") {
  double worst = 0.0;
  for (double x = 0.0; x <= 200.0; x += 0.00731) {
    worst = std::max(worst, std::abs(bessel_j0(x) - std::cyl_bessel_j(0.0, x)));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("bessel j0 symmetry and bound") {
  for (double x = 0.0; x < 300.0; x += 0.37) {
    CHECK(bessel_j0(-x) == bessel_j0(x));
    CHECK(std::abs(bessel_j0(x)) <= 1.0);
  }
}

TEST_CASE("family formulas") {
  CHECK(eval(Family::Sine, {Family::Sine, {10}}, 0.0) == 0.0);
  CHECK(eval(Family::EvanWebster1, {Family::EvanWebster1, {10, 50}}, 0.0) == 0.0);
  // cos(50) J0(75) to 20 digits.
  CHECK(std::abs(eval(Family::Bessel, {Family::Bessel, {150, 100}}, 0.5) - 0.033430199915927602265) < 1e-10);
  CHECK(eval(Family::Sine, {Family::Sine, {7}}, 0.3) == std::sin(7 * 0.3));
  CHECK(eval(Family::Exponential, {Family::Exponential, {2}}, 0.4) == std::exp(2 * 0.4));
  CHECK(eval(Family::EvanWebster2, {Family::EvanWebster2, {30}}, 0.6) == std::exp(0.6) * std::sin(30 * std::cosh(0.6)));
  CHECK(eval(Family::EvanWebster1, {Family::EvanWebster1, {6, 40}}, 0.7) ==
        std::cos(6 * 0.7 * 0.7) * std::sin(40 * 0.7));
}

TEST_CASE("parameter spaces") {
  CHECK(default_param_space(Family::Bessel).intervals == std::vector<Interval>{{125, 175}, {75, 125}});
  CHECK(default_param_space(Family::EvanWebster1).intervals == std::vector<Interval>{{5, 15}, {25, 75}});
  CHECK(default_param_space(Family::RayleighPlesset).intervals == std::vector<Interval>{{500, 1000, false}});
  CHECK(default_param_space(Family::EvanWebster2).intervals == std::vector<Interval>{{25, 75}});
  CHECK(default_param_space(Family::Sine).intervals == std::vector<Interval>{{5, 15}});
  CHECK(default_param_space(Family::Exponential).intervals == std::vector<Interval>{{1, 5}});
  for (Family f : kAllFamilies) CHECK(parse_family(to_string(f)) == f);
}

TEST_CASE("domain and parameter checks") {
  const IntegrandSpec spec = IntegrandSpec::defaults(Family::Sine);
  CHECK(code_of([&] { eval(spec, {Family::Sine, {10}}, 1.5); }) == ErrorCode::OutOfDomain);
  CHECK(code_of([&] { eval(spec, {Family::Sine, {16}}, 0.5); }) == ErrorCode::ParamOutOfSpace);
  CHECK(code_of([&] { eval(spec, {Family::Sine, {10, 2}}, 0.5); }) == ErrorCode::ParamOutOfSpace);
  const IntegrandSpec rp = IntegrandSpec::defaults(Family::RayleighPlesset);
  CHECK(code_of([&] { check_params(rp, {Family::RayleighPlesset, {1000}}); }) == ErrorCode::ParamOutOfSpace);
}

TEST_CASE("sampling") {
  Rng a(42), b(42);
  CHECK(sample_params(Family::Sine, a) == sample_params(Family::Sine, b));

  Rng rng(123);
  double lo = 1e9, hi = -1e9, sum = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double k = sample_params(Family::Sine, rng).values[0];
    lo = std::min(lo, k);
    hi = std::max(hi, k);
    sum += k;
  }
  CHECK(lo >= 5.0);
  CHECK(hi <= 15.0);
  CHECK(std::abs(sum / n - 10.0) < 0.05);

  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    Rng r(seed);
    const double rho = sample_params(Family::RayleighPlesset, r).values[0];
    REQUIRE(rho >= 500.0);
    REQUIRE(rho < 1000.0);
  }
  Rng top(1);
  CHECK(top.uniform(500.0, 500.0 + 1e-13) < 500.0 + 1e-13);
}

TEST_CASE("sine sign changes grow with k") {
  int prev = -1;
  for (double k = 5.0; k <= 15.0; k += 0.5) {
    int changes = 0;
    double last = eval(Family::Sine, {Family::Sine, {k}}, 0.0005);
    for (int i = 1; i < 2000; ++i) {
      const double v = eval(Family::Sine, {Family::Sine, {k}}, (i + 0.5) / 2000.0);
      if ((v < 0) != (last < 0)) ++changes;
      last = v;
    }
    CHECK(changes >= prev);
    prev = changes;
  }
}

TEST_CASE("most oscillatory corner") {
  CHECK(IntegrandSpec::defaults(Family::Bessel).most_oscillatory().values == std::vector<double>{175, 125});
  CHECK(IntegrandSpec::defaults(Family::RayleighPlesset).most_oscillatory().values == std::vector<double>{500});
}

TEST_CASE("rayleigh-plesset equilibrium") {
  RpConfig cfg;
  cfg.drive_amplitude = 0.0;
  const RpTrajectory t = rp_solve(cfg);
  CHECK(t.times.front() == 0.0);
  CHECK(t.radii.front() == cfg.R0);
  CHECK(t.radial_velocities.front() == 0.0);
  for (double r : t.radii) REQUIRE(std::abs(r - cfg.R0) <= 1e-12 * cfg.R0);
  CHECK(t.radius_integral == doctest::Approx(cfg.R0 * cfg.T).epsilon(1e-12));
}

TEST_CASE("rayleigh-plesset default drive") {
  for (double rho : {500.0, 750.0, 999.0}) {
    RpConfig cfg;
    cfg.rho = rho;
    const RpTrajectory t = rp_solve(cfg);
    CHECK(t.radii.front() == 2.6e-6);
    CHECK(t.times.back() == cfg.T);
    CHECK(*std::min_element(t.radii.begin(), t.radii.end()) > 0.0);
    for (std::size_t i = 1; i < t.times.size(); ++i) REQUIRE(t.times[i] >= t.times[i - 1]);
    // Dense output reproduces the step values and stays positive between them.
    for (std::size_t i = 0; i < t.times.size(); i += 97) CHECK(t.radius_at(t.times[i]) == doctest::Approx(t.radii[i]));
    for (int i = 0; i <= 20000; ++i) REQUIRE(t.radius_at(cfg.T * i / 20000.0) > 0.0);
  }
}

TEST_CASE("rayleigh-plesset self-convergence") {
  RpConfig cfg;
  cfg.rho = 750.0;
  const double coarse = rp_solve(cfg).radius_integral;
  cfg.rtol /= 10;
  cfg.atol /= 10;
  const double fine = rp_solve(cfg).radius_integral;
  CHECK(std::abs(coarse - fine) / std::abs(fine) < 1e-6);
}

TEST_CASE("rayleigh-plesset undriven inviscid oscillation does not grow") {
  RpConfig cfg;
  cfg.drive_amplitude = 0.0;
  cfg.viscosity = 0.0;
  cfg.surface_tension = 0.0;
  cfg.initial_velocity = 1.0;
  const RpTrajectory t = rp_solve(cfg);
  double first = 0, second = 0;
  for (std::size_t i = 0; i < t.times.size(); ++i) {
    double& peak = t.times[i] < cfg.T / 2 ? first : second;
    peak = std::max(peak, t.radii[i]);
  }
  CHECK(first > cfg.R0 * 1.01);
  CHECK(second <= first * (1 + 1e-6));
}

TEST_CASE("rayleigh-plesset config validation") {
  RpConfig cfg;
  cfg.T = 0;
  CHECK(code_of([&] { rp_solve(cfg); }) == ErrorCode::InvalidArgument);
  cfg = RpConfig{};
  cfg.rtol = -1;
  CHECK(code_of([&] { rp_solve(cfg); }) == ErrorCode::InvalidArgument);
  cfg = RpConfig{};
  cfg.min_step = 1e-6;
  CHECK(code_of([&] { rp_solve(cfg); }) == ErrorCode::StiffnessFailure);
}

TEST_CASE("bubble integrand is the normalized radius") {
  const IntegrandSpec spec = IntegrandSpec::defaults(Family::RayleighPlesset);
  TrajectoryCache cache(4);
  const BoundIntegrand f(spec, {Family::RayleighPlesset, {750}}, cache);
  CHECK(f(0.0) == 1.0);
  RpConfig cfg = spec.rp;
  cfg.rho = 750;
  const auto traj = cache.get(cfg);
  CHECK(f(0.25) == traj->radius_at(0.25 * cfg.T) / cfg.R0);
  CHECK(cache.size() == 1);
}

TEST_CASE("trajectory cache is bounded and thread safe") {
  TrajectoryCache cache(3);
  std::vector<std::jthread> threads;
  for (int w = 0; w < 4; ++w) {
    threads.emplace_back([&cache, w] {
      for (int i = 0; i < 6; ++i) {
        RpConfig cfg;
        cfg.rho = 600 + 10 * ((i + w) % 5);
        cfg.T = 2e-5;
        REQUIRE(cache.get(cfg)->radii.front() == cfg.R0);
      }
    });
  }
  threads.clear();
  CHECK(cache.size() <= 3);
  cache.clear();
  CHECK(cache.size() == 0);
}

TEST_CASE("eval is pure") {
  const IntegrandSpec spec = IntegrandSpec::defaults(Family::Bessel);
  const ParamVector p{Family::Bessel, {160, 90}};
  for (double x = 0; x <= 1; x += 0.01) CHECK(eval(spec, p, x) == eval(spec, p, x));
}
