#pragma once

/**
 * Parametric integrand families.
 *
 *   bessel        cos(k x) J0(nu x)          nu in [125,175], k in [75,125]
 *   ew1           cos(k1 x^2) sin(k2 x)      k1 in [5,15],   k2 in [25,75]
 *   rayleigh      R(t) / R0 of a driven bubble, t = (x - s1)/(s2 - s1) T
 *                                            rho in [500,1000)
 *   ew2           exp(x) sin(k cosh x)       k in [25,75]
 *   sine          sin(k x)                   k in [5,15]
 *   exponential   exp(k x)                   k in [1,5]
 *
 * Larger parameters mean a more oscillatory integrand (except rho, where
 * lighter liquids oscillate faster).
 */

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "oscint/quadrature.hpp"
#include "oscint/rayleigh_plesset.hpp"
#include "oscint/rng.hpp"

namespace oscint {

enum class Family { Bessel, EvanWebster1, RayleighPlesset, EvanWebster2, Sine, Exponential };

inline constexpr std::array<Family, 6> kAllFamilies = {
    Family::Bessel, Family::EvanWebster1, Family::RayleighPlesset,
    Family::EvanWebster2, Family::Sine, Family::Exponential};

std::string_view to_string(Family family);
Family parse_family(std::string_view name);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool closed_hi = true;

  bool contains(double v) const { return v >= lo && (closed_hi ? v <= hi : v < hi); }
  bool operator==(const Interval&) const = default;
};

struct ParamSpace {
  std::vector<Interval> intervals;

  /// Multiplies every bound by `factor`; used to push a family towards
  /// stronger oscillation.
  ParamSpace scaled(double factor) const;
  bool operator==(const ParamSpace&) const = default;
};

ParamSpace default_param_space(Family family);
std::vector<std::string_view> param_names(Family family);

struct ParamVector {
  Family family = Family::Sine;
  std::vector<double> values;

  bool operator==(const ParamVector&) const = default;
};

/// Everything needed to evaluate one family: its parameter space, the
/// integration domain and, for the bubble family, the ODE settings.
struct IntegrandSpec {
  Family family = Family::Sine;
  ParamSpace space;
  Domain domain;
  RpConfig rp;

  static IntegrandSpec defaults(Family family);
  /// Parameter vector at the most oscillatory corner of `space`.
  ParamVector most_oscillatory() const;
};

void check_params(const IntegrandSpec& spec, const ParamVector& params);

/// Process-wide, lock-protected store of solved bubble trajectories keyed by
/// the full RpConfig. Bounded; least recently used entries are evicted.
class TrajectoryCache {
 public:
  explicit TrajectoryCache(std::size_t capacity = 64) : capacity_(capacity) {}

  std::shared_ptr<const RpTrajectory> get(const RpConfig& cfg);
  std::size_t size() const;
  void clear();

  static TrajectoryCache& global();

 private:
  using Key = std::array<double, 14>;
  struct Entry {
    std::shared_ptr<const RpTrajectory> trajectory;
    std::uint64_t last_use = 0;
  };
  static Key key_of(const RpConfig& cfg);

  mutable std::mutex mutex_;
  std::size_t capacity_;
  std::uint64_t clock_ = 0;
  std::map<Key, Entry> entries_;
};

/// A family with its parameters fixed; cheap to copy and safe to share.
class BoundIntegrand {
 public:
  BoundIntegrand(const IntegrandSpec& spec, const ParamVector& params,
                 TrajectoryCache& cache = TrajectoryCache::global());

  double operator()(double x) const;
  const Domain& domain() const { return domain_; }

 private:
  Family family_;
  Domain domain_;
  double p0_ = 0.0;
  double p1_ = 0.0;
  double r0_ = 1.0;
  double horizon_ = 1.0;
  std::shared_ptr<const RpTrajectory> trajectory_;
};

double eval(const IntegrandSpec& spec, const ParamVector& params, double x);
double eval(Family family, const ParamVector& params, double x);

/// i.i.d. uniform draw over spec.space.
ParamVector sample_params(const IntegrandSpec& spec, Rng& rng);
ParamVector sample_params(Family family, Rng& rng);

}  // namespace oscint
