#include "oscint/integrands.hpp"

#include <cmath>
#include <sstream>

#include "oscint/bessel.hpp"
#include "oscint/error.hpp"

namespace oscint {

std::string_view to_string(Family family) {
  switch (family) {
    case Family::Bessel: return "bessel";
    case Family::EvanWebster1: return "ew1";
    case Family::RayleighPlesset: return "rayleigh_plesset";
    case Family::EvanWebster2: return "ew2";
    case Family::Sine: return "sine";
    case Family::Exponential: return "exponential";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  for (Family f : kAllFamilies) {
    if (name == to_string(f)) return f;
  }
  if (name == "evan_webster_1") return Family::EvanWebster1;
  if (name == "evan_webster_2") return Family::EvanWebster2;
  if (name == "rp") return Family::RayleighPlesset;
  if (name == "exp") return Family::Exponential;
  throw Error(ErrorCode::InvalidArgument, "unknown family '" + std::string(name) + "'");
}

ParamSpace ParamSpace::scaled(double factor) const {
  ParamSpace out = *this;
  for (Interval& iv : out.intervals) {
    iv.lo *= factor;
    iv.hi *= factor;
  }
  return out;
}

ParamSpace default_param_space(Family family) {
  switch (family) {
    case Family::Bessel: return {{{125.0, 175.0}, {75.0, 125.0}}};
    case Family::EvanWebster1: return {{{5.0, 15.0}, {25.0, 75.0}}};
    case Family::RayleighPlesset: return {{{500.0, 1000.0, false}}};
    case Family::EvanWebster2: return {{{25.0, 75.0}}};
    case Family::Sine: return {{{5.0, 15.0}}};
    case Family::Exponential: return {{{1.0, 5.0}}};
  }
  return {};
}

std::vector<std::string_view> param_names(Family family) {
  switch (family) {
    case Family::Bessel: return {"nu", "k"};
    case Family::EvanWebster1: return {"k1", "k2"};
    case Family::RayleighPlesset: return {"rho"};
    default: return {"k"};
  }
}

IntegrandSpec IntegrandSpec::defaults(Family family) {
  IntegrandSpec spec;
  spec.family = family;
  spec.space = default_param_space(family);
  return spec;
}

ParamVector IntegrandSpec::most_oscillatory() const {
  ParamVector p{family, {}};
  for (const Interval& iv : space.intervals) {
    if (family == Family::RayleighPlesset) {
      p.values.push_back(iv.lo);
    } else {
      p.values.push_back(iv.closed_hi ? iv.hi : std::nextafter(iv.hi, iv.lo));
    }
  }
  return p;
}

void check_params(const IntegrandSpec& spec, const ParamVector& params) {
  if (params.family != spec.family || params.values.size() != spec.space.intervals.size()) {
    throw Error(ErrorCode::ParamOutOfSpace, "parameter vector does not match family " +
                                                std::string(to_string(spec.family)));
  }
  for (std::size_t i = 0; i < params.values.size(); ++i) {
    if (!spec.space.intervals[i].contains(params.values[i])) {
      std::ostringstream msg;
      msg << to_string(spec.family) << " parameter " << param_names(spec.family)[i] << " = "
          << params.values[i] << " outside [" << spec.space.intervals[i].lo << ", "
          << spec.space.intervals[i].hi << (spec.space.intervals[i].closed_hi ? "]" : ")");
      throw Error(ErrorCode::ParamOutOfSpace, msg.str());
    }
  }
}

TrajectoryCache::Key TrajectoryCache::key_of(const RpConfig& c) {
  return {c.rho, c.R0, c.T, c.delta_p, c.surface_tension, c.viscosity, c.polytropic_k,
          c.drive_amplitude, c.drive_angular_frequency, c.rtol, c.atol, c.min_step,
          c.initial_velocity, 0.0};
}

std::shared_ptr<const RpTrajectory> TrajectoryCache::get(const RpConfig& cfg) {
  const Key key = key_of(cfg);
  {
    std::lock_guard lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) {
      it->second.last_use = ++clock_;
      return it->second.trajectory;
    }
  }
  // Solved outside the lock; a concurrent duplicate solve yields an identical result.
  auto traj = std::make_shared<const RpTrajectory>(rp_solve(cfg));
  std::lock_guard lock(mutex_);
  auto [it, inserted] = entries_.try_emplace(key, Entry{traj, ++clock_});
  if (inserted && entries_.size() > capacity_) {
    auto oldest = entries_.begin();
    for (auto e = entries_.begin(); e != entries_.end(); ++e) {
      if (e->second.last_use < oldest->second.last_use) oldest = e;
    }
    entries_.erase(oldest);
  }
  return it->second.trajectory;
}

std::size_t TrajectoryCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

void TrajectoryCache::clear() {
  std::lock_guard lock(mutex_);
  entries_.clear();
}

TrajectoryCache& TrajectoryCache::global() {
  static TrajectoryCache cache(256);
  return cache;
}

BoundIntegrand::BoundIntegrand(const IntegrandSpec& spec, const ParamVector& params,
                               TrajectoryCache& cache)
    : family_(spec.family), domain_(spec.domain) {
  if (!(domain_.s1 < domain_.s2)) throw Error(ErrorCode::InvalidDomain, "need s1 < s2");
  check_params(spec, params);
  p0_ = params.values[0];
  if (params.values.size() > 1) p1_ = params.values[1];
  if (family_ == Family::RayleighPlesset) {
    RpConfig rp = spec.rp;
    rp.rho = p0_;
    r0_ = rp.R0;
    horizon_ = rp.T;
    trajectory_ = cache.get(rp);
  }
}

double BoundIntegrand::operator()(double x) const {
  if (!(x >= domain_.s1 && x <= domain_.s2)) {
    std::ostringstream msg;
    msg << "x = " << x << " outside [" << domain_.s1 << ", " << domain_.s2 << "]";
    throw Error(ErrorCode::OutOfDomain, msg.str());
  }
  switch (family_) {
    case Family::Bessel: return std::cos(p1_ * x) * bessel_j0(p0_ * x);
    case Family::EvanWebster1: return std::cos(p0_ * x * x) * std::sin(p1_ * x);
    case Family::RayleighPlesset: {
      const double t = (x - domain_.s1) / domain_.width() * horizon_;
      return trajectory_->radius_at(t) / r0_;
    }
    case Family::EvanWebster2: return std::exp(x) * std::sin(p0_ * std::cosh(x));
    case Family::Sine: return std::sin(p0_ * x);
    case Family::Exponential: return std::exp(p0_ * x);
  }
  return 0.0;
}

double eval(const IntegrandSpec& spec, const ParamVector& params, double x) {
  return BoundIntegrand(spec, params)(x);
}

double eval(Family family, const ParamVector& params, double x) {
  return eval(IntegrandSpec::defaults(family), params, x);
}

ParamVector sample_params(const IntegrandSpec& spec, Rng& rng) {
  ParamVector p{spec.family, {}};
  p.values.reserve(spec.space.intervals.size());
  for (const Interval& iv : spec.space.intervals) {
    p.values.push_back(rng.uniform(iv.lo, iv.hi));
  }
  return p;
}

ParamVector sample_params(Family family, Rng& rng) {
  return sample_params(IntegrandSpec::defaults(family), rng);
}

}  // namespace oscint
