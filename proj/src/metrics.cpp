#include "oscint/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "oscint/error.hpp"

namespace oscint {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::NeuralNet: return "nn";
    case Method::Trapezoid: return "trapezoid";
    case Method::Midpoint: return "midpoint";
    case Method::Simpson: return "simpson";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "nn") return Method::NeuralNet;
  return method_of(parse_rule(name));
}

Method method_of(Rule rule) {
  switch (rule) {
    case Rule::Trapezoid: return Method::Trapezoid;
    case Rule::Midpoint: return Method::Midpoint;
    case Rule::Simpson: return Method::Simpson;
  }
  return Method::Trapezoid;
}

double normalized_mse(std::span<const double> predictions, std::span<const double> truths) {
  if (predictions.size() != truths.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(predictions.size()) + " predictions vs " +
                                               std::to_string(truths.size()) + " truths");
  }
  if (truths.empty()) throw Error(ErrorCode::EmptyInput, "normalized MSE of zero samples");
  double acc = 0.0;
  for (std::size_t k = 0; k < truths.size(); ++k) {
    const double eps = 1e-12 * (1.0 + std::abs(truths[k]));
    const double denom = std::max(truths[k] * truths[k], eps * eps);
    const double diff = truths[k] - predictions[k];
    acc += diff * diff / denom;
  }
  return acc / static_cast<double>(truths.size());
}

double alpha(std::uint64_t flops_nn, std::uint64_t flops_qm) {
  if (flops_nn == 0) throw Error(ErrorCode::InvalidArgument, "flops_nn must be >= 1");
  const double nn = static_cast<double>(flops_nn);
  return std::abs(nn - static_cast<double>(flops_qm)) / nn;
}

void MethodCurve::sort() {
  std::stable_sort(points.begin(), points.end(),
                   [](const CurvePoint& a, const CurvePoint& b) { return a.flops < b.flops; });
}

std::uint64_t flops_at_accuracy(const MethodCurve& curve, double target_nmse) {
  if (curve.points.empty()) throw Error(ErrorCode::TargetUnreachable, "empty curve");
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const CurvePoint& hit = curve.points[i];
    if (!(hit.nmse <= target_nmse)) continue;
    if (i == 0 || hit.nmse == target_nmse || hit.nmse <= 0.0) return hit.flops;
    const CurvePoint& prev = curve.points[i - 1];
    const double lf0 = std::log(static_cast<double>(prev.flops));
    const double lf1 = std::log(static_cast<double>(hit.flops));
    const double le0 = std::log(prev.nmse);
    const double le1 = std::log(hit.nmse);
    const double lt = std::log(target_nmse);
    const double lf = lf0 + (lt - le0) * (lf1 - lf0) / (le1 - le0);
    const double flops = std::ceil(std::exp(lf));
    return std::clamp(static_cast<std::uint64_t>(flops), prev.flops, hit.flops);
  }
  throw Error(ErrorCode::TargetUnreachable,
              std::string(to_string(curve.method)) + " never reaches NMSE " + std::to_string(target_nmse));
}

AlphaResult alpha_from_curves(Family family, const MethodCurve& nn,
                              std::span<const MethodCurve> classical, double target_nmse) {
  AlphaResult r;
  r.family = family;
  r.target_nmse = target_nmse;
  r.flops_nn = flops_at_accuracy(nn, target_nmse);
  bool found = false;
  for (const MethodCurve& c : classical) {
    try {
      const std::uint64_t f = flops_at_accuracy(c, target_nmse);
      if (!found || f < r.flops_qm) {
        r.flops_qm = f;
        r.best_rule = c.method;
        found = true;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::TargetUnreachable) throw;
    }
  }
  if (!found) throw Error(ErrorCode::TargetUnreachable, "no classical rule reaches the target");
  r.alpha = alpha(r.flops_nn, r.flops_qm);
  r.gain = static_cast<double>(r.flops_qm) / static_cast<double>(r.flops_nn);
  return r;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "spearman inputs differ in length");
  const std::size_t n = a.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double mean = 0.5 * static_cast<double>(n + 1);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (ra[i] - mean) * (rb[i] - mean);
    saa += (ra[i] - mean) * (ra[i] - mean);
    sbb += (rb[i] - mean) * (rb[i] - mean);
  }
  if (saa == 0 || sbb == 0) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

}  // namespace oscint
