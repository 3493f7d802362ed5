#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "oscint/integrands.hpp"
#include "oscint/quadrature.hpp"

namespace oscint {

enum class Method { NeuralNet, Trapezoid, Midpoint, Simpson };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);
Method method_of(Rule rule);

/// Mean of (I_k - Î_k)^2 / max(I_k^2, eps_k^2), eps_k = 1e-12 (1 + |I_k|).
double normalized_mse(std::span<const double> predictions, std::span<const double> truths);

/// |flops_nn - flops_qm| / flops_nn
double alpha(std::uint64_t flops_nn, std::uint64_t flops_qm);

struct CurvePoint {
  int n_q = 0;
  std::uint64_t flops = 0;
  double nmse = 0.0;
};

struct MethodCurve {
  Method method = Method::NeuralNet;
  std::vector<CurvePoint> points;  // ascending flops

  void sort();
};

/// Smallest FLOP count at which the curve reaches `target_nmse`, using log-log
/// interpolation between the bracketing points and rounding up. Throws
/// TargetUnreachable if no point attains the target.
std::uint64_t flops_at_accuracy(const MethodCurve& curve, double target_nmse);

struct AlphaResult {
  Family family = Family::Sine;
  double target_nmse = 1e-3;
  std::uint64_t flops_nn = 0;
  std::uint64_t flops_qm = 0;
  Method best_rule = Method::Trapezoid;
  double alpha = 0.0;
  /// flops_qm / flops_nn; above one means the network is cheaper.
  double gain = 0.0;
};

/// Compares the network curve against the cheapest classical rule that reaches
/// the target. Throws TargetUnreachable if the network or every rule misses it.
AlphaResult alpha_from_curves(Family family, const MethodCurve& nn,
                              std::span<const MethodCurve> classical, double target_nmse);

/// Spearman rank correlation with average ranks for ties. NaN for fewer than
/// two points or a constant input.
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace oscint
