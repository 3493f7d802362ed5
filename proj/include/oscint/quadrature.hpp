#pragma once

/**
 * Composite Newton-Cotes rules on uniform grids.
 *
 * Every rule is a weighted sum of function values; the FLOP model charges
 * one multiply-add per node plus a final scaling:
 *   trapezoid  2 n_q + 1
 *   midpoint   3 n_q + 1
 *   simpson    4.5 n_q + 2   (n_q even, so always integral)
 *
 * n_q counts panels. Trapezoid and Simpson sample n_q + 1 nodes including
 * both endpoints; midpoint samples the n_q panel centres.
 */

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace oscint {

enum class Rule { Trapezoid, Midpoint, Simpson };

std::string_view to_string(Rule rule);
Rule parse_rule(std::string_view name);

struct Domain {
  double s1 = 0.0;
  double s2 = 1.0;

  double width() const { return s2 - s1; }
  bool operator==(const Domain&) const = default;
};

struct Grid {
  Rule rule = Rule::Trapezoid;
  double s1 = 0.0;
  double s2 = 1.0;
  int n_q = 1;
  std::vector<double> abscissae;

  double dx() const { return (s2 - s1) / n_q; }
};

/// Number of function samples the rule consumes for n_q panels.
std::size_t node_count(Rule rule, int n_q);

Grid make_grid(Rule rule, double s1, double s2, int n_q);

/// Weighted sum over `values`, accumulated left to right in double precision.
/// Throws LengthMismatch when values.size() is not a valid node count.
double integrate(Rule rule, std::span<const double> values, double dx);

/// Convenience: sample `f` on make_grid(rule, ...) and integrate.
double integrate(Rule rule, const std::function<double(double)>& f, double s1, double s2,
                 int n_q);

std::uint64_t flop_cost(Rule rule, std::uint64_t n_q);

/// log2(err(n) / err(2n)). When `reference` is empty the trapezoid rule at
/// 2^13 panels stands in for the exact integral.
double empirical_order(Rule rule, const std::function<double(double)>& f, Domain domain,
                       int n_coarse, std::optional<double> reference = std::nullopt);

}  // namespace oscint
