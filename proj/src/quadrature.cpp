#include "oscint/quadrature.hpp"

#include <cmath>
#include <string>

#include "oscint/error.hpp"

namespace oscint {

std::string_view to_string(Rule rule) {
  switch (rule) {
    case Rule::Trapezoid: return "trapezoid";
    case Rule::Midpoint: return "midpoint";
    case Rule::Simpson: return "simpson";
  }
  return "unknown";
}

Rule parse_rule(std::string_view name) {
  if (name == "trapezoid") return Rule::Trapezoid;
  if (name == "midpoint") return Rule::Midpoint;
  if (name == "simpson") return Rule::Simpson;
  throw Error(ErrorCode::InvalidArgument, "unknown rule '" + std::string(name) + "'");
}

std::size_t node_count(Rule rule, int n_q) {
  return rule == Rule::Midpoint ? static_cast<std::size_t>(n_q)
                                : static_cast<std::size_t>(n_q) + 1;
}

Grid make_grid(Rule rule, double s1, double s2, int n_q) {
  if (!(s1 < s2) || !std::isfinite(s1) || !std::isfinite(s2)) {
    throw Error(ErrorCode::InvalidDomain,
                "need s1 < s2, got [" + std::to_string(s1) + ", " + std::to_string(s2) + "]");
  }
  if (n_q < 1) throw Error(ErrorCode::InvalidArgument, "n_q must be >= 1");
  if (rule == Rule::Simpson && n_q % 2 != 0) {
    throw Error(ErrorCode::SimpsonOddCount, "simpson needs an even panel count, got " +
                                                std::to_string(n_q));
  }

  Grid grid{rule, s1, s2, n_q, {}};
  const double dx = grid.dx();
  const std::size_t count = node_count(rule, n_q);
  grid.abscissae.resize(count);
  if (rule == Rule::Midpoint) {
    for (int k = 1; k <= n_q; ++k) grid.abscissae[k - 1] = s1 + (k - 0.5) * dx;
  } else {
    for (int k = 0; k < n_q; ++k) grid.abscissae[k] = s1 + k * dx;
    grid.abscissae[n_q] = s2;
  }
  return grid;
}

double integrate(Rule rule, std::span<const double> values, double dx) {
  const std::size_t n = values.size();
  if (!(dx > 0.0)) throw Error(ErrorCode::InvalidArgument, "dx must be positive");

  switch (rule) {
    case Rule::Trapezoid: {
      if (n < 2) throw Error(ErrorCode::LengthMismatch, "trapezoid needs >= 2 values");
      double acc = 0.5 * values[0];
      for (std::size_t k = 1; k + 1 < n; ++k) acc += values[k];
      acc += 0.5 * values[n - 1];
      return acc * dx;
    }
    case Rule::Midpoint: {
      if (n < 1) throw Error(ErrorCode::LengthMismatch, "midpoint needs >= 1 value");
      double acc = 0.0;
      for (double v : values) acc += v;
      return acc * dx;
    }
    case Rule::Simpson: {
      if (n < 3 || n % 2 == 0) {
        throw Error(ErrorCode::LengthMismatch,
                    "simpson needs an odd count >= 3, got " + std::to_string(n));
      }
      double acc = values[0];
      for (std::size_t k = 1; k + 1 < n; ++k) acc += (k % 2 == 1 ? 4.0 : 2.0) * values[k];
      acc += values[n - 1];
      return acc * (dx / 3.0);
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown rule");
}

double integrate(Rule rule, const std::function<double(double)>& f, double s1, double s2,
                 int n_q) {
  const Grid grid = make_grid(rule, s1, s2, n_q);
  std::vector<double> values(grid.abscissae.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = f(grid.abscissae[i]);
  return integrate(rule, values, grid.dx());
}

std::uint64_t flop_cost(Rule rule, std::uint64_t n_q) {
  switch (rule) {
    case Rule::Trapezoid: return 2 * n_q + 1;
    case Rule::Midpoint: return 3 * n_q + 1;
    // ceil(4.5 n + 2) == ceil((9 n + 4) / 2)
    case Rule::Simpson: return (9 * n_q + 5) / 2;
  }
  return 0;
}

double empirical_order(Rule rule, const std::function<double(double)>& f, Domain domain,
                       int n_coarse, std::optional<double> reference) {
  if (n_coarse < 4) throw Error(ErrorCode::InvalidArgument, "n_coarse must be >= 4");
  const double exact =
      reference ? *reference : integrate(Rule::Trapezoid, f, domain.s1, domain.s2, 1 << 13);
  const double coarse = std::abs(integrate(rule, f, domain.s1, domain.s2, n_coarse) - exact);
  const double fine = std::abs(integrate(rule, f, domain.s1, domain.s2, 2 * n_coarse) - exact);
  if (coarse == 0.0 && fine == 0.0) {
    throw Error(ErrorCode::ZeroError, "both errors are zero; integrand is integrated exactly");
  }
  return std::log2(coarse / fine);
}

}  // namespace oscint
