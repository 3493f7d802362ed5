#include "oscint/bessel.hpp"

#include <cmath>
#include <numbers>

namespace oscint {
namespace {

constexpr double kSeriesLimit = 12.0;

// sum_k (-1)^k (x^2/4)^k / (k!)^2; largest term at |x| = 12 is ~4e3, so
// cancellation costs under four digits.
double j0_series(double x) {
  const double q = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= -q / (static_cast<double>(k) * k);
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum) && k > q) break;
  }
  return sum;
}

// Hankel expansion J0 = sqrt(2/(pi x)) (P cos chi - Q sin chi), chi = x - pi/4.
// The series is asymptotic; summation stops at the smallest term.
double j0_asymptotic(double x) {
  const double eightx = 8.0 * x;
  double p = 1.0;
  double q = 0.0;
  double term = 1.0;
  double last = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= -(odd * odd) / (k * eightx);
    if (std::abs(term) > std::abs(last) || std::abs(term) < 1e-18) break;
    last = term;
    // term_k carries sign of prod(mu - (2j-1)^2) with mu = 0; P and Q alternate on top of that.
    switch (k % 4) {
      case 1: q += term; break;
      case 2: p -= term; break;
      case 3: q -= term; break;
      case 0: p += term; break;
    }
  }
  const double s = std::sin(x);
  const double c = std::cos(x);
  const double cos_chi = (c + s) * std::numbers::sqrt2 * 0.5;
  const double sin_chi = (s - c) * std::numbers::sqrt2 * 0.5;
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * cos_chi - q * sin_chi);
}

}  // namespace

double bessel_j0(double x) {
  const double ax = std::abs(x);
  return ax < kSeriesLimit ? j0_series(ax) : j0_asymptotic(ax);
}

}  // namespace oscint
