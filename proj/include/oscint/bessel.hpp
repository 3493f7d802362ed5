#pragma once

namespace oscint {

/// Bessel function of the first kind, order zero.
///
/// Power series for |x| < 12, Hankel asymptotic expansion beyond. Absolute
/// error stays below 1e-10 on the whole real line.
double bessel_j0(double x);

}  // namespace oscint
