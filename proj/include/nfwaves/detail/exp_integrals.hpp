#pragma once

// Scalar building blocks for the piecewise-exponential integrals.
// Templated on the scalar so the Evans matrix can reuse them with complex s.

#include <cmath>
#include <complex>

namespace nfwaves::detail {

inline double expm1_(double x) { return std::expm1(x); }

inline std::complex<double> expm1_(std::complex<double> z) {
  double x = z.real(), y = z.imag();
  double sh = std::sin(0.5 * y);
  return {std::expm1(x) * std::cos(y) - 2.0 * sh * sh, std::exp(x) * std::sin(y)};
}

// E1(x) = (1 - exp(-x)) / x, analytic with E1(0) = 1.
template <class T>
T e1(T x) {
  if (std::abs(x) < 1e-3) {
    return T(1.0) + x * (T(-0.5) + x * (T(1.0 / 6.0) + x * (T(-1.0 / 24.0) + x * T(1.0 / 120.0))));
  }
  return -expm1_(-x) / x;
}

// Derivative of E1.
inline double e1_prime(double x) {
  if (std::abs(x) < 0.1) {
    // sum_{n>=1} (-1)^n n x^(n-1) / (n+1)!
    double term_sum = 0.0, xp = 1.0, fact = 2.0;
    for (int n = 1; n <= 14; ++n) {
      double t = n * xp / fact;
      term_sum += (n % 2 ? -t : t);
      xp *= x;
      fact *= (n + 2);
    }
    return term_sum;
  }
  return (std::expm1(-x) + x * std::exp(-x)) / (x * x);
}

// One mode c*exp(-s|y|) of L(w, p) = int_{-inf}^{w} exp(p (y - w)) K(y) dy.
// For w > 0 the inner piece is exp(-s w) w E1((p - s) w). When (p - s) w is
// far below zero E1 overflows, and the equivalent two-exponential difference
// has no cancellation left to worry about.
template <class T>
T mode_tail(double c, double s, double w, T p) {
  if (w <= 0.0) return c * std::exp(s * w) / (p + s);
  T x = (p - s) * w;
  T inner = std::real(x) > -30.0 ? std::exp(-s * w) * w * e1(x)
                                 : (std::exp(-s * w) - std::exp(-p * w)) / (p - s);
  return c * (std::exp(-p * w) / (p + s) + inner);
}

inline double mode_tail_dp(double c, double s, double w, double p) {
  double ps = p + s;
  if (w <= 0.0) return -c * std::exp(s * w) / (ps * ps);
  double d = p - s, x = d * w;
  double inner = x > -30.0 ? std::exp(-s * w) * w * w * e1_prime(x)
                           : (w * std::exp(-p * w) * d - (std::exp(-s * w) - std::exp(-p * w))) / (d * d);
  return -c * std::exp(-p * w) * (w / ps + 1.0 / (ps * ps)) + c * inner;
}

// One mode of Psi(z) = int_{-inf}^{z} c exp(-s|y|) dy.
inline double mode_antiderivative(double c, double s, double z) {
  if (z <= 0.0) return c / s * std::exp(s * z);
  return c / s * (2.0 - std::exp(-s * z));
}

}  // namespace nfwaves::detail
