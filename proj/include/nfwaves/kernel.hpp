#pragma once

// Difference-of-exponentials lateral-inhibition kernel
//
//   K(x) = A exp(-a|x|) - B exp(-b|x|),   A > B > 0,  a > b > 0,
//
// and the closed-form integrals every solver in the library is built on.
// All integrals split at the kernel kink and are exact; quadrature only ever
// appears in the tests.

#include <array>
#include <complex>
#include <optional>

namespace nfwaves {

/// One signed exponential mode `amplitude * exp(-rate |x|)`.
struct ExpMode {
  double amplitude;
  double rate;
};

class KernelParams {
 public:
  /// Validates the lateral-inhibition class (A > B > 0, a > b > 0, A/a > B/b).
  static KernelParams make(double A, double a, double B, double b);

  /// The unnormalized example kernel A=5, a=0.5, B=4, b=0.4211.
  KernelParams() : KernelParams(5.0, 0.5, 4.0, 0.4211) {}

  double A() const noexcept { return A_; }
  double a() const noexcept { return a_; }
  double B() const noexcept { return B_; }
  double b() const noexcept { return b_; }

  /// Rate rho of the exponential envelope |K(x)| <= C exp(-rho |x|).
  double decay_rate() const noexcept { return b_ < a_ ? b_ : a_; }

  /// Total mass 2A/a - 2B/b.
  double mass() const noexcept { return 2.0 * A_ / a_ - 2.0 * B_ / b_; }

  /// Same shape with A and B rescaled so that the mass is exactly one.
  KernelParams normalized() const;

  std::array<ExpMode, 2> modes() const noexcept { return {{{A_, a_}, {-B_, b_}}}; }

 private:
  KernelParams(double A, double a, double B, double b) : A_(A), a_(a), B_(B), b_(b) {}

  double A_, a_, B_, b_;
};

/// Throws InvalidKernel when |mass - 1| exceeds `tol`.
void check_normalization(const KernelParams& p, double tol);

double eval_kernel(const KernelParams& p, double x);

/// Psi(z) = integral of K over (-inf, z].
double antiderivative(const KernelParams& p, double z);

/// Laplace-type tail L(w, s) = int_{-inf}^{w} exp(s (y - w)) K(y) dy.
/// Defined for Re(s) > -decay_rate; `s` may be complex (Evans matrix).
double laplace_tail(const KernelParams& p, double w, double s);
std::complex<double> laplace_tail(const KernelParams& p, double w, std::complex<double> s);

/// d/ds of laplace_tail for real s.
double laplace_tail_ds(const KernelParams& p, double w, double s);

/// int_{-inf}^{z} exp((x - z)/mu) K(x - shift) dx.
double exp_weighted_integral(const KernelParams& p, double z, double mu, double shift);

/// Excitation radius: K > 0 on (-M, M) and K < 0 outside.
double compute_M(const KernelParams& p);

struct SigmaConstants {
  double sigma1;
  std::optional<double> sigma2;  // absent when no root lies in (0, M)
  std::optional<double> sigma3;
  double M;
  double sigma_min;
};

/// Band-width constants bounding the span of the threshold region. Accepts
/// theta in [0, 1/2) and theta_plus_tau in (0, 1] so the endpoint values
/// sigma2(0) and sigma3(1) can be evaluated.
SigmaConstants compute_sigmas(const KernelParams& p, double theta, double theta_plus_tau);

struct SpeedIndex {
  double phi;
  double dphi;
};

/// phi(mu) = int_{-inf}^0 exp(x/mu) K(x) dx and its derivative in mu.
SpeedIndex speed_index(const KernelParams& p, double mu);

/// Wave speed of the single-Heaviside front: the root of
/// phi(mu) = Psi(0) - theta on the increasing branch of phi. Psi(0) is 1/2
/// for a normalized kernel.
double solve_heaviside_speed(const KernelParams& p, double theta, double mu_max = 1e6);

}  // namespace nfwaves
