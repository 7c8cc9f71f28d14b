#pragma once

// Smoothed Heaviside firing rates S_tau and their N-Heaviside staircases.
//
// The default family is the exponential bump
//
//   S_tau(u) = A(tau) * int_0^u exp(r / (x (x - tau))) dx,   0 < u < tau,
//
// with S = 0 below 0 and S = 1 above tau.  A custom family, given by a shape
// function on [0, 1], exists for tests that need asymmetric rates.

#include <functional>
#include <memory>
#include <vector>

namespace nfwaves {

namespace detail {
struct BumpTable;
}

class RateSpec {
 public:
  /// Bump family. tau = 0 gives the plain Heaviside.
  static RateSpec make(double theta, double tau, double r = 0.01);

  /// S_tau(u) = shape(u / tau) on (0, tau). `shape` must increase from 0 to 1.
  static RateSpec custom(double theta, double tau, std::function<double(double)> shape);

  /// Same family and theta at another smoothing width.
  RateSpec with_tau(double tau) const;

  double theta() const noexcept { return theta_; }
  double tau() const noexcept { return tau_; }
  double r() const noexcept { return r_; }
  bool is_bump() const noexcept { return !shape_; }

  /// A(tau) for the bump family (1 for custom and Heaviside rates). Can be
  /// +inf for very narrow bumps; evaluation does not use it.
  double normalizer() const noexcept { return normalizer_; }

  /// S_tau(u); the threshold is not subtracted here.
  double operator()(double u) const;

  /// S_tau'(u).
  double derivative(double u) const;

  /// int_0^tau S_tau(u) du.
  double integral() const;

 private:
  RateSpec() = default;

  double theta_ = 0.1;
  double tau_ = 0.0;
  double r_ = 0.01;
  double normalizer_ = 1.0;
  std::shared_ptr<const detail::BumpTable> table_;
  std::function<double(double)> shape_;
};

/// Adaptive quadrature of the bump mass; returns A(tau) = 1 / mass.
/// Throws QuadratureFailed when the error estimate misses 1e-12 relative.
double compute_normalizer(double tau, double r);

double eval_rate(const RateSpec& s, double u);

/// Lambda(tau, theta) = 1/2 - (theta + tau) + int_0^tau S_tau.
double lambda_speed_sign(const RateSpec& s);

/// Smallest zero of tau -> Lambda(tau, theta) in (0, 1 - theta), holding the
/// family of `s` fixed; 1 - theta when Lambda keeps one sign.
double tau_zero(const RateSpec& s);

enum class Spacing { Equal, Quantile };

struct Discretization {
  int N = 0;
  std::vector<double> deltas;  // 0 = Delta_0 < ... < Delta_N = tau
  std::vector<double> alphas;  // right-endpoint weights, alpha_N = 0

  /// S_{tau,N}(u) = sum of alpha_k over Delta_k < u.
  double operator()(double u) const;
};

/// Single Heaviside at the threshold (N = 0, Delta = {0}, alpha = {1}).
Discretization heaviside_discretization();

Discretization discretize(const RateSpec& s, int N, Spacing spacing = Spacing::Equal);

/// || S_{tau,N} - S_tau ||_1 over (0, tau).
double discretization_l1_error(const RateSpec& s, const Discretization& d);

struct FixedPoints {
  double low;
  double mid;
  double high;
};

/// Roots of u = S(u - theta). Throws NotBistable when the middle root cannot
/// be bracketed.
FixedPoints find_fixed_points(const RateSpec& s);

/// int_theta^{theta+tau} (-u + S(u - theta)) S'(u - theta) du - Lambda.
double wave_formula_identity(const RateSpec& s);

/// Largest pointwise violation of S(tau/2 + v) + S(tau/2 - v) = 1 on a grid.
double odd_symmetry_defect(const RateSpec& s, int samples = 2001);

}  // namespace nfwaves
