#pragma once

// Point spectrum of the linearization about a staircase front. Eigenvalues
// in Re(lambda) > -1 are the zeros of E(lambda) = det(I - A(lambda)) with
//
//   a_jk = alpha_k / (mu U'(z_k)) int_{-inf}^0 exp((lambda + 1) x / mu) K(x + z_j - z_k) dx.

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "nfwaves/front.hpp"

namespace nfwaves {

using cplx = std::complex<double>;

struct EvansContext {
  FrontSolution front;
  std::vector<double> derivs;  // U'(z_k)
  std::vector<double> alphas;

  /// Rejects fronts with U'(z_k) <= 0 (LostMonotonicity).
  static EvansContext from_front(const FrontSolution& front);

  /// Unchecked context with supplied derivatives, for negative controls.
  static EvansContext with_derivs(const FrontSolution& front, std::vector<double> derivs);

  int size() const { return static_cast<int>(alphas.size()); }
};

cplx matrix_entry(const EvansContext& ctx, int j, int k, cplx lambda);

Eigen::MatrixXcd evans_matrix(const EvansContext& ctx, cplx lambda);

cplx evans_value(const EvansContext& ctx, cplx lambda);

/// Central-difference dE/dlambda.
cplx evans_derivative(const EvansContext& ctx, cplx lambda, double h = 1e-6);

struct OriginCheck {
  cplx value;              // E(0)
  double eigen_residual;   // |A(0) v - v| / |v| with v = U'(z_k)
  cplx derivative;         // dE/dlambda at 0
  bool simple;
};

OriginCheck verify_zero_at_origin(const EvansContext& ctx, double tol = 1e-8,
                                  double deriv_tol = 1e-6);

struct ScanOptions {
  double re_min = 0.0, re_max = 5.0;
  double im_min = 0.0, im_max = 20.0;
  int n_re = 256, n_im = 256;
  double candidate_threshold = 0.25;  // local minima of |E| below this are refined
  double newton_tol = 1e-10;
  double origin_radius = 1e-4;
};

struct EvansZero {
  cplx lambda;
  double abs_value;
  bool is_origin;
};

struct EvansScan {
  ScanOptions options;
  std::vector<cplx> grid;    // row-major, im index outer
  std::vector<cplx> values;  // E at each grid sample
  std::vector<EvansZero> zeros;
  double essential_line = -1.0;

  /// Zeros with Re >= 0 outside the origin ball.
  std::vector<EvansZero> instability_zeros() const;
};

/// Modulus grid, local minima, complex Newton refinement. Requires at least
/// 32 samples per axis and re_min > -1.
EvansScan scan(const EvansContext& ctx, const ScanOptions& opt = {});

/// Complex Newton on E from `start`; the boolean reports convergence.
std::pair<cplx, bool> refine_zero(const EvansContext& ctx, cplx start, double tol = 1e-10,
                                  int max_iter = 60);

/// Winding number of E along the boundary of [re0, re1] x [im0, im1].
int winding_number(const EvansContext& ctx, double re0, double re1, double im0, double im1,
                   int samples_per_side = 2000);

/// Re(lambda) of the essential spectrum; the same line for every front.
double essential_spectrum(const EvansContext& ctx);

enum class Verdict { Stable, Unstable, Inconclusive };

std::string to_string(Verdict v);

Verdict stability_verdict(const OriginCheck& origin, const EvansScan& scan);

}  // namespace nfwaves
