#pragma once

// Traveling fronts U(z), z = x + mu t, of
//
//   mu U' + U = int K(z - y) S(U(y) - theta) dy
//
// with S replaced by the staircase sum_k alpha_k H(u - theta - Delta_k).
// The profile is closed form in (mu, z_0..z_N); the crossings solve
// U(z_k) = theta + Delta_k with z_0 = 0.

#include <optional>
#include <vector>

#include "nfwaves/firing_rate.hpp"
#include "nfwaves/kernel.hpp"
#include "nfwaves/newton.hpp"

namespace nfwaves {

struct FrontSolution {
  double mu = 0.0;
  std::vector<double> crossings;  // z_0 = 0 < z_1 < ... < z_N
  KernelParams kernel;
  Discretization disc;
  double theta = 0.1;
  double residual_norm = 0.0;
};

/// Heaviside front U_0 with speed mu0 = solve_heaviside_speed(k, theta).
double heaviside_front(const KernelParams& k, double theta, double z);
double heaviside_front(const KernelParams& k, double mu0, double theta, double z);

/// Converged N = 0 solution used to seed continuation.
FrontSolution heaviside_seed(const KernelParams& k, double theta);

double eval_front(const FrontSolution& sol, double z);
double eval_front_deriv(const FrontSolution& sol, double z);

/// mu U'(z) + U(z) - sum_k alpha_k Psi(z - z_k), which vanishes identically.
double front_equation_residual(const FrontSolution& sol, double z);

/// Threshold residuals U(z_k) - theta - Delta_k and their Jacobian in the
/// unknowns (mu, g_1..g_N), g_k = log(z_k - z_{k-1}).
ResidualFn front_residual_fn(const KernelParams& k, const Discretization& disc, double theta);

/// Damped Newton from `guess` (its mu and crossings). The guess needs N + 1
/// strictly increasing crossings with crossings[0] = 0 and mu > 0.
FrontSolution solve_front(const KernelParams& k, const Discretization& disc, double theta,
                          const FrontSolution& guess, const NewtonOptions& opt = {});

struct H1Report {
  double z_span = 0.0;
  double sigma_min = 0.0;
  bool monotone_ok = false;
  bool single_crossing_ok = false;
  bool holds = false;
};

H1Report check_H1(const FrontSolution& sol, const SigmaConstants& sig, int samples = 10000);

struct ContinuationStep {
  double tau;
  FrontSolution front;
  H1Report h1;
};

struct ContinuationTrace {
  std::vector<ContinuationStep> steps;
  std::optional<double> tau_star;                          // first tau found failing
  std::optional<std::pair<double, double>> tau_star_bracket;  // (last holding, first failing)
};

struct ContinuationOptions {
  int N = 20;
  double tau_max = 0.6;
  double step = 0.01;
  Spacing spacing = Spacing::Equal;
};

/// Sweeps tau from the Heaviside seed, re-solving at every step from the
/// previous crossings rescaled to the new Deltas. Stops at the first H1
/// failure and bisects down to step / 16.
ContinuationTrace continue_in_tau(const KernelParams& k, const RateSpec& rate,
                                  const ContinuationOptions& opt);

/// Front at rate.tau() reached by marching from the Heaviside seed in steps
/// of at most `step`, without the H1 stopping rule.
FrontSolution front_at_tau(const KernelParams& k, const RateSpec& rate, int N, double step = 0.01,
                           Spacing spacing = Spacing::Equal);

}  // namespace nfwaves
