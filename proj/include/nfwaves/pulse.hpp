#pragma once

// Fast traveling pulses (U, Q) of the adaptation system
//
//   mu U' + U + Q = int K(z - y) S(U(y) - theta) dy,   mu Q' = eps (U - gamma Q),
//
// for the staircase rate. Each level theta + Delta_k is crossed upward at
// eta_k and downward at kappa_{N-k}; the profile is closed form in those
// crossings and mu.

#include <utility>
#include <vector>

#include "nfwaves/firing_rate.hpp"
#include "nfwaves/front.hpp"
#include "nfwaves/kernel.hpp"

namespace nfwaves {

struct PulseParams {
  double epsilon = 0.005;
  double gamma = 0.001;
};

/// (omega_1, omega_2), the two roots with omega_1 > omega_2 > 0. Throws
/// ComplexBranch when (1 - gamma eps)^2 - 4 eps <= 0.
std::pair<double, double> omega(const PulseParams& params);

/// Weights of the variation-of-constants solution.
double weight_C(double x, double mu, const PulseParams& params);
double weight_D(double x, double mu, const PulseParams& params);

struct PulseSolution {
  double mu = 0.0;
  std::vector<double> etas;    // up-crossings, etas[0] = 0
  std::vector<double> kappas;  // down-crossings, etas.back() < kappas[0]
  PulseParams params;
  KernelParams kernel;
  Discretization disc;
  double theta = 0.1;
  double residual_norm = 0.0;
};

struct PulseValue {
  double U;
  double Q;
};

PulseValue eval_pulse(const PulseSolution& sol, double z);

/// Closed-form U'(z); Q' follows from the second equation.
double eval_pulse_deriv(const PulseSolution& sol, double z);

/// Residuals of both traveling-wave equations at z, using central
/// differences of the closed form for U' and Q'.
std::pair<double, double> pulse_equation_residual(const PulseSolution& sol, double z, double h = 1e-5);

struct SlowPoint {
  double t;  // slow time
  double U;
  double Q;
};

struct SingularOrbit {
  FrontSolution front;
  double back_offset = 0.0;  // U_b = back_offset - U_f
  double Q_takeoff = 0.0;
  std::vector<SlowPoint> slow_right;  // on U = 1 - Q, Q from 0 to Q_takeoff
  std::vector<SlowPoint> slow_left;   // on U = -Q, Q from Q_takeoff towards 0
  double mu_f = 0.0;
  double slow_transit = 0.0;  // slow time spent on the right branch
};

/// Assembles front, right slow branch, reflected back and left slow branch.
/// Throws SymmetryViolated when `rate` is not odd symmetric to 1e-6.
SingularOrbit build_singular_orbit(const FrontSolution& front, const RateSpec& rate,
                                   const PulseParams& params, int slow_samples = 400);

/// Back profile U_b(z) = back_offset - U_f(z).
double eval_back(const SingularOrbit& orbit, double z);

/// mu_f U_b' + U_b + Q_0 - int K(z - y) S*(U_b(y) - theta) dy, where S* is the
/// staircase reflected through the symmetry point of the rate (levels
/// tau - Delta_k, weights alpha_k). The sets where U_b is above each level are
/// located by bracketing U_b on a grid.
double back_residual(const SingularOrbit& orbit, double z);

/// Guess for solve_pulse: mu = mu_f, etas = front crossings, kappas = front
/// crossings shifted past eta_N by the z-length of the right slow branch.
PulseSolution pulse_guess(const SingularOrbit& orbit, const PulseParams& params);

/// Threshold residuals U(eta_k) - theta - Delta_k, U(kappa_m) - theta -
/// Delta_{N-m} and their Jacobian in (mu, log gaps of eta_1..eta_N, kappa_0..kappa_N).
ResidualFn pulse_residual_fn(const KernelParams& k, const Discretization& disc, double theta,
                             const PulseParams& params);

PulseSolution solve_pulse(const KernelParams& k, const Discretization& disc, double theta,
                          const PulseParams& params, const PulseSolution& guess,
                          const NewtonOptions& opt = {});

struct LocallyExcitedReport {
  bool ordered = false;        // max eta < min kappa
  bool two_crossings = false;  // each level crossed exactly twice
  bool holds = false;
};

LocallyExcitedReport check_locally_excited(const PulseSolution& sol, int samples = 20000);

struct FastEigenvalues {
  std::vector<double> unstable;
  std::vector<double> stable;
};

FastEigenvalues fast_system_eigenvalues(const KernelParams& k, double mu);

/// Sampled z-window covering the pulse: from 40/rho before eta_0 to
/// `tail` slow decay lengths mu/omega_2 after kappa_N.
std::pair<double, double> pulse_window(const PulseSolution& sol, double tail = 20.0);

/// Symmetric Hausdorff distance in the (U, Q) plane between the sampled pulse
/// orbit and the singular orbit.
double phase_plane_distance(const PulseSolution& sol, const SingularOrbit& orbit, int samples = 3000);

}  // namespace nfwaves
