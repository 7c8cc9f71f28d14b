#pragma once

// Time-domain integration of
//
//   u_t = -u - q + int K(x - y) S(u(y, t) - theta) dy,   q_t = eps (u - gamma q)
//
// on [-L, L] with RK4 in time. Used as an independent check of solver speeds
// and of spectral stability.

#include <optional>
#include <string>
#include <vector>

#include "nfwaves/firing_rate.hpp"
#include "nfwaves/kernel.hpp"

namespace nfwaves {

enum class Boundary { ClampedLimits, Periodic };

/// S(u - theta) from either the smooth rate or a staircase.
class SimRate {
 public:
  static SimRate smooth(const RateSpec& s);
  static SimRate staircase(const Discretization& d, double theta);

  double theta() const noexcept { return theta_; }
  bool is_staircase() const noexcept { return stair_.has_value(); }
  double operator()(double u) const;

 private:
  double theta_ = 0.1;
  std::optional<RateSpec> smooth_;
  std::optional<Discretization> stair_;
};

struct SimConfig {
  double L = 60.0;
  int n = 4096;
  double dt = 0.05;
  double T = 50.0;
  Boundary boundary = Boundary::ClampedLimits;
  SimRate rate = SimRate::smooth(RateSpec::make(0.1, 0.3));
  KernelParams kernel = KernelParams().normalized();
  double epsilon = 0.0;
  double gamma = 0.0;
  double left_state = 0.0;   // u assumed left of the domain (clamped)
  double right_state = 1.0;  // u assumed right of the domain (clamped)

  /// dt <= 0.25 and at least 20 grid points per 1/max(a, b).
  void validate() const;
};

struct SimState {
  double t = 0.0;
  std::vector<double> u;
  std::vector<double> q;  // empty when eps = 0
};

class Simulator {
 public:
  explicit Simulator(SimConfig cfg);

  const SimConfig& config() const noexcept { return cfg_; }
  const std::vector<double>& x() const noexcept { return x_; }
  double dx() const noexcept { return dx_; }

  /// (K * s)(x_i) for samples s_j of the rate, including the clamped tails.
  /// s is read as its piecewise-linear interpolant, and the weights
  /// int K(x_m - y) hat(y) dy are exact.
  std::vector<double> convolve(const std::vector<double>& s) const;

  /// One RK4 step of size cfg.dt. Throws NonFinite on blow-up.
  void step(SimState& st) const;

  /// Leftmost up-crossing of theta by linear interpolation, if any.
  std::optional<double> crossing(const SimState& st) const;

 private:
  void rhs(const std::vector<double>& u, const std::vector<double>& q, std::vector<double>& du,
           std::vector<double>& dq) const;

  SimConfig cfg_;
  std::vector<double> x_;
  double dx_ = 0.0;
  int band_ = 0;                     // weights vanish beyond |m| > band_
  std::vector<long double> prefix_;  // prefix sums of the weight table
  std::vector<double> tail_l_, tail_r_;  // weight carried by the ghost nodes
  double s_left_ = 0.0, s_right_ = 0.0;  // rate at the clamped states
};

struct SimRecord {
  std::vector<double> times;
  std::vector<double> positions;  // crossing positions, aligned with times
  std::vector<SimState> snapshots;
  SimState final_state;
};

/// Integrates for duration T, logging the crossing after every step and a
/// snapshot every `snapshot_every` steps (0 = none, besides the final state).
SimRecord run_simulation(const Simulator& sim, SimState s0, double T, int snapshot_every = 0);

struct SpeedEstimate {
  double speed;      // leftward speed, -d(position)/dt, comparable to mu
  double r_squared;
  double t_start;
  double t_end;
};

/// Least-squares line through the trailing 80% of the crossing history.
/// Needs 20 samples; throws PoorFit when r^2 < min_r2.
SpeedEstimate measure_speed(const std::vector<double>& times, const std::vector<double>& positions,
                            double discard = 0.2, double min_r2 = 0.999);

/// Sup-distance between a and the best translate of b, over shifts in
/// [-max_shift, max_shift], ignoring `margin` points at each end.
double translate_distance(const Simulator& sim, const std::vector<double>& a,
                          const std::vector<double>& b, double max_shift = 2.0, int margin = 0);

enum class ProbeOutcome { Translate, ConstantLow, ConstantHigh, Other };

std::string to_string(ProbeOutcome o);

struct ProbeResult {
  bool stable = false;
  double initial_distance = 0.0;
  double final_distance = 0.0;
  ProbeOutcome outcome = ProbeOutcome::Other;
};

/// Adds amplitude * cos^2 bump of half-width `width` at `center` to the base
/// data and integrates perturbed and unperturbed copies to time T. Stable when
/// the final distance to the best translate falls below 10% of the initial one.
ProbeResult stability_probe(const Simulator& sim, const SimState& base, double amplitude, double T,
                            double center, double width = 2.0);

/// Final-state classification against the reference run: constant when
/// the spread is below tol, translate when the state within 10 of its leftmost
/// crossing matches the reference aligned at its crossing to 50 tol.
ProbeOutcome classify_outcome(const Simulator& sim, const SimState& st,
                              const SimState& reference, double tol = 1e-3);

}  // namespace nfwaves
