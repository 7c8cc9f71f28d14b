#include "nfwaves/front.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "nfwaves/error.hpp"

namespace nfwaves {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Sum over active levels of alpha_j * f(z - z_j).
template <class F>
double level_sum(const FrontSolution& sol, double z, F f) {
  double s = 0.0;
  const auto& al = sol.disc.alphas;
  for (std::size_t j = 0; j < al.size(); ++j) {
    if (al[j] != 0.0) s += al[j] * f(z - sol.crossings[j]);
  }
  return s;
}

void check_guess(const Discretization& disc, const FrontSolution& guess) {
  std::size_t n = disc.N + 1;
  bool ok = guess.mu > 0.0 && std::isfinite(guess.mu) && guess.crossings.size() == n &&
            guess.crossings[0] == 0.0;
  for (std::size_t k = 1; ok && k < n; ++k) ok = guess.crossings[k] > guess.crossings[k - 1];
  if (!ok)
    throw SolverError(ErrorCode::BadGuess,
                      "front guess needs mu > 0 and N + 1 increasing crossings starting at 0");
}

std::vector<double> crossings_from(const Eigen::VectorXd& x) {
  std::vector<double> z(x.size());
  z[0] = 0.0;
  for (Eigen::Index k = 1; k < x.size(); ++k) z[k] = z[k - 1] + std::exp(x[k]);
  return z;
}

}  // namespace

double heaviside_front(const KernelParams& k, double mu0, double theta, double z) {
  (void)theta;
  return antiderivative(k, z) - laplace_tail(k, z, 1.0 / mu0);
}

double heaviside_front(const KernelParams& k, double theta, double z) {
  return heaviside_front(k, solve_heaviside_speed(k, theta), theta, z);
}

FrontSolution heaviside_seed(const KernelParams& k, double theta) {
  FrontSolution guess;
  guess.kernel = k;
  guess.disc = heaviside_discretization();
  guess.theta = theta;
  guess.mu = solve_heaviside_speed(k, theta);
  guess.crossings = {0.0};
  return solve_front(k, guess.disc, theta, guess);
}

double eval_front(const FrontSolution& sol, double z) {
  double p = 1.0 / sol.mu;
  const auto& k = sol.kernel;
  return level_sum(sol, z, [&](double w) { return antiderivative(k, w) - laplace_tail(k, w, p); });
}

double eval_front_deriv(const FrontSolution& sol, double z) {
  double p = 1.0 / sol.mu;
  const auto& k = sol.kernel;
  return p * level_sum(sol, z, [&](double w) { return laplace_tail(k, w, p); });
}

double front_equation_residual(const FrontSolution& sol, double z) {
  const auto& k = sol.kernel;
  double drive = level_sum(sol, z, [&](double w) { return antiderivative(k, w); });
  return sol.mu * eval_front_deriv(sol, z) + eval_front(sol, z) - drive;
}

ResidualFn front_residual_fn(const KernelParams& k, const Discretization& disc, double theta) {
  return [k, disc, theta](const Eigen::VectorXd& x, Eigen::VectorXd& F, Eigen::MatrixXd* J) {
    const int n = disc.N + 1;
    F.resize(n);
    double mu = x[0];
    if (!(mu > 0.0) || !x.allFinite()) {
      F.setConstant(kNaN);
      return;
    }
    std::vector<double> z = crossings_from(x);
    for (double v : z) {
      if (!std::isfinite(v)) {
        F.setConstant(kNaN);
        return;
      }
    }
    const auto& al = disc.alphas;
    double p = 1.0 / mu;
    Eigen::MatrixXd G(n, n);  // G(z_i - z_j, p)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) G(i, j) = al[j] != 0.0 ? laplace_tail(k, z[i] - z[j], p) : 0.0;
    for (int i = 0; i < n; ++i) {
      double u = 0.0;
      for (int j = 0; j < n; ++j) {
        if (al[j] != 0.0) u += al[j] * (antiderivative(k, z[i] - z[j]) - G(i, j));
      }
      F[i] = u - theta - disc.deltas[i];
    }
    if (!J) return;
    J->resize(n, n);
    // dR_i / dz_j, including the dependence of the evaluation point on z_i
    Eigen::MatrixXd dz(n, n);
    for (int i = 0; i < n; ++i) {
      double up = 0.0, dmu = 0.0;
      for (int j = 0; j < n; ++j) {
        if (al[j] == 0.0) continue;
        up += al[j] * G(i, j);
        dmu += al[j] * laplace_tail_ds(k, z[i] - z[j], p);
      }
      up *= p;
      (*J)(i, 0) = dmu * p * p;
      for (int j = 0; j < n; ++j) dz(i, j) = -al[j] * p * G(i, j);
      dz(i, i) += up;
    }
    // chain rule through z_j = sum_{m <= j} exp(g_m)
    for (int i = 0; i < n; ++i) {
      double tail = 0.0;
      for (int m = n - 1; m >= 1; --m) {
        tail += dz(i, m);
        (*J)(i, m) = tail * std::exp(x[m]);
      }
    }
  };
}

FrontSolution solve_front(const KernelParams& k, const Discretization& disc, double theta,
                          const FrontSolution& guess, const NewtonOptions& opt) {
  check_guess(disc, guess);
  const int n = disc.N + 1;
  Eigen::VectorXd x0(n);
  x0[0] = guess.mu;
  for (int i = 1; i < n; ++i) x0[i] = std::log(guess.crossings[i] - guess.crossings[i - 1]);
  NewtonResult r = damped_newton(front_residual_fn(k, disc, theta), x0, opt);

  FrontSolution sol;
  sol.kernel = k;
  sol.disc = disc;
  sol.theta = theta;
  sol.mu = r.x[0];
  sol.crossings = crossings_from(r.x);
  sol.residual_norm = r.residual_norm;
  for (int i = 0; i < n; ++i) {
    double d = eval_front_deriv(sol, sol.crossings[i]);
    if (!(d > 0.0)) {
      std::ostringstream os;
      os << "U'(z_" << i << ") = " << d << " is not positive at the converged front";
      throw SolverError(ErrorCode::LostMonotonicity, os.str());
    }
  }
  return sol;
}

H1Report check_H1(const FrontSolution& sol, const SigmaConstants& sig, int samples) {
  H1Report rep;
  const auto& z = sol.crossings;
  rep.z_span = z.back() - z.front();
  rep.sigma_min = sig.sigma_min;

  rep.monotone_ok = true;
  for (double zk : z) rep.monotone_ok = rep.monotone_ok && eval_front_deriv(sol, zk) > 0.0;
  if (rep.z_span > 0.0) {
    for (int i = 0; i <= samples && rep.monotone_ok; ++i) {
      double t = z.front() + rep.z_span * i / samples;
      rep.monotone_ok = eval_front_deriv(sol, t) > 0.0;
    }
  }

  double L = std::max(z.back(), 4.0 * sig.M);
  std::vector<double> u(samples + 1);
  for (int i = 0; i <= samples; ++i) u[i] = eval_front(sol, -5.0 * L + 10.0 * L * i / samples);
  rep.single_crossing_ok = true;
  for (std::size_t k = 0; k < sol.disc.deltas.size() && rep.single_crossing_ok; ++k) {
    double level = sol.theta + sol.disc.deltas[k];
    int changes = 0;
    for (int i = 1; i <= samples; ++i) {
      if ((u[i - 1] - level < 0.0) != (u[i] - level < 0.0)) ++changes;
    }
    rep.single_crossing_ok = changes == 1;
  }
  rep.holds = rep.monotone_ok && rep.single_crossing_ok && rep.z_span <= rep.sigma_min;
  return rep;
}

namespace {

FrontSolution advance(const KernelParams& k, const RateSpec& rate, int N, Spacing spacing,
                      const FrontSolution& from, double from_tau, double tau) {
  Discretization disc = discretize(rate.with_tau(tau), N, spacing);
  FrontSolution guess = from;
  guess.disc = disc;
  if (from_tau == 0.0) {
    double slope = eval_front_deriv(from, 0.0);
    guess.crossings.resize(disc.N + 1);
    for (int i = 0; i <= disc.N; ++i) guess.crossings[i] = disc.deltas[i] / slope;
  } else {
    for (double& c : guess.crossings) c *= tau / from_tau;
  }
  return solve_front(k, disc, rate.theta(), guess);
}

}  // namespace

FrontSolution front_at_tau(const KernelParams& k, const RateSpec& rate, int N, double step,
                           Spacing spacing) {
  double target = rate.tau();
  FrontSolution cur = heaviside_seed(k, rate.theta());
  if (target == 0.0) return cur;
  int steps = std::max(1, static_cast<int>(std::ceil(target / step - 1e-9)));
  double prev = 0.0;
  for (int i = 1; i <= steps; ++i) {
    double tau = i == steps ? target : target * i / steps;
    try {
      cur = advance(k, rate, N, spacing, cur, prev, tau);
    } catch (const SolverError& e) {
      throw SolverError(e.code(), e.what(), tau);
    }
    prev = tau;
  }
  return cur;
}

ContinuationTrace continue_in_tau(const KernelParams& k, const RateSpec& rate,
                                  const ContinuationOptions& opt) {
  if (!(opt.step > 0.0)) throw SolverError(ErrorCode::InvalidArgument, "step must be positive");
  if (opt.N < 1) throw SolverError(ErrorCode::InvalidArgument, "N must be at least 1");
  double theta = rate.theta();
  double t0 = tau_zero(rate);
  if (opt.tau_max > t0 + 1e-12) {
    std::ostringstream os;
    os << "tau_max " << opt.tau_max << " exceeds tau_0 = " << t0;
    throw SolverError(ErrorCode::InvalidArgument, os.str());
  }

  ContinuationTrace trace;
  FrontSolution seed = heaviside_seed(k, theta);
  trace.steps.push_back({0.0, seed, check_H1(seed, compute_sigmas(k, theta, theta))});

  // Solve at tau starting from the last holding step. nullopt signals that
  // monotonicity was lost, which counts as an H1 failure.
  auto attempt = [&](double tau, const ContinuationStep& from)
      -> std::optional<std::pair<FrontSolution, H1Report>> {
    try {
      FrontSolution sol = advance(k, rate, opt.N, opt.spacing, from.front, from.tau, tau);
      H1Report rep = check_H1(sol, compute_sigmas(k, theta, theta + tau));
      return std::make_pair(std::move(sol), rep);
    } catch (const SolverError& e) {
      if (e.code() == ErrorCode::LostMonotonicity) return std::nullopt;
      throw SolverError(e.code(), e.what(), tau);
    }
  };

  for (int i = 1;; ++i) {
    double tau = i * opt.step;
    if (tau > opt.tau_max + 1e-12) break;
    auto res = attempt(tau, trace.steps.back());
    if (res && res->second.holds) {
      trace.steps.push_back({tau, std::move(res->first), res->second});
      continue;
    }
    double lo = trace.steps.back().tau, hi = tau;
    std::optional<ContinuationStep> failing;
    if (res) failing = ContinuationStep{tau, std::move(res->first), res->second};
    while (hi - lo > opt.step / 16.0 + 1e-14) {
      double mid = 0.5 * (lo + hi);
      auto m = attempt(mid, trace.steps.back());
      if (m && m->second.holds) {
        trace.steps.push_back({mid, std::move(m->first), m->second});
        lo = mid;
      } else {
        if (m) failing = ContinuationStep{mid, std::move(m->first), m->second};
        else failing.reset();
        hi = mid;
      }
    }
    if (failing) trace.steps.push_back(std::move(*failing));
    trace.tau_star = hi;
    trace.tau_star_bracket = std::make_pair(lo, hi);
    break;
  }
  return trace;
}

}  // namespace nfwaves
