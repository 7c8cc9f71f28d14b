#include "nfwaves/pulse.hpp"

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "nfwaves/error.hpp"

namespace nfwaves {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Coeffs {
  double w1, w2;
  double c1, c2;  // U weights, c1 - c2 = gamma / (1 + gamma)
  double e1, e2;  // Q weights
  double p1, p2;  // w_i / mu
};

Coeffs coeffs(const PulseParams& prm, double mu) {
  auto [w1, w2] = omega(prm);
  Coeffs c{};
  c.w1 = w1;
  c.w2 = w2;
  double d = w1 - w2;
  c.c1 = (1.0 - w2) / (w1 * d);
  c.c2 = (1.0 - w1) / (w2 * d);
  c.e1 = prm.epsilon / (w1 * d);
  c.e2 = prm.epsilon / (w2 * d);
  c.p1 = w1 / mu;
  c.p2 = w2 / mu;
  return c;
}

// Up and down crossing of level k: eta_k and kappa_{N-k}.
std::pair<double, double> level_pair(const PulseSolution& sol, int k) {
  return {sol.etas[k], sol.kappas[sol.disc.N - k]};
}

}  // namespace

std::pair<double, double> omega(const PulseParams& p) {
  if (!(p.epsilon > 0.0) || !(p.gamma >= 0.0))
    throw SolverError(ErrorCode::InvalidArgument, "need epsilon > 0 and gamma >= 0");
  double ge = p.gamma * p.epsilon;
  double disc = (1.0 - ge) * (1.0 - ge) - 4.0 * p.epsilon;
  if (!(disc > 0.0)) {
    std::ostringstream os;
    os << "complex omega branch: (1 - gamma eps)^2 - 4 eps = " << disc;
    throw SolverError(ErrorCode::ComplexBranch, os.str());
  }
  double sq = std::sqrt(disc);
  double w1 = 0.5 * (1.0 + ge + sq);
  // product form avoids cancellation: w1 w2 = eps (1 + gamma)
  double w2 = p.epsilon * (1.0 + p.gamma) / w1;
  return {w1, w2};
}

double weight_C(double x, double mu, const PulseParams& params) {
  Coeffs c = coeffs(params, mu);
  return c.c1 * std::exp(c.p1 * x) - c.c2 * std::exp(c.p2 * x);
}

double weight_D(double x, double mu, const PulseParams& params) {
  Coeffs c = coeffs(params, mu);
  return (-std::exp(c.p1 * x) / c.w1 + std::exp(c.p2 * x) / c.w2) / (c.w1 - c.w2);
}

PulseValue eval_pulse(const PulseSolution& sol, double z) {
  Coeffs c = coeffs(sol.params, sol.mu);
  double g = sol.params.gamma;
  const auto& k = sol.kernel;
  PulseValue v{0.0, 0.0};
  for (int i = 0; i <= sol.disc.N; ++i) {
    double al = sol.disc.alphas[i];
    if (al == 0.0) continue;
    auto [up, dn] = level_pair(sol, i);
    double dP = antiderivative(k, z - up) - antiderivative(k, z - dn);
    double dG1 = laplace_tail(k, z - up, c.p1) - laplace_tail(k, z - dn, c.p1);
    double dG2 = laplace_tail(k, z - up, c.p2) - laplace_tail(k, z - dn, c.p2);
    v.U += al * (g / (1.0 + g) * dP - c.c1 * dG1 + c.c2 * dG2);
    v.Q += al * (dP / (1.0 + g) + c.e1 * dG1 - c.e2 * dG2);
  }
  return v;
}

double eval_pulse_deriv(const PulseSolution& sol, double z) {
  Coeffs c = coeffs(sol.params, sol.mu);
  const auto& k = sol.kernel;
  double d = 0.0;
  for (int i = 0; i <= sol.disc.N; ++i) {
    double al = sol.disc.alphas[i];
    if (al == 0.0) continue;
    auto [up, dn] = level_pair(sol, i);
    double dG1 = laplace_tail(k, z - up, c.p1) - laplace_tail(k, z - dn, c.p1);
    double dG2 = laplace_tail(k, z - up, c.p2) - laplace_tail(k, z - dn, c.p2);
    d += al * (c.c1 * c.p1 * dG1 - c.c2 * c.p2 * dG2);
  }
  return d;
}

std::pair<double, double> pulse_equation_residual(const PulseSolution& sol, double z, double h) {
  PulseValue v = eval_pulse(sol, z);
  PulseValue vp = eval_pulse(sol, z + h), vm = eval_pulse(sol, z - h);
  double Up = (vp.U - vm.U) / (2.0 * h), Qp = (vp.Q - vm.Q) / (2.0 * h);
  double drive = 0.0;
  for (int i = 0; i <= sol.disc.N; ++i) {
    double al = sol.disc.alphas[i];
    if (al == 0.0) continue;
    auto [up, dn] = level_pair(sol, i);
    drive += al * (antiderivative(sol.kernel, z - up) - antiderivative(sol.kernel, z - dn));
  }
  const auto& p = sol.params;
  return {sol.mu * Up + v.U + v.Q - drive, sol.mu * Qp - p.epsilon * (v.U - p.gamma * v.Q)};
}

SingularOrbit build_singular_orbit(const FrontSolution& front, const RateSpec& rate,
                                   const PulseParams& params, int slow_samples) {
  double tau = rate.tau();
  if (std::abs(front.disc.deltas.back() - tau) > 1e-12 || std::abs(front.theta - rate.theta()) > 1e-15)
    throw SolverError(ErrorCode::InvalidArgument, "front and rate disagree on theta or tau");
  double defect = tau > 0.0 ? odd_symmetry_defect(rate) : 0.0;
  if (defect > 1e-6) {
    std::ostringstream os;
    os << "rate is not odd symmetric about tau/2 (defect " << defect << ")";
    throw SolverError(ErrorCode::SymmetryViolated, os.str());
  }
  double theta = front.theta;
  SingularOrbit orb;
  orb.front = front;
  orb.mu_f = front.mu;
  orb.back_offset = 2.0 * theta + tau;
  orb.Q_takeoff = 1.0 - (2.0 * theta + tau);
  if (!(orb.Q_takeoff > 0.0 && orb.Q_takeoff < 1.0))
    throw SolverError(ErrorCode::InvalidArgument, "need 2 theta + tau < 1 for a take-off point");

  double g1 = 1.0 + params.gamma, mu = orb.mu_f, Q0 = orb.Q_takeoff;
  // dQ/dt = (U - gamma Q) / mu in slow time, solved exactly on each branch
  orb.slow_transit = -mu / g1 * std::log1p(-g1 * Q0);
  for (int i = 0; i <= slow_samples; ++i) {
    double t = orb.slow_transit * i / slow_samples;
    double Q = -std::expm1(-g1 * t / mu) / g1;
    orb.slow_right.push_back({t, 1.0 - Q, Q});
  }
  double t_left = mu / g1 * std::log(1e8);
  for (int i = 0; i <= slow_samples; ++i) {
    double t = t_left * i / slow_samples;
    double Q = Q0 * std::exp(-g1 * t / mu);
    orb.slow_left.push_back({t, -Q, Q});
  }
  return orb;
}

double eval_back(const SingularOrbit& orbit, double z) {
  return orbit.back_offset - eval_front(orbit.front, z);
}

double back_residual(const SingularOrbit& orbit, double z) {
  const auto& f = orbit.front;
  const auto& k = f.kernel;
  double tau = f.disc.deltas.back();
  double theta = f.theta;
  double Ub = eval_back(orbit, z);
  double Ubp = -eval_front_deriv(f, z);
  double drive = 0.0;
  for (std::size_t i = 0; i < f.disc.alphas.size(); ++i) {
    double al = f.disc.alphas[i];
    if (al == 0.0) continue;
    // U_b lies above theta + tau - Delta_i exactly on (-inf, y*]; bracket
    // the single down-crossing around the front crossing and refine
    double level = theta + tau - f.disc.deltas[i];
    auto h = [&](double y) { return eval_back(orbit, y) - level; };
    double c = f.crossings[i], lo = c - 1.0, hi = c + 1.0;
    while (h(lo) < 0.0) lo -= 1.0;
    while (h(hi) > 0.0) hi += 1.0;
    double ystar = c;
    if (h(c) != 0.0) {
      auto tol = boost::math::tools::eps_tolerance<double>(52);
      std::uintmax_t iters = 200;
      auto [l, r] = boost::math::tools::toms748_solve(h, lo, hi, tol, iters);
      ystar = 0.5 * (l + r);
    }
    drive += al * (k.mass() - antiderivative(k, z - ystar));
  }
  return orbit.mu_f * Ubp + Ub + orbit.Q_takeoff - drive;
}

PulseSolution pulse_guess(const SingularOrbit& orbit, const PulseParams& params) {
  PulseSolution g;
  g.mu = orbit.mu_f;
  g.params = params;
  g.kernel = orbit.front.kernel;
  g.disc = orbit.front.disc;
  g.theta = orbit.front.theta;
  g.etas = orbit.front.crossings;
  double shift = g.etas.back() + orbit.slow_transit / params.epsilon;
  g.kappas.resize(g.etas.size());
  for (std::size_t m = 0; m < g.etas.size(); ++m) g.kappas[m] = shift + orbit.front.crossings[m];
  return g;
}

ResidualFn pulse_residual_fn(const KernelParams& k, const Discretization& disc, double theta,
                             const PulseParams& params) {
  return [k, disc, theta, params](const Eigen::VectorXd& x, Eigen::VectorXd& F, Eigen::MatrixXd* J) {
    const int n = disc.N + 1, m = 2 * n;
    F.resize(m);
    double mu = x[0];
    if (!(mu > 0.0) || !x.allFinite()) {
      F.setConstant(kNaN);
      return;
    }
    std::vector<double> P(m);
    P[0] = 0.0;
    for (int j = 1; j < m; ++j) P[j] = P[j - 1] + std::exp(x[j]);
    if (!std::isfinite(P[m - 1])) {
      F.setConstant(kNaN);
      return;
    }
    Coeffs c = coeffs(params, mu);
    double g = params.gamma;
    const auto& al = disc.alphas;
    // level l contributes +at up = l, -at dn = n + N - l
    Eigen::MatrixXd dP = Eigen::MatrixXd::Zero(m, m);  // dU(P_i) / dP_j
    Eigen::VectorXd Uval = Eigen::VectorXd::Zero(m), Umu = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < m; ++i) {
      double z = P[i];
      for (int l = 0; l < n; ++l) {
        if (al[l] == 0.0) continue;
        int up = l, dn = n + disc.N - l;
        double wu = z - P[up], wd = z - P[dn];
        double G1u = laplace_tail(k, wu, c.p1), G1d = laplace_tail(k, wd, c.p1);
        double G2u = laplace_tail(k, wu, c.p2), G2d = laplace_tail(k, wd, c.p2);
        double dPsi = antiderivative(k, wu) - antiderivative(k, wd);
        Uval[i] += al[l] * (g / (1.0 + g) * dPsi - c.c1 * (G1u - G1d) + c.c2 * (G2u - G2d));
        if (!J) continue;
        dP(i, up) += al[l] * (-c.c1 * c.p1 * G1u + c.c2 * c.p2 * G2u);
        dP(i, dn) += al[l] * (c.c1 * c.p1 * G1d - c.c2 * c.p2 * G2d);
        double Gp1 = laplace_tail_ds(k, wu, c.p1) - laplace_tail_ds(k, wd, c.p1);
        double Gp2 = laplace_tail_ds(k, wu, c.p2) - laplace_tail_ds(k, wd, c.p2);
        Umu[i] += al[l] * (c.c1 * c.w1 * Gp1 - c.c2 * c.w2 * Gp2) / (mu * mu);
      }
    }
    for (int i = 0; i < n; ++i) F[i] = Uval[i] - theta - disc.deltas[i];
    for (int j = 0; j < n; ++j) F[n + j] = Uval[n + j] - theta - disc.deltas[disc.N - j];
    if (!J) return;
    J->resize(m, m);
    for (int i = 0; i < m; ++i) {
      // translation invariance: U'(P_i) = -sum_j dU/dP_j
      double Up = -dP.row(i).sum();
      dP(i, i) += Up;
      (*J)(i, 0) = Umu[i];
      double tail = 0.0;
      for (int j = m - 1; j >= 1; --j) {
        tail += dP(i, j);
        (*J)(i, j) = tail * std::exp(x[j]);
      }
    }
  };
}

PulseSolution solve_pulse(const KernelParams& k, const Discretization& disc, double theta,
                          const PulseParams& params, const PulseSolution& guess,
                          const NewtonOptions& opt) {
  omega(params);
  const int n = disc.N + 1;
  bool ok = guess.mu > 0.0 && static_cast<int>(guess.etas.size()) == n &&
            static_cast<int>(guess.kappas.size()) == n && guess.etas[0] == 0.0;
  std::vector<double> P;
  if (ok) {
    P = guess.etas;
    P.insert(P.end(), guess.kappas.begin(), guess.kappas.end());
    for (std::size_t j = 1; ok && j < P.size(); ++j) ok = P[j] > P[j - 1];
  }
  if (!ok)
    throw SolverError(ErrorCode::BadGuess,
                      "pulse guess needs mu > 0 and increasing eta_0 = 0 < ... < kappa_N");
  Eigen::VectorXd x0(2 * n);
  x0[0] = guess.mu;
  for (int j = 1; j < 2 * n; ++j) x0[j] = std::log(P[j] - P[j - 1]);
  NewtonResult r = damped_newton(pulse_residual_fn(k, disc, theta, params), x0, opt);

  PulseSolution sol;
  sol.mu = r.x[0];
  sol.params = params;
  sol.kernel = k;
  sol.disc = disc;
  sol.theta = theta;
  sol.residual_norm = r.residual_norm;
  double pos = 0.0;
  sol.etas.push_back(0.0);
  for (int j = 1; j < 2 * n; ++j) {
    pos += std::exp(r.x[j]);
    (j < n ? sol.etas : sol.kappas).push_back(pos);
  }
  LocallyExcitedReport le = check_locally_excited(sol);
  if (!le.holds) {
    throw SolverError(ErrorCode::OrderingViolated,
                      le.ordered ? "converged pulse crosses some level more than twice"
                                 : "up-crossings and down-crossings interleave");
  }
  return sol;
}

LocallyExcitedReport check_locally_excited(const PulseSolution& sol, int samples) {
  LocallyExcitedReport rep;
  rep.ordered = sol.etas.back() < sol.kappas.front();
  auto [lo, hi] = pulse_window(sol);
  std::vector<double> u(samples + 1);
  for (int i = 0; i <= samples; ++i) u[i] = eval_pulse(sol, lo + (hi - lo) * i / samples).U;
  rep.two_crossings = true;
  for (int k = 0; k <= sol.disc.N && rep.two_crossings; ++k) {
    double level = sol.theta + sol.disc.deltas[k];
    int changes = 0;
    for (int i = 1; i <= samples; ++i)
      if ((u[i - 1] < level) != (u[i] < level)) ++changes;
    rep.two_crossings = changes == 2;
  }
  rep.holds = rep.ordered && rep.two_crossings;
  return rep;
}

FastEigenvalues fast_system_eigenvalues(const KernelParams& k, double mu) {
  if (!(mu > 0.0)) throw SolverError(ErrorCode::InvalidArgument, "mu must be positive");
  return {{k.a(), k.b()}, {-1.0 / mu, -k.a(), -k.b()}};
}

std::pair<double, double> pulse_window(const PulseSolution& sol, double tail) {
  auto [w1, w2] = omega(sol.params);
  (void)w1;
  double rho = sol.kernel.decay_rate();
  return {sol.etas.front() - 40.0 / rho, sol.kappas.back() + tail * sol.mu / w2};
}

double phase_plane_distance(const PulseSolution& sol, const SingularOrbit& orbit, int samples) {
  std::vector<std::pair<double, double>> a, b;
  auto [lo, hi] = pulse_window(sol);
  for (int i = 0; i <= samples; ++i) {
    PulseValue v = eval_pulse(sol, lo + (hi - lo) * i / samples);
    a.emplace_back(v.U, v.Q);
  }
  double rho = orbit.front.kernel.decay_rate();
  double flo = -40.0 / rho, fhi = orbit.front.crossings.back() + 40.0 / rho;
  int nf = samples / 3;
  for (int i = 0; i <= nf; ++i) {
    double z = flo + (fhi - flo) * i / nf;
    double uf = eval_front(orbit.front, z);
    b.emplace_back(uf, 0.0);
    b.emplace_back(orbit.back_offset - uf, orbit.Q_takeoff);
  }
  for (const auto& s : orbit.slow_right) b.emplace_back(s.U, s.Q);
  for (const auto& s : orbit.slow_left) b.emplace_back(s.U, s.Q);
  auto directed = [](const auto& from, const auto& to) {
    double worst = 0.0;
    for (const auto& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to) {
        double du = p.first - q.first, dq = p.second - q.second;
        best = std::min(best, du * du + dq * dq);
      }
      worst = std::max(worst, best);
    }
    return std::sqrt(worst);
  };
  return std::max(directed(a, b), directed(b, a));
}

}  // namespace nfwaves
