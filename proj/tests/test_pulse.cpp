#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>

#include "doctest.h"
#include "nfwaves/error.hpp"
#include "nfwaves/pulse.hpp"

using namespace nfwaves;

namespace {

KernelParams example() { return KernelParams::make(5.0, 0.5, 4.0, 0.4211).normalized(); }

const FrontSolution& front52() {
  static const FrontSolution f = front_at_tau(example(), RateSpec::make(0.1, 0.52), 20);
  return f;
}

struct Solved {
  SingularOrbit orbit;
  PulseSolution pulse;
};

Solved solve_at(double eps) {
  PulseParams pp{eps, 0.001};
  Solved s;
  s.orbit = build_singular_orbit(front52(), RateSpec::make(0.1, 0.52), pp);
  s.pulse = solve_pulse(example(), front52().disc, 0.1, pp, pulse_guess(s.orbit, pp));
  return s;
}

const Solved& pulse005() {
  static const Solved s = solve_at(0.005);
  return s;
}

// Bounded solution operator of mu v' = M v + (I, 0): entries of -M^{-1} exp(-M x / mu).
Eigen::Matrix2d oracle(double x, double mu, const PulseParams& p) {
  Eigen::Matrix2d M;
  M << -1.0, -1.0, p.epsilon, -p.gamma * p.epsilon;
  Eigen::Matrix2d E = (-M * x / mu).exp();
  return -M.inverse() * E;
}

}  // namespace

TEST_CASE("omega branch") {
  auto [w1, w2] = omega({1e-9, 0.001});
  CHECK(w1 == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(w2) < 1e-8);
  auto [a, b] = omega({0.005, 0.001});
  CHECK(a > b);
  CHECK(b > 0.0);
  CHECK(a * b == doctest::Approx(0.005 * 1.001).epsilon(1e-14));
  CHECK(a + b == doctest::Approx(1.0 + 0.005 * 0.001).epsilon(1e-14));
  try {
    omega({0.3, 0.001});
    FAIL("expected ComplexBranch");
  } catch (const SolverError& e) {
    CHECK(e.code() == ErrorCode::ComplexBranch);
  }
}

TEST_CASE("C and D weights") {
  PulseParams p{0.005, 0.001};
  auto [w1, w2] = omega(p);
  CHECK(weight_C(0.0, 0.3, p) ==
        doctest::Approx(((1 - w2) / w1 - (1 - w1) / w2) / (w1 - w2)).epsilon(1e-14));
  for (double mu : {0.19, 0.5, 2.0}) {
    for (double x : {-0.01, -0.7, -3.0, -40.0}) {
      Eigen::Matrix2d S = oracle(x, mu, p);
      CHECK(std::abs(weight_C(x, mu, p) - S(0, 0)) < 1e-9);
      CHECK(std::abs(p.epsilon * weight_D(x, mu, p) - S(1, 0)) < 1e-9);
    }
  }
  // small eps: the fast mode is exp(x / mu), offset by the slow constant 1 / (1 + gamma)
  PulseParams tiny{1e-7, 0.001};
  for (double x : {-0.5, -2.0})
    CHECK(weight_C(x, 1.0, tiny) == doctest::Approx(std::exp(x) - 1.0 / 1.001).epsilon(1e-5));
}

TEST_CASE("singular orbit") {
  PulseParams pp{0.005, 0.001};
  SingularOrbit o = build_singular_orbit(front52(), RateSpec::make(0.1, 0.52), pp);
  CHECK(o.Q_takeoff == doctest::Approx(0.28).epsilon(1e-14));
  CHECK(o.back_offset == doctest::Approx(0.72).epsilon(1e-14));
  CHECK(eval_back(o, 0.0) == doctest::Approx(0.62).epsilon(1e-10));
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) worst = std::max(worst, std::abs(back_residual(o, -30.0 + 60.0 * (i + 0.41) / 200)));
  CHECK(worst < 1e-9);
  for (const auto& s : o.slow_right) CHECK(std::abs(s.U - (1.0 - s.Q)) < 1e-14);
  for (const auto& s : o.slow_left) CHECK(std::abs(s.U + s.Q) < 1e-14);
  CHECK(o.slow_transit > 0.0);

  RateSpec skew = RateSpec::custom(0.1, 0.52, [](double x) { return x * x; });
  FrontSolution f = front52();
  try {
    build_singular_orbit(f, skew, pp);
    FAIL("expected SymmetryViolated");
  } catch (const SolverError& e) {
    CHECK(e.code() == ErrorCode::SymmetryViolated);
  }
}

TEST_CASE("pulse solve at eps 0.005") {
  const PulseSolution& p = pulse005().pulse;
  CHECK(p.residual_norm < 1e-8);
  const int N = p.disc.N;
  for (int k = 0; k <= N; ++k) {
    CHECK(std::abs(eval_pulse(p, p.etas[k]).U - 0.1 - p.disc.deltas[k]) < 1e-8);
    CHECK(std::abs(eval_pulse(p, p.kappas[N - k]).U - 0.1 - p.disc.deltas[k]) < 1e-8);
  }
  LocallyExcitedReport le = check_locally_excited(p);
  CHECK(le.ordered);
  CHECK(le.two_crossings);
  CHECK(le.holds);
}

TEST_CASE("pulse satisfies the traveling system") {
  const PulseSolution& p = pulse005().pulse;
  auto [lo, hi] = pulse_window(p);
  double worst_u = 0.0, worst_q = 0.0;
  for (int i = 0; i < 200; ++i) {
    auto [ru, rq] = pulse_equation_residual(p, lo + (hi - lo) * (i + 0.37) / 200);
    worst_u = std::max(worst_u, std::abs(ru));
    worst_q = std::max(worst_q, std::abs(rq));
  }
  CHECK(worst_u < 1e-8);
  CHECK(worst_q < 1e-8);
}

TEST_CASE("pulse tails") {
  const PulseSolution& p = pulse005().pulse;
  double rho = p.kernel.decay_rate();
  PulseValue left = eval_pulse(p, -40.0 / rho);
  CHECK(std::abs(left.U) + std::abs(left.Q) < 1e-6);
  auto [w1, w2] = omega(p.params);
  (void)w1;
  PulseValue right = eval_pulse(p, p.kappas.back() + 40.0 * p.mu / w2);
  CHECK(std::abs(right.U) + std::abs(right.Q) < 1e-6);
}

TEST_CASE("pulse jacobian agrees with finite differences") {
  PulseParams pp{0.005, 0.001};
  PulseSolution g = pulse_guess(pulse005().orbit, pp);
  ResidualFn fn = pulse_residual_fn(example(), g.disc, 0.1, pp);
  std::vector<double> P = g.etas;
  P.insert(P.end(), g.kappas.begin(), g.kappas.end());
  Eigen::VectorXd x(P.size());
  x[0] = g.mu;
  for (std::size_t j = 1; j < P.size(); ++j) x[j] = std::log(P[j] - P[j - 1]);
  Eigen::VectorXd F;
  Eigen::MatrixXd J;
  fn(x, F, &J);
  Eigen::MatrixXd Jfd = finite_difference_jacobian(fn, x, 1e-7);
  CHECK((J - Jfd).cwiseAbs().maxCoeff() < 1e-5 * std::max(1.0, J.cwiseAbs().maxCoeff()));
}

TEST_CASE("interleaved crossings are not locally excited") {
  PulseSolution p = pulse005().pulse;
  std::swap(p.etas.back(), p.kappas.front());
  CHECK_FALSE(check_locally_excited(p).ordered);
  CHECK_FALSE(check_locally_excited(p).holds);
}

TEST_CASE("bad pulse guess") {
  PulseParams pp{0.005, 0.001};
  PulseSolution g = pulse_guess(pulse005().orbit, pp);
  g.kappas[0] = g.etas.back() - 1.0;
  CHECK_THROWS_AS(solve_pulse(example(), g.disc, 0.1, pp, g), SolverError);
}

TEST_CASE("fast system eigenvalues") {
  KernelParams raw = KernelParams::make(5.0, 0.5, 4.0, 0.4211);
  FastEigenvalues ev = fast_system_eigenvalues(raw, 1.0);
  REQUIRE(ev.unstable.size() == 2);
  REQUIRE(ev.stable.size() == 3);
  CHECK(ev.unstable[0] == doctest::Approx(0.5));
  CHECK(ev.unstable[1] == doctest::Approx(0.4211));
  CHECK(ev.stable[0] == doctest::Approx(-1.0));
  CHECK(ev.stable[1] == doctest::Approx(-0.5));
  CHECK(ev.stable[2] == doctest::Approx(-0.4211));
  for (double mu : {0.1, 3.0}) {
    FastEigenvalues e = fast_system_eigenvalues(raw, mu);
    CHECK(e.unstable.size() == 2);
    CHECK(e.stable.size() == 3);
    for (double v : e.unstable) CHECK(v > 0.0);
    for (double v : e.stable) CHECK(v < 0.0);
  }
}

TEST_CASE("pulse approaches the front as eps decreases") {
  const Solved a = solve_at(0.02);
  const Solved b = solve_at(0.01);
  const Solved& c = pulse005();
  double mf = front52().mu;
  double ga = std::abs(a.pulse.mu - mf), gb = std::abs(b.pulse.mu - mf), gc = std::abs(c.pulse.mu - mf);
  CHECK(gb < ga);
  CHECK(gc < gb);
  double da = phase_plane_distance(a.pulse, a.orbit), db = phase_plane_distance(b.pulse, b.orbit),
         dc = phase_plane_distance(c.pulse, c.orbit);
  CHECK(db < da);
  CHECK(dc < db);
}
