#include <cmath>

#include "doctest.h"
#include "nfwaves/error.hpp"
#include "nfwaves/front.hpp"

using namespace nfwaves;

namespace {

KernelParams example() { return KernelParams::make(5.0, 0.5, 4.0, 0.4211).normalized(); }

// tau = 0.3 front marched from the Heaviside seed, shared by several cases.
const FrontSolution& front03() {
  static const FrontSolution f = front_at_tau(example(), RateSpec::make(0.1, 0.3), 20);
  return f;
}

double max_equation_residual(const FrontSolution& f) {
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    double z = -25.0 + 50.0 * (i + 0.318) / 200;
    worst = std::max(worst, std::abs(front_equation_residual(f, z)));
  }
  return worst;
}

}  // namespace

TEST_CASE("heaviside front") {
  KernelParams k = example();
  CHECK(heaviside_front(k, 0.1, 0.0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(std::abs(heaviside_front(k, 0.1, -80.0)) < 1e-12);
  CHECK(heaviside_front(k, 0.1, 80.0) == doctest::Approx(1.0).epsilon(1e-12));
  double mu0 = solve_heaviside_speed(k, 0.1);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    double z = -20.0 + 40.0 * (i + 0.5) / 100;
    double h = 1e-5;
    double d = (heaviside_front(k, mu0, 0.1, z + h) - heaviside_front(k, mu0, 0.1, z - h)) / (2 * h);
    worst = std::max(worst, std::abs(mu0 * d + heaviside_front(k, mu0, 0.1, z) - antiderivative(k, z)));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("seed reproduces heaviside speed and profile") {
  KernelParams k = example();
  FrontSolution seed = heaviside_seed(k, 0.1);
  CHECK(std::abs(seed.mu - solve_heaviside_speed(k, 0.1)) < 1e-8);
  double worst = 0.0;
  for (int i = 0; i <= 600; ++i) {
    double z = -30.0 + 0.1 * i;
    worst = std::max(worst, std::abs(eval_front(seed, z) - heaviside_front(k, 0.1, z)));
  }
  CHECK(worst < 1e-12);
  H1Report h = check_H1(seed, compute_sigmas(k, 0.1, 0.1));
  CHECK(h.z_span == 0.0);
  CHECK(h.holds);
}

TEST_CASE("single level staircase collapses to the heaviside front") {
  KernelParams k = example();
  Discretization one = discretize(RateSpec::make(0.1, 0.3), 1);
  FrontSolution guess = heaviside_seed(k, 0.1);
  guess.disc = one;
  guess.crossings = {0.0, 0.5};
  FrontSolution f = solve_front(k, one, 0.1, guess);
  double mu0 = solve_heaviside_speed(k, 0.1);
  CHECK(f.mu == doctest::Approx(mu0).epsilon(1e-10));
  for (double z : {-10.0, -1.0, 0.3, 4.0, 12.0})
    CHECK(std::abs(eval_front(f, z) - heaviside_front(k, mu0, 0.1, z)) < 1e-12);
}

TEST_CASE("converged front at tau 0.3") {
  const FrontSolution& f = front03();
  CHECK(f.residual_norm < 1e-10);
  for (std::size_t i = 0; i < f.crossings.size(); ++i) {
    CHECK(std::abs(eval_front(f, f.crossings[i]) - 0.1 - f.disc.deltas[i]) < 1e-10);
    CHECK(eval_front_deriv(f, f.crossings[i]) > 0.0);
  }
  CHECK(f.crossings[0] == 0.0);
  CHECK(std::abs(eval_front(f, -200.0)) < 1e-12);
  CHECK(eval_front(f, 200.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(max_equation_residual(f) < 1e-9);
  H1Report h = check_H1(f, compute_sigmas(example(), 0.1, 0.4));
  CHECK(h.monotone_ok);
  CHECK(h.single_crossing_ok);
  CHECK(h.holds);
}

TEST_CASE("front derivative matches finite differences") {
  const FrontSolution& f = front03();
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    double z = -15.0 + 30.0 * (i + 0.27) / 200;
    double h = 1e-6;
    double fd = (eval_front(f, z + h) - eval_front(f, z - h)) / (2 * h);
    worst = std::max(worst, std::abs(fd - eval_front_deriv(f, z)));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("analytic jacobian agrees with finite differences") {
  const FrontSolution& f = front03();
  ResidualFn fn = front_residual_fn(f.kernel, f.disc, 0.1);
  Eigen::VectorXd x(f.crossings.size());
  x[0] = f.mu * 1.01;
  for (std::size_t i = 1; i < f.crossings.size(); ++i)
    x[i] = std::log(f.crossings[i] - f.crossings[i - 1]) + 0.01 * std::sin(i);
  Eigen::VectorXd F;
  Eigen::MatrixXd J;
  fn(x, F, &J);
  Eigen::MatrixXd Jfd = finite_difference_jacobian(fn, x, 1e-7);
  CHECK((J - Jfd).cwiseAbs().maxCoeff() < 1e-5 * std::max(1.0, J.cwiseAbs().maxCoeff()));
}

TEST_CASE("bad guesses are rejected") {
  KernelParams k = example();
  Discretization d = discretize(RateSpec::make(0.1, 0.3), 3);
  FrontSolution g;
  g.mu = 0.5;
  g.crossings = {0.0, 0.2, 0.1, 0.3};
  CHECK_THROWS_AS(solve_front(k, d, 0.1, g), SolverError);
  g.crossings = {0.0, 0.1, 0.2, 0.3};
  g.mu = -1.0;
  try {
    solve_front(k, d, 0.1, g);
    FAIL("expected BadGuess");
  } catch (const SolverError& e) {
    CHECK(e.code() == ErrorCode::BadGuess);
  }
}

TEST_CASE("N refinement of the speed") {
  KernelParams k = example();
  RateSpec s = RateSpec::make(0.1, 0.3);
  double prev_mu = front_at_tau(k, s, 5).mu, prev_gap = INFINITY;
  for (int N : {10, 20, 40}) {
    double mu = front_at_tau(k, s, N).mu;
    double gap = std::abs(mu - prev_mu);
    CHECK(gap < prev_gap);
    prev_gap = gap;
    prev_mu = mu;
  }
}

TEST_CASE("continuation trace") {
  KernelParams k = example();
  RateSpec s = RateSpec::make(0.1, 0.0);
  ContinuationOptions opt;
  opt.tau_max = 0.6;
  ContinuationTrace tr = continue_in_tau(k, s, opt);
  REQUIRE(tr.tau_star);
  CHECK(*tr.tau_star > 0.50);
  CHECK(*tr.tau_star < 0.54);
  REQUIRE(tr.tau_star_bracket);
  CHECK(tr.tau_star_bracket->second - tr.tau_star_bracket->first <= opt.step / 16 + 1e-12);
  for (std::size_t i = 1; i < tr.steps.size(); ++i) {
    CHECK(tr.steps[i].tau > tr.steps[i - 1].tau);
    CHECK(tr.steps[i].front.mu > 0.0);
    if (i + 1 < tr.steps.size()) CHECK(tr.steps[i].h1.holds);
  }
  const ContinuationStep& last = tr.steps.back();
  CHECK_FALSE(last.h1.holds);
  CHECK(last.h1.z_span > last.h1.sigma_min);

  ContinuationOptions tiny = opt;
  tiny.tau_max = 0.005;
  CHECK(continue_in_tau(k, s, tiny).steps.size() == 1);

  ContinuationOptions past = opt;
  past.tau_max = 0.85;
  CHECK_THROWS_AS(continue_in_tau(k, s, past), SolverError);
}

TEST_CASE("speed jumps shrink with the step") {
  KernelParams k = example();
  RateSpec s = RateSpec::make(0.1, 0.0);
  double prev = INFINITY;
  for (double step : {0.04, 0.02, 0.01}) {
    ContinuationOptions opt;
    opt.tau_max = 0.4;
    opt.step = step;
    ContinuationTrace tr = continue_in_tau(k, s, opt);
    double jump = 0.0;
    for (std::size_t i = 2; i < tr.steps.size(); ++i)
      jump = std::max(jump, std::abs(tr.steps[i].front.mu - tr.steps[i - 1].front.mu));
    CHECK(jump < prev);
    prev = jump;
  }
}
