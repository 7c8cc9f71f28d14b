#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>

#include "doctest.h"
#include "nfwaves/error.hpp"
#include "nfwaves/firing_rate.hpp"

using namespace nfwaves;

namespace {

double bump_mass(double tau, double r) {
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate([&](double x) { return std::exp(r / (x * (x - tau))); }, 0.0, tau);
}

}  // namespace

TEST_CASE("rate branches") {
  RateSpec s = RateSpec::make(0.1, 0.52);
  CHECK(eval_rate(s, 0.0) == 0.0);
  CHECK(eval_rate(s, -0.3) == 0.0);
  CHECK(eval_rate(s, 0.52) == 1.0);
  CHECK(eval_rate(s, 2.0) == 1.0);
  CHECK(eval_rate(s, 0.26) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("normalizer") {
  RateSpec s = RateSpec::make(0.1, 0.52, 0.01);
  double A = s.normalizer();
  CHECK(std::isfinite(A));
  CHECK(A > 0.0);
  CHECK(A * bump_mass(0.52, 0.01) == doctest::Approx(1.0).epsilon(1e-10));
  for (double tau : {0.1, 0.3, 0.8})
    for (double r : {0.005, 0.01, 0.02})
      CHECK(compute_normalizer(tau, r) * bump_mass(tau, r) == doctest::Approx(1.0).epsilon(1e-10));
  double prev = 0.0;
  for (double r : {0.005, 0.01, 0.02, 0.04, 0.08}) {
    double a = compute_normalizer(0.52, r);
    CHECK(a > prev);
    prev = a;
  }
}

TEST_CASE("rate is monotone and odd symmetric") {
  for (double tau : {0.1, 0.3, 0.52}) {
    RateSpec s = RateSpec::make(0.1, tau);
    double prev = -1.0;
    for (int i = 0; i <= 10000; ++i) {
      double v = eval_rate(s, -tau + 3.0 * tau * i / 10000);
      CHECK(v >= prev);
      prev = v;
    }
    CHECK(odd_symmetry_defect(s) < 1e-10);
  }
}

TEST_CASE("rate derivative matches finite differences") {
  RateSpec s = RateSpec::make(0.1, 0.3);
  for (double u : {0.05, 0.1, 0.15, 0.25}) {
    double h = 1e-6;
    CHECK(s.derivative(u) == doctest::Approx((s(u + h) - s(u - h)) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("speed sign functional") {
  RateSpec tiny = RateSpec::make(0.1, 1e-4);
  CHECK(lambda_speed_sign(tiny) == doctest::Approx(0.4).epsilon(1e-3));
  for (double tau : {0.1, 0.3, 0.6}) {
    RateSpec s = RateSpec::make(0.1, tau);
    CHECK(lambda_speed_sign(s) == doctest::Approx(0.5 - 0.1 - tau / 2).epsilon(1e-10));
  }
  CHECK(std::abs(lambda_speed_sign(RateSpec::make(0.1, 0.8))) < 1e-10);
  double prev = 1.0;
  for (double tau = 0.05; tau < 0.9; tau += 0.05) {
    double l = lambda_speed_sign(RateSpec::make(0.1, tau));
    CHECK(l < prev);
    prev = l;
  }
}

TEST_CASE("tau zero") {
  CHECK(std::abs(tau_zero(RateSpec::make(0.1, 0.3)) - 0.8) < 1e-10);
  CHECK(std::abs(tau_zero(RateSpec::make(0.25, 0.3)) - 0.5) < 1e-10);
  // S(u) = (u / tau)^(1/8) has int S = 8 tau / 9, so Lambda = 0.4 - tau / 9 > 0 up to 1 - theta
  RateSpec skew = RateSpec::custom(0.1, 0.2, [](double x) { return std::pow(x, 0.125); });
  CHECK(lambda_speed_sign(skew) > 0.0);
  CHECK(tau_zero(skew) == doctest::Approx(0.9).epsilon(1e-14));
}

TEST_CASE("discretization") {
  RateSpec s = RateSpec::make(0.1, 0.3);
  Discretization one = discretize(s, 1);
  REQUIRE(one.deltas.size() == 2);
  CHECK(one.deltas[0] == 0.0);
  CHECK(one.deltas[1] == doctest::Approx(0.3));
  CHECK(one.alphas[0] == 1.0);
  CHECK(one.alphas[1] == 0.0);

  Discretization d = discretize(RateSpec::make(0.1, 0.52), 20);
  double sum = 0.0;
  for (double a : d.alphas) {
    CHECK(a >= 0.0);
    sum += a;
  }
  CHECK(sum == 1.0);
  CHECK(d.alphas.back() == 0.0);
  for (int k = 0; k < 19; ++k)
    CHECK(d.alphas[k] == doctest::Approx(eval_rate(RateSpec::make(0.1, 0.52), d.deltas[k + 1]) -
                                         eval_rate(RateSpec::make(0.1, 0.52), d.deltas[k])));

  for (int N : {5, 10, 20})
    CHECK(discretization_l1_error(s, discretize(s, 2 * N)) < discretization_l1_error(s, discretize(s, N)));

  // staircase values are partial sums, nondecreasing
  std::vector<double> partial{0.0};
  for (double a : d.alphas) partial.push_back(partial.back() + a);
  double prev = -1.0;
  for (int i = 0; i <= 2000; ++i) {
    double v = d(-0.1 + 0.8 * i / 2000);
    CHECK(v >= prev);
    bool found = false;
    for (double p : partial) found = found || p == v;
    CHECK(found);
    prev = v;
  }
  CHECK_THROWS_AS(discretize(s, 0), SolverError);
}

TEST_CASE("fixed points") {
  RateSpec s = RateSpec::make(0.1, 0.52);
  FixedPoints fp = find_fixed_points(s);
  CHECK(fp.low == 0.0);
  CHECK(fp.high == 1.0);
  CHECK(fp.mid > 0.1);
  CHECK(fp.mid < 0.62);
  CHECK(std::abs(fp.mid - eval_rate(s, fp.mid - 0.1)) < 1e-12);
  FixedPoints q = find_fixed_points(RateSpec::make(0.1, 0.3));
  CHECK(q.mid > 0.1);
  CHECK(q.mid < 0.4);
  CHECK_THROWS_AS(find_fixed_points(RateSpec::make(0.3, 0.75)), SolverError);
}

TEST_CASE("wave formula identity") {
  CHECK(std::abs(wave_formula_identity(RateSpec::make(0.1, 0.52))) < 1e-8);
  CHECK(std::abs(wave_formula_identity(RateSpec::make(0.2, 0.3))) < 1e-8);
  CHECK(std::abs(wave_formula_identity(RateSpec::make(0.1, 1e-3))) < 1e-8);
}
