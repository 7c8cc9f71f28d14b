#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "doctest.h"
#include "nfwaves/error.hpp"
#include "nfwaves/evans.hpp"

using namespace nfwaves;
using boost::math::quadrature::gauss_kronrod;

namespace {

KernelParams example() { return KernelParams::make(5.0, 0.5, 4.0, 0.4211).normalized(); }

const EvansContext& ctx03() {
  static const EvansContext c =
      EvansContext::from_front(front_at_tau(example(), RateSpec::make(0.1, 0.3), 20));
  return c;
}

// a_jk by quadrature on [-60, 0], split at the kink of K; both factors decay.
cplx entry_by_quadrature(const EvansContext& c, int j, int k, cplx lambda) {
  const FrontSolution& f = c.front;
  double shift = f.crossings[j] - f.crossings[k];
  double mu = f.mu;
  auto part = [&](bool imag) {
    auto g = [&](double x) {
      cplx v = std::exp((lambda + 1.0) * x / mu) * eval_kernel(f.kernel, x + shift);
      return imag ? v.imag() : v.real();
    };
    double lo = -60.0, kink = -shift, s = 0.0;
    if (kink < 0.0 && kink > lo) {
      s += gauss_kronrod<double, 61>::integrate(g, lo, kink, 12, 1e-13);
      s += gauss_kronrod<double, 61>::integrate(g, kink, 0.0, 12, 1e-13);
    } else {
      s += gauss_kronrod<double, 61>::integrate(g, lo, 0.0, 12, 1e-13);
    }
    return s;
  };
  return c.alphas[k] / (mu * c.derivs[k]) * cplx(part(false), part(true));
}

}  // namespace

TEST_CASE("matrix entries match quadrature") {
  const EvansContext& c = ctx03();
  for (cplx lambda : {cplx(0.0, 0.0), cplx(0.7, 2.0), cplx(-0.5, -1.3), cplx(3.0, 15.0)}) {
    for (int j : {0, 7, 20}) {
      for (int k : {0, 3, 19}) {
        cplx a = matrix_entry(c, j, k, lambda), q = entry_by_quadrature(c, j, k, lambda);
        CHECK(std::abs(a - q) < 1e-9 * std::max(1.0, std::abs(q)));
      }
    }
  }
}

TEST_CASE("evans function symmetries and far field") {
  const EvansContext& c = ctx03();
  for (cplx l : {cplx(0.3, 1.0), cplx(2.0, 7.5), cplx(-0.4, 0.2)})
    CHECK(std::abs(evans_value(c, std::conj(l)) - std::conj(evans_value(c, l))) < 1e-12);
  for (double re : {0.1, 1.0, 4.0}) CHECK(std::abs(evans_value(c, re).imag()) < 1e-14);
  CHECK(std::abs(evans_value(c, 1000.0) - 1.0) < 1e-2);
  CHECK(std::abs(evans_value(c, cplx(0.0, 1000.0)) - 1.0) < 1e-2);
}

TEST_CASE("translation zero at the origin") {
  const EvansContext& c = ctx03();
  OriginCheck o = verify_zero_at_origin(c);
  CHECK(std::abs(o.value) < 1e-8);
  CHECK(o.eigen_residual < 1e-8);
  CHECK(std::abs(o.derivative) > 1e-6);
  CHECK(o.simple);
}

TEST_CASE("perturbed derivatives lose the origin zero") {
  std::vector<double> d = ctx03().derivs;
  for (double& v : d) v *= 1.5;
  EvansContext bad = EvansContext::with_derivs(ctx03().front, d);
  OriginCheck o = verify_zero_at_origin(bad);
  CHECK(std::abs(o.value) > 1e-3);
  CHECK_FALSE(o.simple);
}

TEST_CASE("single level front") {
  KernelParams k = example();
  EvansContext c = EvansContext::from_front(heaviside_seed(k, 0.1));
  REQUIRE(c.size() == 1);
  CHECK(evans_matrix(c, 0.0)(0, 0).real() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(evans_value(c, 0.0)) < 1e-10);
  double mu = c.front.mu;
  CHECK(std::abs(evans_value(c, 0.5) - (1.0 - speed_index(k, mu / 1.5).phi / (mu * c.derivs[0]))) < 1e-10);
}

TEST_CASE("essential spectrum") {
  CHECK(essential_spectrum(ctx03()) == -1.0);
  CHECK(scan(ctx03(), {0, 1, 0, 1, 32, 32}).essential_line == -1.0);
}

TEST_CASE("winding number counts the origin") {
  CHECK(winding_number(ctx03(), -0.3, 5.0, -20.0, 20.0, 1500) == 1);
  CHECK(winding_number(ctx03(), 0.1, 5.0, -20.0, 20.0, 1500) == 0);
}

TEST_CASE("scan finds only the origin on the tau 0.3 front") {
  const EvansContext& c = ctx03();
  ScanOptions opt;
  opt.re_min = -0.2;
  opt.n_re = 64;
  opt.n_im = 64;
  EvansScan s = scan(c, opt);
  CHECK(s.values.size() == 64u * 64u);
  CHECK(s.instability_zeros().empty());
  bool origin = false;
  for (const EvansZero& z : s.zeros) origin = origin || z.is_origin;
  CHECK(origin);
  CHECK(stability_verdict(verify_zero_at_origin(c), s) == Verdict::Stable);
  CHECK(to_string(Verdict::Stable) == "stable");
}

TEST_CASE("refine zero converges to the origin") {
  auto [z, ok] = refine_zero(ctx03(), cplx(0.05, 0.02));
  CHECK(ok);
  CHECK(std::abs(z) < 1e-8);
}

TEST_CASE("scan options are validated") {
  ScanOptions opt;
  opt.re_min = -1.0;
  CHECK_THROWS_AS(scan(ctx03(), opt), SolverError);
  ScanOptions coarse;
  coarse.n_re = 16;
  CHECK_THROWS_AS(scan(ctx03(), coarse), SolverError);
}
