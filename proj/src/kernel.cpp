#include "nfwaves/kernel.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "nfwaves/detail/exp_integrals.hpp"
#include "nfwaves/error.hpp"

namespace nfwaves {

namespace {

using detail::mode_antiderivative;
using detail::mode_tail;
using detail::mode_tail_dp;

// Bisection on [lo, hi] to an absolute width of 1e-12; empty when the end
// values do not bracket a sign change.
template <class F>
std::optional<double> bisect_root(F f, double lo, double hi) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) return std::nullopt;
  auto tol = [](double l, double r) { return std::abs(r - l) < 1e-12; };
  auto [l, r] = boost::math::tools::bisect(f, lo, hi, tol);
  return 0.5 * (l + r);
}

}  // namespace

KernelParams KernelParams::make(double A, double a, double B, double b) {
  auto bad = [&](const char* why) {
    std::ostringstream os;
    os << "invalid kernel (A=" << A << ", a=" << a << ", B=" << B << ", b=" << b << "): " << why;
    throw SolverError(ErrorCode::InvalidKernel, os.str());
  };
  if (!(std::isfinite(A) && std::isfinite(a) && std::isfinite(B) && std::isfinite(b)))
    bad("parameters must be finite");
  if (!(B > 0.0 && A > B)) bad("need A > B > 0");
  if (!(b > 0.0 && a > b)) bad("need a > b > 0");
  if (!(A / a > B / b)) bad("need A/a > B/b so the kernel has positive mass");
  return KernelParams(A, a, B, b);
}

KernelParams KernelParams::normalized() const {
  double m = mass();
  return KernelParams(A_ / m, a_, B_ / m, b_);
}

void check_normalization(const KernelParams& p, double tol) {
  double m = p.mass();
  if (std::abs(m - 1.0) > tol) {
    std::ostringstream os;
    os << "kernel mass " << m << " differs from 1 by more than " << tol
       << " (set normalize = true to rescale A and B)";
    throw SolverError(ErrorCode::InvalidKernel, os.str());
  }
}

double eval_kernel(const KernelParams& p, double x) {
  double ax = std::abs(x);
  return p.A() * std::exp(-p.a() * ax) - p.B() * std::exp(-p.b() * ax);
}

double antiderivative(const KernelParams& p, double z) {
  double s = 0.0;
  for (auto m : p.modes()) s += mode_antiderivative(m.amplitude, m.rate, z);
  return s;
}

double laplace_tail(const KernelParams& p, double w, double s) {
  double r = 0.0;
  for (auto m : p.modes()) r += mode_tail(m.amplitude, m.rate, w, s);
  return r;
}

std::complex<double> laplace_tail(const KernelParams& p, double w, std::complex<double> s) {
  std::complex<double> r = 0.0;
  for (auto m : p.modes()) r += mode_tail(m.amplitude, m.rate, w, s);
  return r;
}

double laplace_tail_ds(const KernelParams& p, double w, double s) {
  double r = 0.0;
  for (auto m : p.modes()) r += mode_tail_dp(m.amplitude, m.rate, w, s);
  return r;
}

double exp_weighted_integral(const KernelParams& p, double z, double mu, double shift) {
  if (!(mu > 0.0)) throw SolverError(ErrorCode::InvalidArgument, "mu must be positive");
  return laplace_tail(p, z - shift, 1.0 / mu);
}

double compute_M(const KernelParams& p) {
  if (p.a() == p.b() || p.A() <= p.B())
    throw SolverError(ErrorCode::InvalidKernel, "not a lateral-inhibition kernel");
  return std::log(p.A() / p.B()) / (p.a() - p.b());
}

SigmaConstants compute_sigmas(const KernelParams& p, double theta, double theta_plus_tau) {
  if (!(theta >= 0.0 && theta < 0.5))
    throw SolverError(ErrorCode::InvalidArgument, "theta must lie in [0, 1/2)");
  if (!(theta_plus_tau > 0.0 && theta_plus_tau <= 1.0))
    throw SolverError(ErrorCode::InvalidArgument, "theta + tau must lie in (0, 1]");
  SigmaConstants out{};
  out.M = compute_M(p);
  out.sigma1 = std::log(p.A() * p.b() / (p.a() * p.B())) / (p.a() - p.b());
  double M = out.M;
  auto psi = [&](double z) { return antiderivative(p, z); };
  auto g = [&](double s) { return psi(-M - s) + psi(-M + s) - psi(-M) - theta; };
  auto h = [&](double s) { return psi(M - s) + psi(M + s) - psi(M) - theta_plus_tau; };
  out.sigma2 = bisect_root(g, 0.0, M);
  out.sigma3 = bisect_root(h, 0.0, M);
  constexpr double inf = std::numeric_limits<double>::infinity();
  out.sigma_min = std::min({out.sigma1, out.sigma2.value_or(inf), out.sigma3.value_or(inf)});
  return out;
}

SpeedIndex speed_index(const KernelParams& p, double mu) {
  if (!(mu > 0.0)) throw SolverError(ErrorCode::InvalidArgument, "mu must be positive");
  SpeedIndex out{0.0, 0.0};
  for (auto m : p.modes()) {
    double d = m.rate * mu + 1.0;
    out.phi += m.amplitude * mu / d;
    out.dphi += m.amplitude / (d * d);
  }
  return out;
}

double solve_heaviside_speed(const KernelParams& p, double theta, double mu_max) {
  if (!(theta > 0.0 && theta < 0.5))
    throw SolverError(ErrorCode::InvalidArgument, "theta must lie in (0, 1/2)");
  double target = antiderivative(p, 0.0) - theta;
  auto f = [&](double mu) { return speed_index(p, mu).phi - target; };
  // phi(0+) = 0 < target; walk up geometrically to the first sign change,
  // which lies on the increasing branch.
  double lo = 1e-12, hi = 1e-12;
  while (f(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > mu_max) {
      std::ostringstream os;
      os << "no speed bracket below mu_max=" << mu_max << " for theta=" << theta;
      throw SolverError(ErrorCode::NoBracket, os.str());
    }
  }
  auto tol = boost::math::tools::eps_tolerance<double>(52);
  std::uintmax_t iters = 200;
  auto [l, r] = boost::math::tools::toms748_solve(f, lo, hi, tol, iters);
  return 0.5 * (l + r);
}

}  // namespace nfwaves
