#include "nfwaves/firing_rate.hpp"

#include <boost/math/differentiation/finite_difference.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <sstream>

#include "nfwaves/error.hpp"

namespace nfwaves {

namespace detail {

// Cumulative cell integrals of the unnormalized bump so that S(u) costs one
// short Gauss rule on a partial cell.
struct BumpTable {
  double tau;
  double r;
  double h;
  double scale;        // 1 / sum of cells
  double first_moment;  // scale * int_0^tau x b(x) dx
  std::vector<double> cum;

  // bump scaled to peak value 1 so that narrow widths do not underflow
  double bump(double x) const {
    if (x <= 0.0 || x >= tau) return 0.0;
    double d = 2.0 * x - tau;
    return std::exp(r * d * d / (tau * tau * x * (x - tau)));
  }
};

}  // namespace detail

namespace {

using boost::math::quadrature::gauss;
using boost::math::quadrature::gauss_kronrod;

constexpr int kCells = 512;

std::shared_ptr<const detail::BumpTable> build_table(double tau, double r) {
  auto t = std::make_shared<detail::BumpTable>();
  t->tau = tau;
  t->r = r;
  t->h = tau / kCells;
  t->cum.assign(kCells + 1, 0.0);
  auto b = [&](double x) { return t->bump(x); };
  auto xb = [&](double x) { return x * t->bump(x); };
  double moment = 0.0;
  for (int i = 0; i < kCells; ++i) {
    double lo = i * t->h, hi = (i + 1 == kCells) ? tau : (i + 1) * t->h;
    t->cum[i + 1] = t->cum[i] + gauss_kronrod<double, 31>::integrate(b, lo, hi, 0, 0.0);
    moment += gauss_kronrod<double, 31>::integrate(xb, lo, hi, 0, 0.0);
  }
  double total = t->cum[kCells];
  if (!(total > 0.0) || !std::isfinite(total))
    throw SolverError(ErrorCode::QuadratureFailed, "bump integral is not positive and finite");
  t->scale = 1.0 / total;
  for (auto& c : t->cum) c *= t->scale;
  t->first_moment = moment * t->scale;
  return t;
}

void check_theta(double theta) {
  if (!(theta > 0.0 && theta < 0.5)) {
    std::ostringstream os;
    os << "theta must lie in (0, 1/2), got " << theta;
    throw SolverError(ErrorCode::InvalidArgument, os.str());
  }
}

template <class F>
double integrate(F f, double lo, double hi) {
  double err = 0.0;
  return gauss_kronrod<double, 61>::integrate(f, lo, hi, 12, 1e-13, &err);
}

}  // namespace

namespace {

// Scaled bump mass by adaptive Gauss-Kronrod. Narrow bumps make the embedded
// error estimate pessimistic, so a miss is only fatal when the composite
// 512-cell rule disagrees as well.
double scaled_mass(double tau, double r) {
  detail::BumpTable probe{tau, r, 0.0, 0.0, 0.0, {}};
  auto b = [&](double x) { return probe.bump(x); };
  double err = 0.0, l1 = 0.0;
  double mass = gauss_kronrod<double, 61>::integrate(b, 0.0, tau, 15, 1e-13, &err, &l1);
  bool ok = mass > 0.0 && std::isfinite(mass);
  if (ok && err > 1e-12 * mass) {
    double composite = 0.0, h = tau / kCells;
    for (int i = 0; i < kCells; ++i)
      composite += gauss_kronrod<double, 31>::integrate(b, i * h, (i + 1) * h, 0, 0.0);
    ok = std::abs(composite - mass) <= 1e-12 * mass;
  }
  if (!ok) {
    std::ostringstream os;
    os << "bump quadrature did not converge (tau=" << tau << ", r=" << r << ", err=" << err << ")";
    throw SolverError(ErrorCode::QuadratureFailed, os.str());
  }
  return mass;
}

// A(tau) = exp(4 r / tau^2) / scaled mass; overflows to +inf for very
// narrow bumps even though the rate itself is well defined.
double normalizer_of(double tau, double r) { return std::exp(4.0 * r / (tau * tau)) / scaled_mass(tau, r); }

}  // namespace

double compute_normalizer(double tau, double r) {
  if (!(tau > 0.0 && r > 0.0))
    throw SolverError(ErrorCode::InvalidArgument, "normalizer needs tau > 0 and r > 0");
  double A = normalizer_of(tau, r);
  if (!std::isfinite(A))
    throw SolverError(ErrorCode::QuadratureFailed, "normalizer overflows double precision");
  return A;
}

RateSpec RateSpec::make(double theta, double tau, double r) {
  check_theta(theta);
  if (!(tau >= 0.0 && theta + tau <= 1.0))
    throw SolverError(ErrorCode::InvalidArgument, "tau must lie in [0, 1 - theta]");
  if (!(r > 0.0)) throw SolverError(ErrorCode::InvalidArgument, "r must be positive");
  RateSpec s;
  s.theta_ = theta;
  s.tau_ = tau;
  s.r_ = r;
  if (tau > 0.0) {
    s.normalizer_ = normalizer_of(tau, r);
    s.table_ = build_table(tau, r);
  }
  return s;
}

RateSpec RateSpec::custom(double theta, double tau, std::function<double(double)> shape) {
  check_theta(theta);
  if (!(tau > 0.0 && theta + tau <= 1.0))
    throw SolverError(ErrorCode::InvalidArgument, "tau must lie in (0, 1 - theta]");
  if (!shape) throw SolverError(ErrorCode::InvalidArgument, "custom rate needs a shape");
  RateSpec s;
  s.theta_ = theta;
  s.tau_ = tau;
  s.shape_ = std::move(shape);
  return s;
}

RateSpec RateSpec::with_tau(double tau) const {
  if (shape_) {
    if (tau == 0.0) {
      RateSpec s = *this;
      s.tau_ = 0.0;
      return s;
    }
    return custom(theta_, tau, shape_);
  }
  return make(theta_, tau, r_);
}

double RateSpec::operator()(double u) const {
  if (u <= 0.0) return 0.0;
  if (u >= tau_) return 1.0;
  if (shape_) return shape_(u / tau_);
  const auto& t = *table_;
  int i = static_cast<int>(u / t.h);
  if (i >= kCells) i = kCells - 1;
  double lo = i * t.h;
  if (u <= lo) return t.cum[i];
  auto b = [&](double x) { return t.bump(x); };
  return t.cum[i] + t.scale * gauss<double, 15>::integrate(b, lo, u);
}

double RateSpec::derivative(double u) const {
  if (u <= 0.0 || u >= tau_) return 0.0;
  if (shape_) {
    auto f = [&](double x) { return shape_(x); };
    return boost::math::differentiation::finite_difference_derivative<decltype(f), double, 6>(
               f, u / tau_) /
           tau_;
  }
  return table_->scale * table_->bump(u);
}

double RateSpec::integral() const {
  if (tau_ == 0.0) return 0.0;
  if (shape_) return tau_ * integrate([&](double x) { return shape_(x); }, 0.0, 1.0);
  // integration by parts: int_0^tau S = tau - int_0^tau x S'(x) dx
  return tau_ - table_->first_moment;
}

double eval_rate(const RateSpec& s, double u) { return s(u); }

double lambda_speed_sign(const RateSpec& s) {
  return 0.5 - (s.theta() + s.tau()) + s.integral();
}

double tau_zero(const RateSpec& s) {
  double top = 1.0 - s.theta();
  auto lam = [&](double tau) { return lambda_speed_sign(s.with_tau(tau)); };
  constexpr int kGrid = 200;
  double prev = 0.0;
  for (int i = 1; i < kGrid; ++i) {
    double t = top * i / kGrid;
    double v = lam(t);
    if (v == 0.0) return t;
    if (v < 0.0) {
      auto tol = boost::math::tools::eps_tolerance<double>(50);
      std::uintmax_t iters = 200;
      auto [l, r] = boost::math::tools::toms748_solve(lam, prev, t, lam(prev), v, tol, iters);
      return 0.5 * (l + r);
    }
    prev = t;
  }
  return top;
}

double Discretization::operator()(double u) const {
  double s = 0.0;
  for (int k = 0; k <= N; ++k) {
    if (deltas[k] < u) s += alphas[k];
  }
  return s;
}

Discretization heaviside_discretization() {
  Discretization d;
  d.N = 0;
  d.deltas = {0.0};
  d.alphas = {1.0};
  return d;
}

Discretization discretize(const RateSpec& s, int N, Spacing spacing) {
  if (N < 1) throw SolverError(ErrorCode::InvalidArgument, "N must be at least 1");
  if (!(s.tau() > 0.0)) throw SolverError(ErrorCode::InvalidArgument, "discretize needs tau > 0");
  double tau = s.tau();
  Discretization d;
  d.N = N;
  d.deltas.resize(N + 1);
  d.alphas.assign(N + 1, 0.0);
  d.deltas[0] = 0.0;
  d.deltas[N] = tau;
  for (int k = 1; k < N; ++k) {
    if (spacing == Spacing::Equal) {
      d.deltas[k] = k * tau / N;
    } else {
      double level = static_cast<double>(k) / N;
      auto f = [&](double u) { return s(u) - level; };
      auto tol = boost::math::tools::eps_tolerance<double>(50);
      std::uintmax_t iters = 200;
      auto [l, r] = boost::math::tools::toms748_solve(f, 0.0, tau, -level, 1.0 - level, tol, iters);
      d.deltas[k] = 0.5 * (l + r);
    }
  }
  double acc = 0.0;
  for (int k = 0; k + 1 < N; ++k) {
    d.alphas[k] = s(d.deltas[k + 1]) - s(d.deltas[k]);
    acc += d.alphas[k];
  }
  // last weight closes the sum so that the staircase reaches exactly 1
  d.alphas[N - 1] = std::max(0.0, 1.0 - acc);
  return d;
}

double discretization_l1_error(const RateSpec& s, const Discretization& d) {
  double err = 0.0, level = 0.0;
  for (int k = 0; k < d.N; ++k) {
    level += d.alphas[k];
    double c = level;
    err += integrate([&](double u) { return std::abs(s(u) - c); }, d.deltas[k], d.deltas[k + 1]);
  }
  return err;
}

FixedPoints find_fixed_points(const RateSpec& s) {
  double th = s.theta(), tau = s.tau();
  if (th + tau >= 1.0) {
    std::ostringstream os;
    os << "not bistable: u - S(u - theta) has no sign change on (theta, theta + tau) "
       << "for theta=" << th << ", tau=" << tau;
    throw SolverError(ErrorCode::NotBistable, os.str());
  }
  FixedPoints fp{0.0, th, 1.0};
  if (tau == 0.0) return fp;
  auto f = [&](double u) { return u - s(u - th); };
  auto tol = boost::math::tools::eps_tolerance<double>(52);
  std::uintmax_t iters = 300;
  auto [l, r] = boost::math::tools::toms748_solve(f, th, th + tau, f(th), f(th + tau), tol, iters);
  fp.mid = std::abs(f(l)) <= std::abs(f(r)) ? l : r;
  return fp;
}

double wave_formula_identity(const RateSpec& s) {
  if (s.tau() == 0.0) return 0.0;
  double th = s.theta();
  auto f = [&](double v) { return (-(th + v) + s(v)) * s.derivative(v); };
  return integrate(f, 0.0, s.tau()) - lambda_speed_sign(s);
}

double odd_symmetry_defect(const RateSpec& s, int samples) {
  double half = 0.5 * s.tau(), worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    double v = half * i / (samples - 1);
    worst = std::max(worst, std::abs(s(half + v) + s(half - v) - 1.0));
  }
  return worst;
}

}  // namespace nfwaves
