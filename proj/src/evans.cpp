#include "nfwaves/evans.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "nfwaves/error.hpp"
#include "nfwaves/parallel.hpp"

namespace nfwaves {

EvansContext EvansContext::from_front(const FrontSolution& front) {
  std::vector<double> d;
  d.reserve(front.crossings.size());
  for (std::size_t k = 0; k < front.crossings.size(); ++k) {
    double v = eval_front_deriv(front, front.crossings[k]);
    if (!(v > 0.0)) {
      std::ostringstream os;
      os << "Evans context needs U'(z_k) > 0, got " << v << " at k=" << k;
      throw SolverError(ErrorCode::LostMonotonicity, os.str());
    }
    d.push_back(v);
  }
  return with_derivs(front, std::move(d));
}

EvansContext EvansContext::with_derivs(const FrontSolution& front, std::vector<double> derivs) {
  if (derivs.size() != front.crossings.size())
    throw SolverError(ErrorCode::InvalidArgument, "one derivative per crossing is required");
  EvansContext ctx;
  ctx.front = front;
  ctx.derivs = std::move(derivs);
  ctx.alphas = front.disc.alphas;
  return ctx;
}

cplx matrix_entry(const EvansContext& ctx, int j, int k, cplx lambda) {
  double ak = ctx.alphas[k];
  if (ak == 0.0) return 0.0;
  double mu = ctx.front.mu;
  const auto& z = ctx.front.crossings;
  cplx p = (lambda + 1.0) / mu;
  return ak / (mu * ctx.derivs[k]) * laplace_tail(ctx.front.kernel, z[j] - z[k], p);
}

Eigen::MatrixXcd evans_matrix(const EvansContext& ctx, cplx lambda) {
  int n = ctx.size();
  Eigen::MatrixXcd A(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) A(j, k) = matrix_entry(ctx, j, k, lambda);
  return A;
}

cplx evans_value(const EvansContext& ctx, cplx lambda) {
  int n = ctx.size();
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(n, n) - evans_matrix(ctx, lambda);
  return Eigen::PartialPivLU<Eigen::MatrixXcd>(M).determinant();
}

cplx evans_derivative(const EvansContext& ctx, cplx lambda, double h) {
  double step = h * std::max(1.0, std::abs(lambda));
  return (evans_value(ctx, lambda + step) - evans_value(ctx, lambda - step)) / (2.0 * step);
}

OriginCheck verify_zero_at_origin(const EvansContext& ctx, double tol, double deriv_tol) {
  OriginCheck out;
  out.value = evans_value(ctx, 0.0);
  Eigen::MatrixXd A = evans_matrix(ctx, 0.0).real();
  Eigen::Map<const Eigen::VectorXd> v(ctx.derivs.data(), ctx.size());
  out.eigen_residual = (A * v - v).norm() / v.norm();
  out.derivative = evans_derivative(ctx, 0.0);
  out.simple = out.eigen_residual <= tol && std::abs(out.value) < tol &&
               std::abs(out.derivative) > deriv_tol;
  return out;
}

std::pair<cplx, bool> refine_zero(const EvansContext& ctx, cplx start, double tol, int max_iter) {
  cplx x = start;
  for (int it = 0; it < max_iter; ++it) {
    cplx f = evans_value(ctx, x);
    if (std::abs(f) < tol) return {x, true};
    cplx d = evans_derivative(ctx, x);
    if (d == 0.0 || !std::isfinite(std::abs(d))) return {x, false};
    cplx step = f / d;
    // keep iterates inside the domain where the closed form holds
    for (int h = 0; h < 50 && !((x - step).real() > -1.0); ++h) step *= 0.5;
    x -= step;
    if (!(x.real() > -1.0) || !std::isfinite(x.real()) || !std::isfinite(x.imag()))
      return {x, false};
    if (std::abs(step) < 1e-14 * std::max(1.0, std::abs(x)))
      return {x, std::abs(evans_value(ctx, x)) < 1e3 * tol};
  }
  return {x, std::abs(evans_value(ctx, x)) < tol};
}

std::vector<EvansZero> EvansScan::instability_zeros() const {
  std::vector<EvansZero> out;
  for (const auto& z : zeros)
    if (!z.is_origin && z.lambda.real() >= 0.0) out.push_back(z);
  return out;
}

EvansScan scan(const EvansContext& ctx, const ScanOptions& opt) {
  if (opt.n_re < 32 || opt.n_im < 32)
    throw SolverError(ErrorCode::InvalidArgument, "scan resolution must be at least 32 per axis");
  if (!(opt.re_min > -1.0) || !(opt.re_max > opt.re_min) || !(opt.im_max > opt.im_min))
    throw SolverError(ErrorCode::InvalidArgument, "scan rectangle must lie in Re > -1");
  EvansScan out;
  out.options = opt;
  const int nr = opt.n_re, ni = opt.n_im;
  out.grid.resize(static_cast<std::size_t>(nr) * ni);
  out.values.resize(out.grid.size());
  for (int i = 0; i < ni; ++i) {
    double im = opt.im_min + (opt.im_max - opt.im_min) * i / (ni - 1);
    for (int r = 0; r < nr; ++r) {
      double re = opt.re_min + (opt.re_max - opt.re_min) * r / (nr - 1);
      out.grid[static_cast<std::size_t>(i) * nr + r] = cplx(re, im);
    }
  }
  parallel_for(ni, [&](std::size_t i) {
    for (int r = 0; r < nr; ++r) {
      std::size_t idx = i * nr + r;
      out.values[idx] = evans_value(ctx, out.grid[idx]);
    }
  });

  auto mod = [&](int i, int r) { return std::abs(out.values[static_cast<std::size_t>(i) * nr + r]); };
  std::vector<cplx> candidates;
  for (int i = 0; i < ni; ++i) {
    for (int r = 0; r < nr; ++r) {
      double m = mod(i, r);
      if (!(m < opt.candidate_threshold)) continue;
      bool is_min = true;
      for (int di = -1; di <= 1 && is_min; ++di)
        for (int dr = -1; dr <= 1 && is_min; ++dr) {
          int ii = i + di, rr = r + dr;
          if ((di || dr) && ii >= 0 && ii < ni && rr >= 0 && rr < nr) is_min = m <= mod(ii, rr);
        }
      if (is_min) candidates.push_back(out.grid[static_cast<std::size_t>(i) * nr + r]);
    }
  }

  double dre = (opt.re_max - opt.re_min) / (nr - 1), dim = (opt.im_max - opt.im_min) / (ni - 1);
  for (cplx c : candidates) {
    auto [z, ok] = refine_zero(ctx, c, opt.newton_tol);
    if (!ok) continue;
    // a root belongs to this scan if it lies within one cell of the window
    if (z.real() < opt.re_min - dre || z.real() > opt.re_max + dre || z.imag() < opt.im_min - dim ||
        z.imag() > opt.im_max + dim)
      continue;
    bool dup = false;
    for (const auto& e : out.zeros) dup = dup || std::abs(e.lambda - z) < 1e-6;
    if (dup) continue;
    out.zeros.push_back({z, std::abs(evans_value(ctx, z)), std::abs(z) < opt.origin_radius});
  }
  return out;
}

int winding_number(const EvansContext& ctx, double re0, double re1, double im0, double im1,
                   int samples_per_side) {
  const cplx corners[5] = {{re0, im0}, {re1, im0}, {re1, im1}, {re0, im1}, {re0, im0}};
  double total = 0.0;
  // accumulate the argument change on [a, b], splitting while it jumps too far
  std::function<double(cplx, cplx, cplx, cplx, int)> seg = [&](cplx a, cplx b, cplx fa, cplx fb,
                                                                int depth) -> double {
    double d = std::arg(fb / fa);
    if (std::abs(d) < 0.5 || depth > 30) return d;
    cplx m = 0.5 * (a + b);
    cplx fm = evans_value(ctx, m);
    return seg(a, m, fa, fm, depth + 1) + seg(m, b, fm, fb, depth + 1);
  };
  for (int s = 0; s < 4; ++s) {
    cplx a = corners[s], b = corners[s + 1];
    cplx prev = a, fprev = evans_value(ctx, a);
    for (int i = 1; i <= samples_per_side; ++i) {
      cplx x = a + (b - a) * (static_cast<double>(i) / samples_per_side);
      cplx fx = evans_value(ctx, x);
      total += seg(prev, x, fprev, fx, 0);
      prev = x;
      fprev = fx;
    }
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

double essential_spectrum(const EvansContext&) { return -1.0; }

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Stable: return "stable";
    case Verdict::Unstable: return "unstable";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

Verdict stability_verdict(const OriginCheck& origin, const EvansScan& scan) {
  if (!scan.instability_zeros().empty()) return Verdict::Unstable;
  return origin.simple ? Verdict::Stable : Verdict::Inconclusive;
}

}  // namespace nfwaves
