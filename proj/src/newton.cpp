#include "nfwaves/newton.hpp"

#include <cmath>
#include <sstream>

#include "nfwaves/error.hpp"

namespace nfwaves {

namespace {

bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

NewtonResult damped_newton(const ResidualFn& fn, Eigen::VectorXd x0, const NewtonOptions& opt) {
  const Eigen::Index n = x0.size();
  Eigen::VectorXd F(n), Ft(n);
  Eigen::MatrixXd J(n, n);
  NewtonResult res;
  res.x = std::move(x0);
  fn(res.x, F, &J);
  if (!finite(F) || !J.allFinite())
    throw SolverError(ErrorCode::BadGuess, "initial guess gives a non-finite residual");

  for (int it = 0; it <= opt.max_iterations; ++it) {
    res.iterations = it;
    res.residual_norm = F.lpNorm<Eigen::Infinity>();
    if (res.residual_norm < opt.tolerance) return res;
    if (it == opt.max_iterations) break;

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
    Eigen::VectorXd dx = lu.solve(-F);
    if (!finite(dx)) throw SolverError(ErrorCode::MaxIterations, "singular Newton system");

    double f0 = F.squaredNorm();
    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd xt;
    for (int k = 0; k <= opt.max_halvings; ++k) {
      xt = res.x + t * dx;
      fn(xt, Ft, nullptr);
      if (finite(Ft) && Ft.squaredNorm() < f0) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      // residual is at round-off level and cannot decrease further
      if (res.residual_norm < 1e3 * opt.tolerance) return res;
      std::ostringstream os;
      os << "line search stalled at residual " << res.residual_norm << " after " << it
         << " iterations";
      throw SolverError(ErrorCode::MaxIterations, os.str());
    }
    res.x = xt;
    fn(res.x, F, &J);
  }
  std::ostringstream os;
  os << "no convergence in " << opt.max_iterations << " iterations (residual "
     << res.residual_norm << ")";
  throw SolverError(ErrorCode::MaxIterations, os.str());
}

Eigen::MatrixXd finite_difference_jacobian(const ResidualFn& fn, const Eigen::VectorXd& x, double h) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd F0(n), F1(n);
  fn(x, F0, nullptr);
  Eigen::MatrixXd J(F0.size(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::VectorXd xp = x;
    double step = h * std::max(1.0, std::abs(x[j]));
    xp[j] += step;
    fn(xp, F1, nullptr);
    J.col(j) = (F1 - F0) / step;
  }
  return J;
}

}  // namespace nfwaves
