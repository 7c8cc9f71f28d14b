#pragma once

// Damped Newton iteration shared by the front and pulse solvers.

#include <Eigen/Dense>
#include <functional>

namespace nfwaves {

struct NewtonOptions {
  int max_iterations = 100;
  int max_halvings = 30;
  double tolerance = 1e-10;  // on the max-norm of the residual
};

struct NewtonResult {
  Eigen::VectorXd x;
  double residual_norm = 0.0;
  int iterations = 0;
};

/// Fills F (and J when non-null) at x. Non-finite entries in F mark x as
/// inadmissible; the line search then shortens the step.
using ResidualFn = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& F, Eigen::MatrixXd* J)>;

/// Newton with backtracking: the step is halved until the 2-norm of the
/// residual decreases. Throws BadGuess when the start is inadmissible and
/// MaxIterations when the budget or the line search runs out.
NewtonResult damped_newton(const ResidualFn& fn, Eigen::VectorXd x0, const NewtonOptions& opt = {});

/// Forward-difference Jacobian, used to cross-check the analytic ones.
Eigen::MatrixXd finite_difference_jacobian(const ResidualFn& fn, const Eigen::VectorXd& x, double h = 1e-7);

}  // namespace nfwaves
