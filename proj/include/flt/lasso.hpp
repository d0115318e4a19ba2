#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace flt {

// min 0.5 * ||signal - dict * alpha||^2 + lambda * ||alpha||_1
// Dictionary columns must have L2 norm <= 1 (the learned-dictionary constraint).
struct LassoProblem {
  Eigen::MatrixXd dict;
  Eigen::VectorXd signal;
  double lambda = 0.0;
};

// Cyclic coordinate descent. The returned coefficients satisfy the KKT
// conditions to within `tol`:
//   |d_j' (x - D a)| <= lambda + tol          for a_j == 0
//   d_j' (x - D a)   == lambda * sign(a_j) +- tol  otherwise
// Throws when the residual is still above tol after max_iter full passes.
Eigen::VectorXd lasso_solve(const LassoProblem& problem, double tol = 1e-6, int max_iter = 1000);

// Columnwise lasso_solve sharing one Gram matrix across all signals.
Eigen::MatrixXd lasso_solve_batch(const Eigen::MatrixXd& dict, const Eigen::MatrixXd& signals,
                                  double lambda, double tol = 1e-6, int max_iter = 1000);

double lasso_objective(const Eigen::MatrixXd& dict, const Eigen::VectorXd& signal, double lambda,
                       const Eigen::VectorXd& alpha);

// Worst KKT violation of `alpha` for the given problem (0 at an exact optimum).
double lasso_kkt_residual(const Eigen::MatrixXd& dict, const Eigen::VectorXd& signal,
                          double lambda, const Eigen::VectorXd& alpha);

// Dimension-scaled default for dictionary learning when none is given.
inline double default_dict_lambda(int m) { return 1.2 / std::sqrt(static_cast<double>(m)); }

}  // namespace flt
