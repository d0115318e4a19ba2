#include "flt/lasso.hpp"

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace flt {

namespace {

double soft_threshold(double v, double lambda) {
  if (v > lambda) return v - lambda;
  if (v < -lambda) return v + lambda;
  return 0.0;
}

double kkt_residual_from_grad(const Eigen::VectorXd& grad, double lambda,
                              const Eigen::VectorXd& alpha) {
  // grad = D' (x - D a)
  double worst = 0.0;
  for (Eigen::Index j = 0; j < alpha.size(); ++j) {
    double v = alpha[j] == 0.0 ? std::max(0.0, std::abs(grad[j]) - lambda)
                               : std::abs(grad[j] - lambda * (alpha[j] > 0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

void check_columns(const Eigen::MatrixXd& dict) {
  for (Eigen::Index j = 0; j < dict.cols(); ++j) {
    if (dict.col(j).norm() > 1.0 + 1e-9) {
      throw std::runtime_error("dictionary column " + std::to_string(j) + " has norm > 1");
    }
  }
}

// Feature-sign refinement: repeatedly minimize exactly over the current
// support with signs fixed; when the minimizer flips a sign, step to the
// first zero crossing and drop that coordinate. Steps are capped at the 1-D
// minimizer along the segment, so the objective never increases even when
// the restricted system is near-singular and the solve inexact. Each removal
// shrinks the support, so the loop is finite. On exit the active coordinates
// are sign-consistent and stationary (up to solve accuracy).
bool polish_support(const Eigen::MatrixXd& gram, const Eigen::VectorXd& corr, double lambda,
                    Eigen::VectorXd& alpha, Eigen::VectorXd& gram_alpha) {
  std::vector<Eigen::Index> support;
  for (Eigen::Index j = 0; j < alpha.size(); ++j) {
    if (alpha[j] != 0.0) support.push_back(j);
  }
  if (support.empty()) return false;

  bool moved = false;
  while (!support.empty()) {
    const Eigen::Index k = static_cast<Eigen::Index>(support.size());
    Eigen::MatrixXd gss(k, k);
    Eigen::VectorXd rhs(k), cur(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index b = 0; b < k; ++b) gss(a, b) = gram(support[a], support[b]);
      rhs[a] = corr[support[a]] - lambda * (alpha[support[a]] > 0 ? 1.0 : -1.0);
      cur[a] = alpha[support[a]];
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gss);
    Eigen::VectorXd beta = ldlt.solve(rhs);
    Eigen::VectorXd linres = rhs - gss * beta;
    if (linres.cwiseAbs().maxCoeff() > 1e-9) beta += ldlt.solve(linres);  // refinement pass
    Eigen::VectorXd dir = beta - cur;
    double curvature = dir.dot(gss * dir);
    double slope = dir.dot(gss * cur - rhs);
    if (!beta.allFinite() || slope >= 0.0 || curvature <= 0.0) {
      // near-duplicate atoms: retry with a rank-revealing solve that keeps
      // beta bounded
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(gss);
      beta = cod.solve(rhs);
      beta += cod.solve(rhs - gss * beta);
      if (!beta.allFinite()) break;
      dir = beta - cur;
      curvature = dir.dot(gss * dir);
      slope = dir.dot(gss * cur - rhs);
      if (slope >= 0.0 || curvature <= 0.0) break;  // no descent either way
    }
    double t_opt = std::min(-slope / curvature, 1.0);

    double t_cross = std::numeric_limits<double>::infinity();
    Eigen::Index crossing = -1;
    for (Eigen::Index a = 0; a < k; ++a) {
      if (beta[a] * cur[a] <= 0.0) {
        double ta = cur[a] / (cur[a] - beta[a]);
        if (ta < t_cross) {
          t_cross = ta;
          crossing = a;
        }
      }
    }

    if (t_opt < t_cross) {  // stationary point reached before any sign change
      for (Eigen::Index a = 0; a < k; ++a) {
        double next = cur[a] + t_opt * dir[a];
        if (next != alpha[support[a]]) {
          alpha[support[a]] = next;
          moved = true;
        }
      }
      break;
    }
    for (Eigen::Index a = 0; a < k; ++a) {
      alpha[support[a]] = a == crossing ? 0.0 : cur[a] + t_cross * dir[a];
    }
    moved = true;
    support.erase(support.begin() + crossing);
    for (Eigen::Index a = static_cast<Eigen::Index>(support.size()) - 1; a >= 0; --a) {
      if (alpha[support[a]] == 0.0) support.erase(support.begin() + a);
    }
  }

  if (moved) {
    gram_alpha.setZero();
    for (Eigen::Index j = 0; j < alpha.size(); ++j) {
      if (alpha[j] != 0.0) gram_alpha += gram.col(j) * alpha[j];
    }
  }
  return moved;
}

// One signal against a precomputed Gram matrix G = D'D and correlation c = D'x.
// alpha/gram_alpha may carry a warm start and must be mutually consistent.
Eigen::VectorXd solve_with_gram(const Eigen::MatrixXd& gram, const Eigen::VectorXd& corr,
                                double lambda, double tol, int max_iter, Eigen::VectorXd alpha,
                                Eigen::VectorXd gram_alpha) {
  const Eigen::Index n = corr.size();

  double residual = 0.0;
  for (int pass = 0; pass < max_iter; ++pass) {
    // correlated supports make plain sweeps crawl; finish the smooth part of
    // the problem exactly, then let the sweep fix up the inactive set
    if (polish_support(gram, corr, lambda, alpha, gram_alpha)) {
      residual = kkt_residual_from_grad(corr - gram_alpha, lambda, alpha);
      if (residual <= tol) return alpha;
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      const double gjj = gram(j, j);
      if (gjj <= 0.0) continue;  // dead column, coefficient stays 0
      double rho = corr[j] - gram_alpha[j] + gjj * alpha[j];
      double updated = soft_threshold(rho, lambda) / gjj;
      if (updated != alpha[j]) {
        gram_alpha += gram.col(j) * (updated - alpha[j]);
        alpha[j] = updated;
      }
    }
    residual = kkt_residual_from_grad(corr - gram_alpha, lambda, alpha);
    if (residual <= tol) return alpha;
  }
  throw std::runtime_error("lasso did not converge in " + std::to_string(max_iter) +
                           " passes (KKT residual " + std::to_string(residual) + ")");
}

Eigen::VectorXd solve_with_gram(const Eigen::MatrixXd& gram, const Eigen::VectorXd& corr,
                                double lambda, double tol, int max_iter) {
  return solve_with_gram(gram, corr, lambda, tol, max_iter,
                         Eigen::VectorXd::Zero(corr.size()),
                         Eigen::VectorXd::Zero(corr.size()));
}

double column_kkt(const Eigen::MatrixXd& grad, const Eigen::MatrixXd& alpha, Eigen::Index c,
                  double lambda) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < alpha.rows(); ++j) {
    double v = alpha(j, c) == 0.0
                   ? std::max(0.0, std::abs(grad(j, c)) - lambda)
                   : std::abs(grad(j, c) - lambda * (alpha(j, c) > 0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace

Eigen::VectorXd lasso_solve(const LassoProblem& problem, double tol, int max_iter) {
  if (problem.lambda < 0) throw std::runtime_error("lambda must be >= 0");
  if (tol <= 0) throw std::runtime_error("tol must be > 0");
  if (max_iter < 1) throw std::runtime_error("max_iter must be >= 1");
  if (problem.dict.rows() != problem.signal.size()) {
    throw std::runtime_error("dictionary and signal dimensions differ");
  }
  check_columns(problem.dict);

  Eigen::MatrixXd gram = problem.dict.transpose() * problem.dict;
  Eigen::VectorXd corr = problem.dict.transpose() * problem.signal;
  return solve_with_gram(gram, corr, problem.lambda, tol, max_iter);
}

Eigen::MatrixXd lasso_solve_batch(const Eigen::MatrixXd& dict, const Eigen::MatrixXd& signals,
                                  double lambda, double tol, int max_iter) {
  if (lambda < 0) throw std::runtime_error("lambda must be >= 0");
  if (tol <= 0) throw std::runtime_error("tol must be > 0");
  if (max_iter < 1) throw std::runtime_error("max_iter must be >= 1");
  if (dict.rows() != signals.rows()) {
    throw std::runtime_error("dictionary and signal dimensions differ");
  }
  check_columns(dict);

  const Eigen::Index n = dict.cols();
  const Eigen::Index total = signals.cols();
  Eigen::MatrixXd gram = dict.transpose() * dict;
  Eigen::MatrixXd codes(n, total);

  if (total <= 8) {  // lockstep has nothing to amortize
    for (Eigen::Index c = 0; c < total; ++c) {
      codes.col(c) = solve_with_gram(gram, dict.transpose() * signals.col(c), lambda, tol,
                                     max_iter);
    }
    return codes;
  }

  // Lockstep sweeps: one coordinate at a time across every unfinished signal,
  // so the inner update is a rank-1 operation instead of scalar work. The
  // iterates per signal are exactly those of the scalar loop.
  Eigen::MatrixXd corr = dict.transpose() * signals;
  Eigen::MatrixXd alpha = Eigen::MatrixXd::Zero(n, total);
  Eigen::MatrixXd gram_alpha = Eigen::MatrixXd::Zero(n, total);
  std::vector<Eigen::Index> active(static_cast<std::size_t>(total));
  for (Eigen::Index c = 0; c < total; ++c) active[static_cast<std::size_t>(c)] = c;

  const int check_every = 5;
  const int bulk_passes = std::min(30, max_iter - 1);
  Eigen::RowVectorXd rho, updated, delta;
  for (int pass = 0; pass < bulk_passes && !active.empty(); ++pass) {
    const auto a = static_cast<Eigen::Index>(active.size());
    for (Eigen::Index j = 0; j < n; ++j) {
      const double gjj = gram(j, j);
      if (gjj <= 0.0) continue;
      rho = corr.row(j).head(a) - gram_alpha.row(j).head(a) + gjj * alpha.row(j).head(a);
      updated = (rho.array().abs() - lambda).max(0.0) * rho.array().sign() / gjj;
      delta = updated - alpha.row(j).head(a);
      Eigen::Index changed = (delta.array() != 0.0).count();
      if (changed == 0) continue;
      if (changed * 4 < a) {  // near convergence only a few lanes still move
        for (Eigen::Index c = 0; c < a; ++c) {
          if (delta[c] != 0.0) {
            gram_alpha.col(c).noalias() += gram.col(j) * delta[c];
            alpha(j, c) = updated[c];
          }
        }
      } else {
        gram_alpha.leftCols(a).noalias() += gram.col(j) * delta;
        alpha.row(j).head(a) = updated;
      }
    }

    if ((pass + 1) % check_every == 0) {
      // retire converged signals and compact the working set
      Eigen::MatrixXd grad = corr.leftCols(a) - gram_alpha.leftCols(a);
      std::vector<Eigen::Index> still;
      Eigen::Index write = 0;
      for (Eigen::Index c = 0; c < a; ++c) {
        if (column_kkt(grad, alpha, c, lambda) <= tol) {
          codes.col(active[static_cast<std::size_t>(c)]) = alpha.col(c);
        } else {
          if (write != c) {
            alpha.col(write) = alpha.col(c);
            gram_alpha.col(write) = gram_alpha.col(c);
            corr.col(write) = corr.col(c);
          }
          still.push_back(active[static_cast<std::size_t>(c)]);
          ++write;
        }
      }
      active.assign(still.begin(), still.end());
    }
  }

  // stragglers finish with the scalar loop and its feature-sign refinement
  for (std::size_t i = 0; i < active.size(); ++i) {
    const Eigen::Index c = static_cast<Eigen::Index>(i);
    codes.col(active[i]) = solve_with_gram(gram, corr.col(c), lambda, tol, max_iter,
                                           alpha.col(c), gram_alpha.col(c));
  }
  return codes;
}

double lasso_objective(const Eigen::MatrixXd& dict, const Eigen::VectorXd& signal, double lambda,
                       const Eigen::VectorXd& alpha) {
  return 0.5 * (signal - dict * alpha).squaredNorm() + lambda * alpha.lpNorm<1>();
}

double lasso_kkt_residual(const Eigen::MatrixXd& dict, const Eigen::VectorXd& signal,
                          double lambda, const Eigen::VectorXd& alpha) {
  Eigen::VectorXd grad = dict.transpose() * (signal - dict * alpha);
  return kkt_residual_from_grad(grad, lambda, alpha);
}

}  // namespace flt
