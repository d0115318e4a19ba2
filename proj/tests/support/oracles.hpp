#pragma once

// Test-side oracles, written independently of the library code they check.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "flt/geometry.hpp"
#include "flt/lssvm.hpp"
#include "flt/rng.hpp"

namespace oracles {

// Independent KKT check for min 0.5||x - D a||^2 + lambda ||a||_1.
inline bool kkt_verify(const Eigen::MatrixXd& dict, const Eigen::VectorXd& signal, double lambda,
                       const Eigen::VectorXd& alpha, double tol) {
  Eigen::VectorXd grad = dict.transpose() * (signal - dict * alpha);
  for (Eigen::Index j = 0; j < alpha.size(); ++j) {
    if (alpha[j] == 0.0) {
      if (std::abs(grad[j]) > lambda + tol) return false;
    } else {
      if (std::abs(grad[j] - lambda * (alpha[j] > 0 ? 1.0 : -1.0)) > tol) return false;
    }
  }
  return true;
}

inline double lasso_objective_of(const Eigen::MatrixXd& dict, const Eigen::VectorXd& signal,
                                 double lambda, const Eigen::VectorXd& alpha) {
  return 0.5 * (signal - dict * alpha).squaredNorm() + lambda * alpha.lpNorm<1>();
}

// Best objective over every support of size <= max_support and every sign
// pattern, solving the sign-restricted stationarity system for each.
inline double lasso_support_enumeration(const Eigen::MatrixXd& dict,
                                        const Eigen::VectorXd& signal, double lambda,
                                        int max_support) {
  const int n = static_cast<int>(dict.cols());
  double best = lasso_objective_of(dict, signal, lambda, Eigen::VectorXd::Zero(n));

  std::vector<int> support;
  auto evaluate_support = [&]() {
    const int k = static_cast<int>(support.size());
    Eigen::MatrixXd ds(dict.rows(), k);
    for (int i = 0; i < k; ++i) ds.col(i) = dict.col(support[static_cast<std::size_t>(i)]);
    Eigen::MatrixXd gss = ds.transpose() * ds;
    Eigen::VectorXd dsx = ds.transpose() * signal;
    for (int signs = 0; signs < (1 << k); ++signs) {
      Eigen::VectorXd s(k);
      for (int i = 0; i < k; ++i) s[i] = (signs >> i) & 1 ? 1.0 : -1.0;
      Eigen::VectorXd beta = gss.fullPivLu().solve(dsx - lambda * s);
      Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
      for (int i = 0; i < k; ++i) alpha[support[static_cast<std::size_t>(i)]] = beta[i];
      best = std::min(best, lasso_objective_of(dict, signal, lambda, alpha));
    }
  };

  // iterative enumeration of all supports with 1 <= size <= max_support
  std::vector<int> stack;
  auto recurse = [&](auto&& self, int start) -> void {
    if (!support.empty()) evaluate_support();
    if (static_cast<int>(support.size()) == max_support) return;
    for (int j = start; j < n; ++j) {
      support.push_back(j);
      self(self, j + 1);
      support.pop_back();
    }
  };
  recurse(recurse, 0);
  return best;
}

// Direct minimizer of sum_i (w'x_i + b - y_i)^2 + gamma ||w||^2 via its
// stationarity system in (w, b).
inline std::pair<Eigen::VectorXd, double> lssvm_normal_equations(
    const std::vector<flt::LabeledFeature>& samples, double gamma) {
  const Eigen::Index d = samples.front().first.size();
  Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(d + 1, d + 1);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d + 1);
  for (const auto& [x, y] : samples) {
    lhs.topLeftCorner(d, d) += x * x.transpose();
    lhs.topRightCorner(d, 1) += x;
    rhs.head(d) += static_cast<double>(y) * x;
    rhs[d] += y;
  }
  lhs.bottomLeftCorner(1, d) = lhs.topRightCorner(d, 1).transpose();
  lhs(d, d) = static_cast<double>(samples.size());
  lhs.topLeftCorner(d, d).diagonal().array() += gamma;
  Eigen::VectorXd sol = lhs.fullPivLu().solve(rhs);
  return {sol.head(d), sol[d]};
}

// Pixel-counting overlap ratio for integer boxes.
inline double rasterized_vor(const flt::BoundingBox& a, const flt::BoundingBox& b) {
  long inter = 0, only_a = 0, only_b = 0;
  int x0 = std::min(a.x, b.x), x1 = std::max(a.x + a.w, b.x + b.w);
  int y0 = std::min(a.y, b.y), y1 = std::max(a.y + a.h, b.y + b.h);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      bool in_a = x >= a.x && x < a.x + a.w && y >= a.y && y < a.y + a.h;
      bool in_b = x >= b.x && x < b.x + b.w && y >= b.y && y < b.y + b.h;
      if (in_a && in_b) ++inter;
      else if (in_a) ++only_a;
      else if (in_b) ++only_b;
    }
  }
  long uni = inter + only_a + only_b;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

// Random dictionary with unit-norm columns.
inline Eigen::MatrixXd random_unit_dict(flt::Rng& rng, int m, int n) {
  Eigen::MatrixXd d(m, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) d(i, j) = rng.gaussian();
    d.col(j).normalize();
  }
  return d;
}

inline Eigen::VectorXd random_vector(flt::Rng& rng, int m) {
  Eigen::VectorXd v(m);
  for (int i = 0; i < m; ++i) v[i] = rng.gaussian();
  return v;
}

}  // namespace oracles
