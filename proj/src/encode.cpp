#include "flt/encode.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "flt/lasso.hpp"

namespace flt {

namespace {

// Columns of squared Euclidean distances ||x - d_j||^2 for one patch.
Eigen::VectorXd sq_distances(const Eigen::MatrixXd& basis, const Eigen::VectorXd& x) {
  Eigen::VectorXd d2(basis.cols());
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    d2[j] = (x - basis.col(j)).squaredNorm();
  }
  return d2;
}

Eigen::VectorXd soft_assign(const Eigen::VectorXd& d2, double beta) {
  // max-shift keeps the exponentials finite
  Eigen::VectorXd e = -beta * d2;
  double shift = e.maxCoeff();
  Eigen::VectorXd num = (e.array() - shift).exp();
  return num / num.sum();
}

}  // namespace

double st_threshold(const Dictionary& dict, const Eigen::MatrixXd& patches, double fraction) {
  if (patches.cols() == 0) return 0.0;
  return fraction * (dict.basis.transpose() * patches).maxCoeff();
}

CodeMatrix encode(const Dictionary& dict, const PatchMatrix& patches, const EncoderSpec& spec,
                  std::optional<double> st_override) {
  if (dict.dim() != patches.dim()) {
    throw std::runtime_error("dictionary dimension " + std::to_string(dict.dim()) +
                             " does not match patch dimension " + std::to_string(patches.dim()));
  }
  const int n = dict.size();
  const int count = patches.count();
  CodeMatrix out;
  out.positions = patches.positions;
  out.data.resize(n, count);

  switch (spec.method) {
    case EncoderMethod::kSoftThreshold: {
      double s = st_override ? *st_override : st_threshold(dict, patches.data, spec.st_fraction);
      out.data = ((dict.basis.transpose() * patches.data).array() - s).max(0.0);
      break;
    }
    case EncoderMethod::kTriangle: {
      for (int c = 0; c < count; ++c) {
        Eigen::VectorXd dist = sq_distances(dict.basis, patches.data.col(c)).cwiseSqrt();
        double mu = dist.mean();
        out.data.col(c) = (mu - dist.array()).max(0.0);
      }
      break;
    }
    case EncoderMethod::kSoftAssign: {
      for (int c = 0; c < count; ++c) {
        out.data.col(c) = soft_assign(sq_distances(dict.basis, patches.data.col(c)), spec.beta);
      }
      break;
    }
    case EncoderMethod::kLocalSoftAssign: {
      const int k = std::clamp(spec.knn, 1, n);
      for (int c = 0; c < count; ++c) {
        Eigen::VectorXd d2 = sq_distances(dict.basis, patches.data.col(c));
        Eigen::VectorXd full = soft_assign(d2, spec.beta);

        // k nearest bases, ties broken by lower index
        std::vector<int> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
          if (d2[a] != d2[b]) return d2[a] < d2[b];
          return a < b;
        });

        Eigen::VectorXd code = Eigen::VectorXd::Zero(n);
        if (spec.lsa_local_denominator) {
          Eigen::VectorXd e(k);
          for (int i = 0; i < k; ++i) e[i] = -spec.beta * d2[order[static_cast<std::size_t>(i)]];
          double shift = e.maxCoeff();
          Eigen::VectorXd num = (e.array() - shift).exp();
          num /= num.sum();
          for (int i = 0; i < k; ++i) code[order[static_cast<std::size_t>(i)]] = num[i];
        } else {
          for (int i = 0; i < k; ++i) {
            code[order[static_cast<std::size_t>(i)]] = full[order[static_cast<std::size_t>(i)]];
          }
        }
        out.data.col(c) = code;
      }
      break;
    }
    case EncoderMethod::kSparseCoding: {
      Eigen::MatrixXd alpha = lasso_solve_batch(dict.basis, patches.data, spec.sc_lambda, 1e-6);
      out.data = alpha.cwiseMax(0.0);
      break;
    }
  }
  return out;
}

}  // namespace flt
