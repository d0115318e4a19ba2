#include "flt/dictionary.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "flt/lasso.hpp"
#include "flt/rng.hpp"

namespace flt {

namespace {

// Distinct column indices, preferring columns with nonzero norm.
std::vector<int> sample_columns(const Eigen::MatrixXd& patches, int n, Rng& rng) {
  std::vector<int> live, dead;
  for (int j = 0; j < patches.cols(); ++j) {
    (patches.col(j).norm() > 1e-12 ? live : dead).push_back(j);
  }
  rng.shuffle(live);
  rng.shuffle(dead);
  live.insert(live.end(), dead.begin(), dead.end());
  live.resize(static_cast<std::size_t>(n));
  return live;
}

Eigen::MatrixXd pick_unit_columns(const Eigen::MatrixXd& patches, int n, Rng& rng) {
  std::vector<int> idx = sample_columns(patches, n, rng);
  Eigen::MatrixXd basis(patches.rows(), n);
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd col = patches.col(idx[static_cast<std::size_t>(j)]);
    double norm = col.norm();
    basis.col(j) = norm > 1e-12 ? Eigen::VectorXd(col / norm) : col;
  }
  return basis;
}

Eigen::MatrixXd kmeans_centroids(const Eigen::MatrixXd& points, int k, Rng& rng) {
  const int npts = static_cast<int>(points.cols());

  // k-means++ seeding
  std::vector<int> centers;
  centers.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(npts))));
  Eigen::VectorXd dist2 =
      (points.colwise() - points.col(centers[0])).colwise().squaredNorm().transpose();
  while (static_cast<int>(centers.size()) < k) {
    double total = dist2.sum();
    int next = -1;
    if (total > 0) {
      double u = rng.uniform01() * total;
      double acc = 0;
      for (int j = 0; j < npts; ++j) {
        acc += dist2[j];
        if (u < acc) {
          next = j;
          break;
        }
      }
      if (next < 0) next = npts - 1;
    } else {
      next = static_cast<int>(rng.below(static_cast<std::uint64_t>(npts)));
    }
    centers.push_back(next);
    dist2 = dist2.cwiseMin(
        (points.colwise() - points.col(next)).colwise().squaredNorm().transpose());
  }

  Eigen::MatrixXd centroids(points.rows(), k);
  for (int c = 0; c < k; ++c) centroids.col(c) = points.col(centers[static_cast<std::size_t>(c)]);

  std::vector<int> assign(static_cast<std::size_t>(npts), -1);
  for (int iter = 0; iter < 50; ++iter) {
    bool changed = false;
    for (int j = 0; j < npts; ++j) {
      int best = 0;
      double best_d = (points.col(j) - centroids.col(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        double d = (points.col(j) - centroids.col(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[static_cast<std::size_t>(j)] != best) {
        assign[static_cast<std::size_t>(j)] = best;
        changed = true;
      }
    }
    if (!changed) break;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(points.rows(), k);
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int j = 0; j < npts; ++j) {
      sums.col(assign[static_cast<std::size_t>(j)]) += points.col(j);
      counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(j)])]++;
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centroids.col(c) = sums.col(c) / counts[static_cast<std::size_t>(c)];
      } else {
        // empty cluster: restart it on the point farthest from its centroid
        int far_j = 0;
        double far_d = -1;
        for (int j = 0; j < npts; ++j) {
          double d = (points.col(j) - centroids.col(assign[static_cast<std::size_t>(j)])).squaredNorm();
          if (d > far_d) {
            far_d = d;
            far_j = j;
          }
        }
        centroids.col(c) = points.col(far_j);
        assign[static_cast<std::size_t>(far_j)] = c;
      }
    }
  }
  return centroids;
}

void write_le32(std::ostream& out, std::int32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((static_cast<std::uint32_t>(v) >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::int32_t read_le32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return static_cast<std::int32_t>(v);
}

void write_le64d(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 8);
}

double read_le64d(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

constexpr char kDictMagic[8] = {'F', 'T', 'D', 'I', 'C', 'T', '0', '1'};

}  // namespace

std::pair<Dictionary, OdlState> init_dictionary(DictMethod method, const PatchMatrix& patches,
                                                int n, int epochs, double lambda,
                                                std::uint64_t seed, int batch_size) {
  if (n < 1) throw std::runtime_error("dictionary size must be >= 1");
  if (patches.count() < n) {
    throw std::runtime_error("need at least " + std::to_string(n) + " patches, got " +
                             std::to_string(patches.count()));
  }
  Rng rng(seed);
  Dictionary dict;
  OdlState state;
  state.batch_size = batch_size;
  state.code_cov = Eigen::MatrixXd::Zero(n, n);
  state.cross_cov = Eigen::MatrixXd::Zero(patches.dim(), n);

  switch (method) {
    case DictMethod::kRandomSample:
      dict.basis = pick_unit_columns(patches.data, n, rng);
      break;
    case DictMethod::kKmeans: {
      dict.basis = kmeans_centroids(patches.data, n, rng);
      for (int j = 0; j < n; ++j) {
        double norm = dict.basis.col(j).norm();
        if (norm > 1.0) dict.basis.col(j) /= norm;
      }
      break;
    }
    case DictMethod::kOdl: {
      dict.basis = pick_unit_columns(patches.data, n, rng);
      std::vector<int> order(static_cast<std::size_t>(patches.count()));
      std::iota(order.begin(), order.end(), 0);
      for (int epoch = 0; epoch < epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch_size)) {
          std::size_t count = std::min(static_cast<std::size_t>(batch_size), order.size() - start);
          Eigen::MatrixXd batch(patches.dim(), static_cast<Eigen::Index>(count));
          for (std::size_t i = 0; i < count; ++i) {
            batch.col(static_cast<Eigen::Index>(i)) = patches.data.col(order[start + i]);
          }
          odl_step(dict, state, batch, lambda);
        }
      }
      break;
    }
  }
  return {std::move(dict), std::move(state)};
}

void odl_step(Dictionary& dict, OdlState& state, const Eigen::MatrixXd& batch, double lambda) {
  if (batch.rows() != dict.dim()) {
    throw std::runtime_error("batch dimension " + std::to_string(batch.rows()) +
                             " does not match dictionary dimension " + std::to_string(dict.dim()));
  }
  if (batch.cols() < 1) throw std::runtime_error("empty batch");

  // adapted dictionaries grow correlated atoms; give the solver headroom
  // beyond its defaults (the KKT tolerance is unchanged)
  Eigen::MatrixXd codes = lasso_solve_batch(dict.basis, batch, lambda, 1e-6, 5000);
  const double inv = 1.0 / static_cast<double>(batch.cols());
  state.code_cov.noalias() += inv * (codes * codes.transpose());
  state.cross_cov.noalias() += inv * (batch * codes.transpose());
  update_basis_columns(dict, state.code_cov, state.cross_cov);
  state.rounds += 1;
}

void update_basis_columns(Dictionary& dict, const Eigen::MatrixXd& code_cov,
                          const Eigen::MatrixXd& cross_cov) {
  const int n = dict.size();
  for (int j = 0; j < n; ++j) {
    const double ajj = code_cov(j, j);
    if (ajj <= kDeadColumnFloor) continue;  // never-selected column, leave as-is
    Eigen::VectorXd u =
        (cross_cov.col(j) - dict.basis * code_cov.col(j)) / ajj + dict.basis.col(j);
    dict.basis.col(j) = u / std::max(u.norm(), 1.0);
  }
}

double surrogate_value(const Dictionary& dict, const Eigen::MatrixXd& code_cov,
                       const Eigen::MatrixXd& cross_cov) {
  double quad = (dict.basis.transpose() * dict.basis).cwiseProduct(code_cov).sum();
  double lin = dict.basis.cwiseProduct(cross_cov).sum();
  return 0.5 * quad - lin;
}

double surrogate_objective(const Dictionary& dict, const OdlState& state) {
  return surrogate_value(dict, state.code_cov, state.cross_cov) /
         static_cast<double>(std::max(state.rounds, 1L));
}

Eigen::VectorXd basis_weights(const Eigen::MatrixXd& codes) {
  const Eigen::Index n = codes.rows();
  Eigen::VectorXd norms(n);
  for (Eigen::Index j = 0; j < n; ++j) norms[j] = codes.row(j).norm();
  double total = norms.sum();
  if (total <= 0.0) return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  return norms / total;
}

bool should_update(UpdatePolicy& policy, const Eigen::VectorXd& weights) {
  const int n = static_cast<int>(weights.size());
  const int half = (n + 1) / 2;

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (weights[a] != weights[b]) return weights[a] > weights[b];
    return a < b;  // ties broken by lower index
  });
  std::vector<int> top(order.begin(), order.begin() + half);
  std::sort(top.begin(), top.end());

  bool fire = false;
  if (!policy.prev_top.empty()) {
    std::vector<int> common;
    std::set_intersection(policy.prev_top.begin(), policy.prev_top.end(), top.begin(), top.end(),
                          std::back_inserter(common));
    double overlap = static_cast<double>(common.size()) / static_cast<double>(half);
    fire = overlap < policy.overlap_threshold;
  }
  policy.prev_top = std::move(top);
  return fire;
}

void save_dictionary(const std::filesystem::path& file, const Dictionary& dict) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write dictionary file: " + file.string());
  out.write(kDictMagic, 8);
  write_le32(out, dict.dim());
  write_le32(out, dict.size());
  for (int j = 0; j < dict.size(); ++j) {
    for (int i = 0; i < dict.dim(); ++i) write_le64d(out, dict.basis(i, j));
  }
  if (!out) throw std::runtime_error("write failed: " + file.string());
}

Dictionary load_dictionary(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dictionary file: " + file.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kDictMagic, 8) != 0) {
    throw std::runtime_error("not a dictionary file: " + file.string());
  }
  std::int32_t m = read_le32(in);
  std::int32_t n = read_le32(in);
  if (!in || m < 1 || n < 1) throw std::runtime_error("bad dictionary header: " + file.string());
  Dictionary dict;
  dict.basis.resize(m, n);
  for (std::int32_t j = 0; j < n; ++j) {
    for (std::int32_t i = 0; i < m; ++i) dict.basis(i, j) = read_le64d(in);
  }
  if (!in) throw std::runtime_error("truncated dictionary file: " + file.string());
  return dict;
}

}  // namespace flt
