#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "flt/patches.hpp"

namespace flt {

// Basis matrix, one basis per column, every column norm <= 1.
struct Dictionary {
  Eigen::MatrixXd basis;

  int dim() const { return static_cast<int>(basis.rows()); }    // m
  int size() const { return static_cast<int>(basis.cols()); }   // n
};

// Online-learning sufficient statistics. code_cov accumulates the per-round
// mean code outer products, cross_cov the signal-code cross products; both
// grow by one batch per round.
struct OdlState {
  Eigen::MatrixXd code_cov;   // n x n, symmetric PSD
  Eigen::MatrixXd cross_cov;  // m x n
  long rounds = 0;
  int batch_size = 256;
};

enum class DictMethod { kOdl, kKmeans, kRandomSample };

// Offline initialization from a normalized patch set.
//   kOdl:          n random unit-norm patches, then `epochs` shuffled passes
//                  of odl_step over mini-batches of state.batch_size
//   kKmeans:       k-means++ seeding + Lloyd (<= 50 iterations), centroids
//                  projected onto the unit ball
//   kRandomSample: n distinct random patches rescaled to unit norm
// State is zeroed for kKmeans / kRandomSample.
std::pair<Dictionary, OdlState> init_dictionary(DictMethod method, const PatchMatrix& patches,
                                                int n, int epochs, double lambda,
                                                std::uint64_t seed, int batch_size = 256);

// One online round: sparse-code the batch against the incoming dictionary,
// fold the batch into the statistics, then refresh every live column.
void odl_step(Dictionary& dict, OdlState& state, const Eigen::MatrixXd& batch, double lambda);

// The column-refresh pass alone, with the statistics held fixed. Each column
// is an exact minimizer of the surrogate in that column, so one pass never
// increases surrogate_value.
void update_basis_columns(Dictionary& dict, const Eigen::MatrixXd& code_cov,
                          const Eigen::MatrixXd& cross_cov);

// 0.5 tr(D'D A) - tr(D'B), the data-dependent part of the surrogate.
double surrogate_value(const Dictionary& dict, const Eigen::MatrixXd& code_cov,
                       const Eigen::MatrixXd& cross_cov);

// surrogate_value averaged over completed rounds.
double surrogate_objective(const Dictionary& dict, const OdlState& state);

// Per-basis importance: normalized L2 norms of the code rows. All-zero codes
// fall back to uniform weights.
Eigen::VectorXd basis_weights(const Eigen::MatrixXd& codes);

// Appearance-change trigger: fires when the top-half basis sets of two
// consecutive detections overlap less than the threshold.
struct UpdatePolicy {
  double overlap_threshold = 0.9;
  std::vector<int> prev_top;  // empty until the first observation
};

// Updates policy.prev_top and reports whether the dictionary should refresh.
// The first observation only records the top set.
bool should_update(UpdatePolicy& policy, const Eigen::VectorXd& weights);

// Flat binary format: magic "FTDICT01", little-endian int32 m and n, then
// m*n little-endian float64 values column-major.
void save_dictionary(const std::filesystem::path& file, const Dictionary& dict);
Dictionary load_dictionary(const std::filesystem::path& file);

inline constexpr double kDeadColumnFloor = 1e-8;

}  // namespace flt
