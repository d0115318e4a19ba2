#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "flt/dictionary.hpp"
#include "flt/patches.hpp"

namespace flt {

enum class EncoderMethod { kSoftThreshold, kTriangle, kSoftAssign, kLocalSoftAssign, kSparseCoding };

struct EncoderSpec {
  EncoderMethod method = EncoderMethod::kSoftThreshold;
  double st_fraction = 0.25;  // threshold = fraction * max(D'X) over the batch
  double beta = 10.0;         // soft-assignment smoothing
  int knn = 10;               // localized soft-assignment neighborhood
  double sc_lambda = 0.25;
  bool lsa_local_denominator = false;  // normalize over the k neighbors only
};

// Per-basis responses: n x N, one code per patch column, positions carried
// over from the patch matrix.
struct CodeMatrix {
  Eigen::MatrixXd data;
  std::vector<PatchPos> positions;

  int size() const { return static_cast<int>(data.rows()); }
  int count() const { return static_cast<int>(data.cols()); }
};

// The soft-threshold cutoff for a patch batch: fraction * max entry of D'X.
double st_threshold(const Dictionary& dict, const Eigen::MatrixXd& patches, double fraction);

// Encodes every patch column against the dictionary. For the soft-threshold
// method the cutoff defaults to st_threshold over this batch; pass
// `st_override` to share one cutoff across several calls (the tracker does
// this with the per-frame training window).
CodeMatrix encode(const Dictionary& dict, const PatchMatrix& patches, const EncoderSpec& spec,
                  std::optional<double> st_override = {});

}  // namespace flt
