#pragma once

#include <Eigen/Dense>
#include <vector>

#include "flt/geometry.hpp"
#include "flt/image.hpp"

namespace flt {

// Dense grid parameters: patch side p and step q, with p >= 2 and 1 <= q <= p.
struct PatchGridSpec {
  int patch_size = 8;
  int stride = 4;

  // 8/4 for large targets, 6/2 below a 30 px minimum side.
  static PatchGridSpec for_target(int w, int h) {
    if (std::min(w, h) < 30) return PatchGridSpec{6, 2};
    return PatchGridSpec{8, 4};
  }
};

// Patch top-left offset relative to the region origin.
struct PatchPos {
  int row = 0;
  int col = 0;
  bool operator==(const PatchPos&) const = default;
};

// Column-stacked patches: data is p^2 x N, one row-major-scanned patch per
// column, positions parallel to the columns.
struct PatchMatrix {
  Eigen::MatrixXd data;
  std::vector<PatchPos> positions;

  int dim() const { return static_cast<int>(data.rows()); }
  int count() const { return static_cast<int>(data.cols()); }
};

// Grid patches over `region` clipped to the frame. Throws when the clipped
// region is smaller than the patch in either dimension.
PatchMatrix extract_patches(const GrayFrame& frame, const BoundingBox& region,
                            const PatchGridSpec& spec);

// Per column: subtract the mean, divide by sqrt(var + 10). The variance floor
// keeps flat patches finite (they encode to zero).
PatchMatrix contrast_normalize(const PatchMatrix& patches);

inline constexpr double kContrastEpsilon = 10.0;

}  // namespace flt
