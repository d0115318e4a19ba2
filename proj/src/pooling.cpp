#include "flt/pooling.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace flt {

Eigen::VectorXd pyramid_max_pool(const CodeMatrix& codes, int region_w, int region_h,
                                 int patch_size, const PyramidSpec& spec) {
  if (spec.levels.empty()) throw std::runtime_error("pyramid has no levels");
  for (int side : spec.levels) {
    if (side < 1) throw std::runtime_error("pyramid level sides must be >= 1");
  }
  const int n = codes.size();
  for (const PatchPos& pos : codes.positions) {
    if (pos.row < 0 || pos.col < 0 || pos.row + patch_size > region_h ||
        pos.col + patch_size > region_w) {
      throw std::runtime_error("patch at (" + std::to_string(pos.row) + "," +
                               std::to_string(pos.col) + ") falls outside the " +
                               std::to_string(region_w) + "x" + std::to_string(region_h) +
                               " region");
    }
  }

  const double lowest = std::numeric_limits<double>::lowest();
  Eigen::VectorXd pooled = Eigen::VectorXd::Constant(spec.feature_dim(n), lowest);
  int level_offset = 0;
  for (int side : spec.levels) {
    for (int c = 0; c < codes.count(); ++c) {
      const PatchPos& pos = codes.positions[static_cast<std::size_t>(c)];
      double cy = pos.row + patch_size / 2.0;
      double cx = pos.col + patch_size / 2.0;
      int cell_row = std::min(static_cast<int>(cy * side / region_h), side - 1);
      int cell_col = std::min(static_cast<int>(cx * side / region_w), side - 1);
      int base = level_offset + (cell_row * side + cell_col) * n;
      for (int b = 0; b < n; ++b) {
        pooled[base + b] = std::max(pooled[base + b], codes.data(b, c));
      }
    }
    level_offset += side * side * n;
  }
  // empty cells pool to zero
  for (Eigen::Index i = 0; i < pooled.size(); ++i) {
    if (pooled[i] == lowest) pooled[i] = 0.0;
  }
  return pooled;
}

}  // namespace flt
