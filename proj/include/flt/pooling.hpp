#pragma once

#include <Eigen/Dense>
#include <numeric>
#include <vector>

#include "flt/encode.hpp"

namespace flt {

struct PyramidSpec {
  std::vector<int> levels{1, 2, 3};  // grid sides

  int cells() const {
    int total = 0;
    for (int side : levels) total += side * side;
    return total;
  }
  int feature_dim(int n) const { return n * cells(); }
};

// Max over the codes falling in each pyramid cell; a patch belongs to the
// cell containing its center. Empty cells pool to zero. Output is ordered
// level-major, then cell row-major, then basis within each cell.
Eigen::VectorXd pyramid_max_pool(const CodeMatrix& codes, int region_w, int region_h,
                                 int patch_size, const PyramidSpec& spec);

}  // namespace flt
