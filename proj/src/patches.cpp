#include "flt/patches.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace flt {

PatchMatrix extract_patches(const GrayFrame& frame, const BoundingBox& region,
                            const PatchGridSpec& spec) {
  const int p = spec.patch_size;
  const int q = spec.stride;
  if (p < 2) throw std::runtime_error("patch size must be >= 2");
  if (q < 1 || q > p) throw std::runtime_error("stride must be in [1, patch_size]");

  BoundingBox r = clip_to_frame(region, frame.width, frame.height);
  if (r.w < p || r.h < p) {
    throw std::runtime_error("region " + std::to_string(r.w) + "x" + std::to_string(r.h) +
                             " after clipping is smaller than patch size " + std::to_string(p));
  }

  const int nx = (r.w - p) / q + 1;
  const int ny = (r.h - p) / q + 1;
  PatchMatrix out;
  out.data.resize(p * p, nx * ny);
  out.positions.reserve(static_cast<std::size_t>(nx) * ny);

  int col = 0;
  for (int i = 0; i < ny; ++i) {
    for (int j = 0; j < nx; ++j) {
      const int top = r.y + i * q;
      const int left = r.x + j * q;
      for (int pr = 0; pr < p; ++pr) {
        for (int pc = 0; pc < p; ++pc) {
          out.data(pr * p + pc, col) = static_cast<double>(frame.at(top + pr, left + pc));
        }
      }
      out.positions.push_back(PatchPos{i * q, j * q});
      ++col;
    }
  }
  return out;
}

PatchMatrix contrast_normalize(const PatchMatrix& patches) {
  PatchMatrix out;
  out.positions = patches.positions;
  out.data = patches.data;
  const auto m = static_cast<double>(patches.data.rows());
  for (Eigen::Index c = 0; c < out.data.cols(); ++c) {
    auto col = out.data.col(c);
    double mean = col.mean();
    col.array() -= mean;
    double var = col.squaredNorm() / m;
    col /= std::sqrt(var + kContrastEpsilon);
  }
  return out;
}

}  // namespace flt
