#pragma once

#include <filesystem>
#include <vector>

#include "flt/geometry.hpp"

namespace flt {

// PASCAL overlap ratio: intersection area over union area, in [0, 1].
double vor(const BoundingBox& a, const BoundingBox& b);

// Center location error in pixels.
double cle(const BoundingBox& a, const BoundingBox& b);

struct FrameMetrics {
  int frame = 0;  // 1-based
  double vor = 0.0;
  double cle = 0.0;
};

struct EvalReport {
  std::vector<FrameMetrics> per_frame;
  double mean_vor = 0.0;
  double mean_cle = 0.0;
};

// Per-frame metrics plus arithmetic means over all frames, frame 1 included.
EvalReport evaluate(const std::vector<BoundingBox>& trajectory,
                    const std::vector<BoundingBox>& truth);

// CSV "frame,vor,cle" with a header row, %.6f columns.
void write_report_csv(const std::filesystem::path& file, const EvalReport& report);
EvalReport read_report_csv(const std::filesystem::path& file);

}  // namespace flt
