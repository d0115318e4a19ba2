#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "flt/geometry.hpp"
#include "flt/image.hpp"

namespace flt {

struct Sequence {
  std::vector<GrayFrame> frames;
  std::optional<std::vector<BoundingBox>> truth;  // one box per frame when present
  std::string name;

  int size() const { return static_cast<int>(frames.size()); }
};

// One "x,y,w,h" ground-truth line; commas, tabs and spaces all separate.
BoundingBox parse_truth_line(const std::string& line);

// Loads img0001.<ext> ... from `frame_dir` (ext pgm or ppm), numbered from 1
// with no gaps, plus an optional truth file with one line per frame.
// `truth_one_based` subtracts 1 from x and y of every truth box.
Sequence load_sequence(const std::filesystem::path& frame_dir,
                       const std::optional<std::filesystem::path>& truth_path = {},
                       bool truth_one_based = false);

// Writes frames as imgNNNN.pgm plus groundtruth.txt when truth is present.
void save_sequence(const std::filesystem::path& dir, const Sequence& seq);

struct SynthSpec {
  int frame_w = 320;
  int frame_h = 240;
  int n_frames = 50;
  int target_size = 40;
  int velocity_x = 0;  // pixels per frame
  int velocity_y = 0;
  double jitter_sigma = 0.0;  // per-frame Gaussian jitter of the target position
  double noise_sigma = 0.0;   // background/additive intensity noise
  std::uint64_t seed = 0;
  std::optional<int> start_x;  // default: trajectory centered in the frame
  std::optional<int> start_y;
};

// Fixed random texture translated across a noisy mid-gray background.
// Deterministic for a fixed spec; truth boxes record the exact placement.
Sequence synth_sequence(const SynthSpec& spec);

}  // namespace flt
