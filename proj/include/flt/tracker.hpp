#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "flt/dictionary.hpp"
#include "flt/encode.hpp"
#include "flt/lssvm.hpp"
#include "flt/metrics.hpp"
#include "flt/patches.hpp"
#include "flt/pooling.hpp"
#include "flt/rng.hpp"
#include "flt/sequence.hpp"

namespace flt {

enum class DictUpdateMode { kOff, kTriggered, kAlways };

struct TrackerConfig {
  int search_radius_track = 30;
  int search_radius_train = 60;
  int candidate_stride = 2;
  int retrain_every = 4;        // frames between classifier refreshes
  int negatives_per_frame = 40;
  double neg_vor_max = 0.3;     // negatives must overlap the estimate less than this
  int jitter_positives = 4;     // extra one-pixel-shifted positive boxes

  DictUpdateMode dict_update = DictUpdateMode::kTriggered;
  DictMethod dict_method = DictMethod::kOdl;
  int dict_size = 100;
  int dict_epochs = 3;
  double dict_lambda = 0.0;  // <= 0 picks default_dict_lambda(patch dim)
  int odl_batch = 256;
  double overlap_threshold = 0.9;

  std::optional<PatchGridSpec> grid;  // unset: selected from the target size
  EncoderSpec encoder{};
  PyramidSpec pyramid{};
  // on ~1400-dim pooled features the classifier needs real shrinkage; small
  // values interpolate the training set and the score landscape falls apart
  double gamma = 10.0;
  bool bias_verbatim = false;
  bool use_truth_frame2 = false;  // take frame 2 from ground truth when available
  int head_keep = 10;
  int tail_keep = 20;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> dict_in;  // preload instead of learning
};

// Mutable per-run state; the box size is fixed at initialization
// (translation-only tracking).
struct TrackState {
  BoundingBox current_box;
  PatchGridSpec grid;
  Dictionary dict;
  OdlState odl;
  UpdatePolicy policy;
  LinearModel model;
  Reservoir reservoir;
  int frame_index = 0;  // 1-based index of the last processed frame
};

struct FrameResult {
  BoundingBox box;
  double score = 0.0;
};

// All boxes of center's size whose top-left offsets lie on the stride grid
// inside the radius disc, (0,0) included, ordered row-major by dy then dx.
std::vector<BoundingBox> sample_candidates(const BoundingBox& center, int radius, int stride);

// Pooled feature of one region of the frame (clipped to the frame bounds).
Eigen::VectorXd region_feature(const GrayFrame& frame, const BoundingBox& region,
                               const TrackState& state, const TrackerConfig& cfg,
                               std::optional<double> st_override = {});

// Scores every candidate around state.current_box and returns the argmax;
// ties go to the smallest displacement, then sampling order.
FrameResult detect(const GrayFrame& frame, const TrackState& state, const TrackerConfig& cfg,
                   std::optional<double> st_override = {});

// Labeled features for one frame: the estimate plus jittered copies as
// positives, rng-sampled low-overlap boxes from the training disc as
// negatives.
std::vector<LabeledFeature> gather_training_samples(const GrayFrame& frame,
                                                    const BoundingBox& est_box,
                                                    const TrackState& state,
                                                    const TrackerConfig& cfg, Rng& rng,
                                                    std::optional<double> st_override = {});

// The full per-frame loop over a sequence, starting from init_box in frame 1.
// `final_state` receives the end-of-run state when non-null (e.g. to save the
// updated dictionary).
std::vector<FrameResult> track_sequence(const Sequence& seq, const BoundingBox& init_box,
                                        const TrackerConfig& cfg,
                                        TrackState* final_state = nullptr);

// CSV "frame,x,y,w,h,score" with a header row.
void write_trajectory_csv(const std::filesystem::path& file,
                          const std::vector<FrameResult>& trajectory);
std::vector<FrameResult> read_trajectory_csv(const std::filesystem::path& file);

}  // namespace flt
