#include "flt/tracker.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "flt/lasso.hpp"

namespace flt {

namespace {

bool grid_fits(const BoundingBox& region, const GrayFrame& frame, const PatchGridSpec& grid) {
  BoundingBox c = clip_to_frame(region, frame.width, frame.height);
  return c.w >= grid.patch_size && c.h >= grid.patch_size;
}

PatchMatrix window_patches(const GrayFrame& frame, const BoundingBox& around, int radius,
                           const PatchGridSpec& grid) {
  return contrast_normalize(extract_patches(frame, inflate(around, radius), grid));
}

// Offsets used for the jittered positive boxes, one pixel at a time.
constexpr int kJitterOffsets[8][2] = {{1, 0}, {-1, 0}, {0, 1},  {0, -1},
                                      {1, 1}, {-1, -1}, {1, -1}, {-1, 1}};

}  // namespace

std::vector<BoundingBox> sample_candidates(const BoundingBox& center, int radius, int stride) {
  if (radius < 0) throw std::runtime_error("radius must be >= 0");
  if (stride < 1) throw std::runtime_error("stride must be >= 1");
  std::vector<BoundingBox> out;
  const long r2 = static_cast<long>(radius) * radius;
  const int steps = radius / stride;
  for (int dy = -steps * stride; dy <= steps * stride; dy += stride) {
    for (int dx = -steps * stride; dx <= steps * stride; dx += stride) {
      if (static_cast<long>(dx) * dx + static_cast<long>(dy) * dy <= r2) {
        out.push_back(BoundingBox{center.x + dx, center.y + dy, center.w, center.h});
      }
    }
  }
  return out;
}

Eigen::VectorXd region_feature(const GrayFrame& frame, const BoundingBox& region,
                               const TrackState& state, const TrackerConfig& cfg,
                               std::optional<double> st_override) {
  BoundingBox clipped = clip_to_frame(region, frame.width, frame.height);
  PatchMatrix patches = contrast_normalize(extract_patches(frame, region, state.grid));
  CodeMatrix codes = encode(state.dict, patches, cfg.encoder, st_override);
  return pyramid_max_pool(codes, clipped.w, clipped.h, state.grid.patch_size, cfg.pyramid);
}

namespace {

// Scores every candidate from one shared encoding of the search window.
// Candidate origins live on the candidate-stride grid and patch offsets on
// the patch-stride grid, so with a window grid at gcd-like stride every
// candidate patch is one of the window's columns; each candidate then only
// pools and scores precomputed codes. Valid when the whole window (hence
// every candidate) lies inside the frame.
std::optional<FrameResult> detect_shared_window(const GrayFrame& frame, const TrackState& state,
                                                const TrackerConfig& cfg,
                                                const std::vector<BoundingBox>& candidates,
                                                std::optional<double> st) {
  const int p = state.grid.patch_size;
  const int q = state.grid.stride;
  const int cs = cfg.candidate_stride;
  // candidate offsets must land on the window's patch grid
  if (q % cs != 0 || cfg.search_radius_track % cs != 0) return std::nullopt;

  const BoundingBox& box = state.current_box;
  BoundingBox window = inflate(box, cfg.search_radius_track);
  if (window.x < 0 || window.y < 0 || window.x + window.w > frame.width ||
      window.y + window.h > frame.height) {
    return std::nullopt;
  }

  PatchGridSpec dense{p, cs};
  CodeMatrix codes =
      encode(state.dict, contrast_normalize(extract_patches(frame, window, dense)), cfg.encoder, st);
  const int cols_per_row = (window.w - p) / cs + 1;

  // candidate-relative patch grid and its pyramid cells are shared
  const int per_axis = (box.w - p) / q + 1;
  const int per_axis_y = (box.h - p) / q + 1;
  const int n = state.dict.size();
  struct CellTarget {
    int patch = 0;  // candidate-relative patch index
    int base = 0;   // offset of the cell's basis block in the pooled vector
  };
  std::vector<CellTarget> targets;
  int level_offset = 0;
  for (int side : cfg.pyramid.levels) {
    for (int i = 0; i < per_axis_y; ++i) {
      for (int j = 0; j < per_axis; ++j) {
        double cy = i * q + p / 2.0;
        double cx = j * q + p / 2.0;
        int cell_row = std::min(static_cast<int>(cy * side / box.h), side - 1);
        int cell_col = std::min(static_cast<int>(cx * side / box.w), side - 1);
        targets.push_back(
            CellTarget{i * per_axis + j, level_offset + (cell_row * side + cell_col) * n});
      }
    }
    level_offset += side * side * n;
  }

  Eigen::VectorXd pooled(cfg.pyramid.feature_dim(n));
  bool found = false;
  FrameResult best;
  long best_disp = 0;
  for (const BoundingBox& cand : candidates) {
    const int off_row = cand.y - window.y;
    const int off_col = cand.x - window.x;
    pooled.setZero();
    for (const CellTarget& t : targets) {
      const int i = t.patch / per_axis;
      const int j = t.patch % per_axis;
      const int col =
          (off_row + i * q) / cs * cols_per_row + (off_col + j * q) / cs;
      auto cell = pooled.segment(t.base, n);
      cell = cell.cwiseMax(codes.data.col(col));
    }
    double score = lssvm_predict(state.model, pooled);
    long dx = cand.x - box.x;
    long dy = cand.y - box.y;
    long disp = dx * dx + dy * dy;
    if (!found || score > best.score || (score == best.score && disp < best_disp)) {
      best = FrameResult{cand, score};
      best_disp = disp;
      found = true;
    }
  }
  if (!found) return std::nullopt;
  return best;
}

}  // namespace

FrameResult detect(const GrayFrame& frame, const TrackState& state, const TrackerConfig& cfg,
                   std::optional<double> st_override) {
  if (state.model.w.size() == 0) throw std::runtime_error("detect called before training");

  std::optional<double> st = st_override;
  if (!st && cfg.encoder.method == EncoderMethod::kSoftThreshold) {
    PatchMatrix window =
        window_patches(frame, state.current_box, cfg.search_radius_train, state.grid);
    st = st_threshold(state.dict, window.data, cfg.encoder.st_fraction);
  }

  std::vector<BoundingBox> candidates =
      sample_candidates(state.current_box, cfg.search_radius_track, cfg.candidate_stride);

  // empty cells can only appear when the patch grid under-covers the box;
  // the shared path assumes every cell is hit, so require full coverage
  const int p = state.grid.patch_size;
  bool cells_covered = state.current_box.w >= p && state.current_box.h >= p;
  if (cells_covered) {
    if (auto fast = detect_shared_window(frame, state, cfg, candidates, st)) return *fast;
  }

  bool found = false;
  FrameResult best;
  long best_disp = 0;
  for (const BoundingBox& cand : candidates) {
    if (!grid_fits(cand, frame, state.grid)) continue;
    double score = lssvm_predict(state.model, region_feature(frame, cand, state, cfg, st));
    long dx = cand.x - state.current_box.x;
    long dy = cand.y - state.current_box.y;
    long disp = dx * dx + dy * dy;
    if (!found || score > best.score || (score == best.score && disp < best_disp)) {
      best = FrameResult{cand, score};
      best_disp = disp;
      found = true;
    }
  }
  if (!found) throw std::runtime_error("no candidate admits a patch grid");
  return best;
}

std::vector<LabeledFeature> gather_training_samples(const GrayFrame& frame,
                                                    const BoundingBox& est_box,
                                                    const TrackState& state,
                                                    const TrackerConfig& cfg, Rng& rng,
                                                    std::optional<double> st_override) {
  if (cfg.jitter_positives < 0 || cfg.jitter_positives > 8) {
    throw std::runtime_error("jitter_positives must be in [0, 8]");
  }
  std::vector<LabeledFeature> samples;
  samples.emplace_back(region_feature(frame, est_box, state, cfg, st_override), +1);
  for (int i = 0; i < cfg.jitter_positives; ++i) {
    BoundingBox shifted{est_box.x + kJitterOffsets[i][0], est_box.y + kJitterOffsets[i][1],
                        est_box.w, est_box.h};
    if (!grid_fits(shifted, frame, state.grid)) continue;
    samples.emplace_back(region_feature(frame, shifted, state, cfg, st_override), +1);
  }

  std::vector<BoundingBox> pool;
  for (const BoundingBox& cand :
       sample_candidates(est_box, cfg.search_radius_train, cfg.candidate_stride)) {
    if (vor(cand, est_box) >= cfg.neg_vor_max) continue;
    if (!grid_fits(cand, frame, state.grid)) continue;
    pool.push_back(cand);
  }
  if (pool.empty()) throw std::runtime_error("cannot find any valid negative box");

  // Draw without replacement; a short pool is used whole.
  std::vector<BoundingBox> negatives;
  if (static_cast<int>(pool.size()) <= cfg.negatives_per_frame) {
    negatives = pool;
  } else {
    for (int i = 0; i < cfg.negatives_per_frame; ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
      negatives.push_back(pool[static_cast<std::size_t>(i)]);
    }
  }
  for (const BoundingBox& neg : negatives) {
    samples.emplace_back(region_feature(frame, neg, state, cfg, st_override), -1);
  }
  return samples;
}

namespace {

std::optional<double> frame_st_threshold(const GrayFrame& frame, const TrackState& state,
                                         const TrackerConfig& cfg) {
  if (cfg.encoder.method != EncoderMethod::kSoftThreshold) return std::nullopt;
  PatchMatrix window =
      window_patches(frame, state.current_box, cfg.search_radius_train, state.grid);
  return st_threshold(state.dict, window.data, cfg.encoder.st_fraction);
}

void run_dictionary_update(const GrayFrame& frame, TrackState& state, const TrackerConfig& cfg,
                           double lambda) {
  PatchMatrix window =
      window_patches(frame, state.current_box, cfg.search_radius_train, state.grid);
  const Eigen::Index total = window.data.cols();
  for (Eigen::Index start = 0; start < total; start += cfg.odl_batch) {
    Eigen::Index count = std::min<Eigen::Index>(cfg.odl_batch, total - start);
    odl_step(state.dict, state.odl, window.data.middleCols(start, count), lambda);
  }
}

// Detected-region code weights feed the appearance-change trigger.
bool observe_and_check_trigger(const GrayFrame& frame, TrackState& state,
                               const TrackerConfig& cfg, std::optional<double> st) {
  PatchMatrix patches =
      contrast_normalize(extract_patches(frame, state.current_box, state.grid));
  CodeMatrix codes = encode(state.dict, patches, cfg.encoder, st);
  return should_update(state.policy, basis_weights(codes.data));
}

}  // namespace

namespace {

void validate_config(const TrackerConfig& cfg) {
  if (cfg.search_radius_track <= 0 || cfg.search_radius_train <= 0) {
    throw std::runtime_error("search radii must be > 0");
  }
  if (cfg.candidate_stride < 1) throw std::runtime_error("candidate stride must be >= 1");
  if (cfg.retrain_every < 1) throw std::runtime_error("retrain interval must be >= 1");
  if (cfg.neg_vor_max < 0.0 || cfg.neg_vor_max >= 1.0) {
    throw std::runtime_error("neg_vor_max must lie in [0, 1)");
  }
  if (cfg.dict_size < 1) throw std::runtime_error("dictionary size must be >= 1");
  if (cfg.odl_batch < 1) throw std::runtime_error("odl batch size must be >= 1");
}

}  // namespace

std::vector<FrameResult> track_sequence(const Sequence& seq, const BoundingBox& init_box,
                                        const TrackerConfig& cfg, TrackState* final_state) {
  if (seq.frames.empty()) throw std::runtime_error("empty sequence");
  if (!init_box.valid()) throw std::runtime_error("invalid initial box");
  validate_config(cfg);

  TrackState state;
  state.grid = cfg.grid ? *cfg.grid : PatchGridSpec::for_target(init_box.w, init_box.h);
  state.current_box = init_box;
  state.policy.overlap_threshold = cfg.overlap_threshold;
  state.reservoir = Reservoir(cfg.head_keep, cfg.tail_keep);

  const GrayFrame& first = seq.frames.front();
  if (!grid_fits(init_box, first, state.grid)) {
    throw std::runtime_error("initial box does not admit a patch grid");
  }

  const int patch_dim = state.grid.patch_size * state.grid.patch_size;
  const double lambda = cfg.dict_lambda > 0 ? cfg.dict_lambda : default_dict_lambda(patch_dim);
  Rng sample_rng(cfg.seed + 1);
  ClassifierStats stats;

  std::vector<FrameResult> results;
  results.reserve(seq.frames.size());

  // Frame 1: learn the dictionary, train a provisional model on this frame's
  // samples alone.
  try {
    PatchMatrix window = window_patches(first, init_box, cfg.search_radius_train, state.grid);
    if (cfg.dict_in) {
      state.dict = load_dictionary(*cfg.dict_in);
      if (state.dict.dim() != patch_dim) {
        throw std::runtime_error("dictionary dimension " + std::to_string(state.dict.dim()) +
                                 " does not match patch size " +
                                 std::to_string(state.grid.patch_size));
      }
      state.odl.code_cov = Eigen::MatrixXd::Zero(state.dict.size(), state.dict.size());
      state.odl.cross_cov = Eigen::MatrixXd::Zero(state.dict.dim(), state.dict.size());
      state.odl.batch_size = cfg.odl_batch;
    } else {
      std::tie(state.dict, state.odl) = init_dictionary(
          cfg.dict_method, window, cfg.dict_size, cfg.dict_epochs, lambda, cfg.seed, cfg.odl_batch);
    }

    std::optional<double> st;
    if (cfg.encoder.method == EncoderMethod::kSoftThreshold) {
      st = st_threshold(state.dict, window.data, cfg.encoder.st_fraction);
    }
    std::vector<LabeledFeature> samples =
        gather_training_samples(first, init_box, state, cfg, sample_rng, st);
    stats.add(samples);
    state.reservoir.push(1, std::move(samples));
    state.model = stats.train(cfg.gamma, cfg.bias_verbatim);
    state.frame_index = 1;
    results.push_back(
        FrameResult{init_box, lssvm_predict(state.model, region_feature(first, init_box, state, cfg, st))});
  } catch (const std::exception& e) {
    throw std::runtime_error("frame 1: " + std::string(e.what()));
  }

  int frames_since_retrain = 0;
  for (int i = 1; i < seq.size(); ++i) {
    const int frame_no = i + 1;
    const GrayFrame& frame = seq.frames[static_cast<std::size_t>(i)];
    try {
      std::optional<double> st = frame_st_threshold(frame, state, cfg);

      FrameResult result;
      if (frame_no == 2 && cfg.use_truth_frame2 && seq.truth && seq.truth->size() >= 2) {
        BoundingBox gt = (*seq.truth)[1];
        result = FrameResult{gt, lssvm_predict(state.model, region_feature(frame, gt, state, cfg, st))};
      } else {
        result = detect(frame, state, cfg, st);
      }
      state.current_box = result.box;
      state.frame_index = frame_no;

      std::vector<LabeledFeature> samples =
          gather_training_samples(frame, result.box, state, cfg, sample_rng, st);
      stats.add(samples);
      std::vector<LabeledFeature> evicted = state.reservoir.push(frame_no, std::move(samples));
      stats.remove(evicted);

      if (frame_no == 2) {
        // the initial model uses the first two labelled frames
        state.model = stats.train(cfg.gamma, cfg.bias_verbatim);
        frames_since_retrain = 0;
      } else if (++frames_since_retrain >= cfg.retrain_every) {
        state.model = stats.train(cfg.gamma, cfg.bias_verbatim);
        frames_since_retrain = 0;
      }

      switch (cfg.dict_update) {
        case DictUpdateMode::kOff:
          break;
        case DictUpdateMode::kTriggered: {
          bool fire = observe_and_check_trigger(frame, state, cfg, st);
          if (fire && frame_no > 2) run_dictionary_update(frame, state, cfg, lambda);
          break;
        }
        case DictUpdateMode::kAlways:
          if (frame_no > 2) run_dictionary_update(frame, state, cfg, lambda);
          break;
      }
      results.push_back(result);
    } catch (const std::exception& e) {
      throw std::runtime_error("frame " + std::to_string(frame_no) + ": " + e.what());
    }
  }
  if (final_state) *final_state = std::move(state);
  return results;
}

void write_trajectory_csv(const std::filesystem::path& file,
                          const std::vector<FrameResult>& trajectory) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write trajectory: " + file.string());
  out << "frame,x,y,w,h,score\n";
  char buf[128];
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const FrameResult& r = trajectory[i];
    std::snprintf(buf, sizeof(buf), "%zu,%d,%d,%d,%d,%.6f\n", i + 1, r.box.x, r.box.y, r.box.w,
                  r.box.h, r.score);
    out << buf;
  }
}

std::vector<FrameResult> read_trajectory_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open trajectory: " + file.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("frame,", 0) != 0) {
    throw std::runtime_error("missing trajectory header in " + file.string());
  }
  std::vector<FrameResult> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    FrameResult r;
    int frame;
    char c[5];
    std::istringstream ss(line);
    if (!(ss >> frame >> c[0] >> r.box.x >> c[1] >> r.box.y >> c[2] >> r.box.w >> c[3] >>
          r.box.h >> c[4] >> r.score)) {
      throw std::runtime_error("bad trajectory line: " + line);
    }
    out.push_back(r);
  }
  if (out.empty()) throw std::runtime_error("empty trajectory: " + file.string());
  return out;
}

}  // namespace flt
