// Command-line front end: synth, track, eval, learn-dict, sweep.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "flt/dictionary.hpp"
#include "flt/lasso.hpp"
#include "flt/metrics.hpp"
#include "flt/sequence.hpp"
#include "flt/tracker.hpp"

namespace {

flt::BoundingBox parse_box(const std::string& text) {
  return flt::parse_truth_line(text);
}

std::vector<int> parse_levels(const std::string& text, char sep = ',') {
  std::vector<int> levels;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      levels.push_back(std::stoi(cur));
      cur.clear();
    }
  };
  for (char c : text) {
    if (c == sep || c == '+') {
      flush();
    } else {
      cur.push_back(c);
    }
  }
  flush();
  if (levels.empty()) throw std::runtime_error("empty pyramid level list");
  return levels;
}

flt::EncoderMethod parse_encoder(const std::string& name) {
  static const std::map<std::string, flt::EncoderMethod> table = {
      {"st", flt::EncoderMethod::kSoftThreshold},
      {"tk", flt::EncoderMethod::kTriangle},
      {"sa", flt::EncoderMethod::kSoftAssign},
      {"lsa", flt::EncoderMethod::kLocalSoftAssign},
      {"sc", flt::EncoderMethod::kSparseCoding},
  };
  auto it = table.find(name);
  if (it == table.end()) throw std::runtime_error("unknown encoder: " + name);
  return it->second;
}

flt::DictMethod parse_dict_method(const std::string& name) {
  static const std::map<std::string, flt::DictMethod> table = {
      {"odl", flt::DictMethod::kOdl},
      {"kmeans", flt::DictMethod::kKmeans},
      {"rs", flt::DictMethod::kRandomSample},
  };
  auto it = table.find(name);
  if (it == table.end()) throw std::runtime_error("unknown dictionary method: " + name);
  return it->second;
}

flt::DictUpdateMode parse_update_mode(const std::string& name) {
  static const std::map<std::string, flt::DictUpdateMode> table = {
      {"off", flt::DictUpdateMode::kOff},
      {"triggered", flt::DictUpdateMode::kTriggered},
      {"always", flt::DictUpdateMode::kAlways},
  };
  auto it = table.find(name);
  if (it == table.end()) throw std::runtime_error("unknown dictionary update mode: " + name);
  return it->second;
}

// Options shared by track and sweep.
struct TrackOptions {
  std::string seq_dir;
  std::string init_text;
  std::string truth_file;
  bool truth_one_based = false;
  std::string encoder = "st";
  std::string dict_update = "triggered";
  std::string dict_method = "odl";
  int dict_size = 100;
  int dict_epochs = 3;
  double dict_lambda = 0.0;
  std::string levels = "1,2,3";
  int patch = 0;
  int stride = 0;
  std::uint64_t seed = 0;
  double gamma = 10.0;
  double st_fraction = 0.25;
  double beta = 10.0;
  int knn = 10;
  double sc_lambda = 0.25;
  bool lsa_local_denominator = false;
  bool bias_verbatim = false;
  bool gt_frame2 = false;
  int radius_track = 30;
  int radius_train = 60;
  int candidate_stride = 2;
  int retrain_every = 4;
  int negatives = 40;
  double neg_vor_max = 0.3;
  int jitter_positives = 4;
  double overlap_threshold = 0.9;
  std::string dict_in;
  std::string dict_out;
};

void add_track_options(CLI::App* cmd, TrackOptions& o) {
  cmd->add_option("--seq", o.seq_dir, "frame directory (img0001.pgm ...)")->required();
  cmd->add_option("--init", o.init_text, "initial box \"x,y,w,h\"")->required();
  cmd->add_option("--truth", o.truth_file, "ground-truth file");
  cmd->add_flag("--truth-one-based", o.truth_one_based, "truth coordinates start at 1");
  cmd->add_option("--encoder", o.encoder, "st|tk|sa|lsa|sc");
  cmd->add_option("--dict-update", o.dict_update, "off|triggered|always");
  cmd->add_option("--dict-method", o.dict_method, "odl|kmeans|rs");
  cmd->add_option("--dict-size", o.dict_size, "number of bases");
  cmd->add_option("--dict-epochs", o.dict_epochs, "offline learning epochs");
  cmd->add_option("--dict-lambda", o.dict_lambda, "sparsity weight (default 1.2/sqrt(p^2))");
  cmd->add_option("--levels", o.levels, "pyramid sides, e.g. 1,2,3");
  cmd->add_option("--patch", o.patch, "patch size (default by target size)");
  cmd->add_option("--stride", o.stride, "patch step (default by target size)");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--gamma", o.gamma, "LS-SVM trade-off");
  cmd->add_option("--st-fraction", o.st_fraction, "soft-threshold fraction");
  cmd->add_option("--beta", o.beta, "soft-assignment smoothing");
  cmd->add_option("--knn", o.knn, "LSA neighborhood size");
  cmd->add_option("--sc-lambda", o.sc_lambda, "sparse-coding lambda");
  cmd->add_flag("--lsa-local-denominator", o.lsa_local_denominator,
                "normalize LSA over the k neighbors only");
  cmd->add_flag("--bias-verbatim", o.bias_verbatim, "use the uncorrected bias formula");
  cmd->add_flag("--gt-frame2", o.gt_frame2, "take frame 2 from ground truth when available");
  cmd->add_option("--radius-track", o.radius_track, "detection search radius");
  cmd->add_option("--radius-train", o.radius_train, "training search radius");
  cmd->add_option("--candidate-stride", o.candidate_stride, "candidate grid step");
  cmd->add_option("--retrain-every", o.retrain_every, "frames between retrains");
  cmd->add_option("--negatives", o.negatives, "negative samples per frame");
  cmd->add_option("--neg-vor-max", o.neg_vor_max, "max overlap of a negative");
  cmd->add_option("--jitter-positives", o.jitter_positives, "shifted positive copies");
  cmd->add_option("--overlap-threshold", o.overlap_threshold, "dictionary update trigger");
  cmd->add_option("--dict-in", o.dict_in, "load dictionary (FTDICT01) instead of learning");
  cmd->add_option("--dict-out", o.dict_out, "save the final dictionary (FTDICT01)");
}

flt::TrackerConfig make_config(const TrackOptions& o) {
  flt::TrackerConfig cfg;
  cfg.encoder.method = parse_encoder(o.encoder);
  cfg.encoder.st_fraction = o.st_fraction;
  cfg.encoder.beta = o.beta;
  cfg.encoder.knn = o.knn;
  cfg.encoder.sc_lambda = o.sc_lambda;
  cfg.encoder.lsa_local_denominator = o.lsa_local_denominator;
  cfg.dict_update = parse_update_mode(o.dict_update);
  cfg.dict_method = parse_dict_method(o.dict_method);
  cfg.dict_size = o.dict_size;
  cfg.dict_epochs = o.dict_epochs;
  cfg.dict_lambda = o.dict_lambda;
  cfg.pyramid.levels = parse_levels(o.levels);
  if (o.patch > 0) {
    cfg.grid = flt::PatchGridSpec{o.patch, o.stride > 0 ? o.stride : o.patch / 2};
  }
  cfg.seed = o.seed;
  cfg.gamma = o.gamma;
  cfg.bias_verbatim = o.bias_verbatim;
  cfg.use_truth_frame2 = o.gt_frame2;
  cfg.search_radius_track = o.radius_track;
  cfg.search_radius_train = o.radius_train;
  cfg.candidate_stride = o.candidate_stride;
  cfg.retrain_every = o.retrain_every;
  cfg.negatives_per_frame = o.negatives;
  cfg.neg_vor_max = o.neg_vor_max;
  cfg.jitter_positives = o.jitter_positives;
  cfg.overlap_threshold = o.overlap_threshold;
  if (!o.dict_in.empty()) cfg.dict_in = o.dict_in;
  return cfg;
}

std::vector<flt::BoundingBox> boxes_of(const std::vector<flt::FrameResult>& results) {
  std::vector<flt::BoundingBox> boxes;
  boxes.reserve(results.size());
  for (const auto& r : results) boxes.push_back(r.box);
  return boxes;
}

std::vector<flt::BoundingBox> load_truth_file(const std::string& file, bool one_based) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open truth file: " + file);
  std::vector<flt::BoundingBox> truth;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    flt::BoundingBox b = flt::parse_truth_line(line);
    if (one_based) {
      b.x -= 1;
      b.y -= 1;
    }
    truth.push_back(b);
  }
  return truth;
}

int run_track(const TrackOptions& o, const std::string& out_file) {
  flt::TrackerConfig cfg = make_config(o);
  std::optional<std::filesystem::path> truth_path;
  if (!o.truth_file.empty()) truth_path = o.truth_file;
  flt::Sequence seq = flt::load_sequence(o.seq_dir, truth_path, o.truth_one_based);
  flt::BoundingBox init = parse_box(o.init_text);

  flt::TrackState final_state;
  std::vector<flt::FrameResult> results = flt::track_sequence(seq, init, cfg, &final_state);
  flt::write_trajectory_csv(out_file, results);
  std::printf("tracked %zu frames -> %s\n", results.size(), out_file.c_str());
  if (!o.dict_out.empty()) {
    flt::save_dictionary(o.dict_out, final_state.dict);
    std::printf("wrote dictionary to %s\n", o.dict_out.c_str());
  }
  if (seq.truth) {
    flt::EvalReport report = flt::evaluate(boxes_of(results), *seq.truth);
    std::printf("mean_vor=%.6f mean_cle=%.6f\n", report.mean_vor, report.mean_cle);
  }
  return 0;
}

int run_sweep(const TrackOptions& base, const std::string& param, std::string values_text,
              const std::string& out_file) {
  if (base.truth_file.empty()) throw std::runtime_error("sweep requires --truth");

  std::vector<std::string> values;
  if (values_text.empty()) {
    if (param == "dict-size") values_text = "64/100/144/196";
    else if (param == "levels") values_text = "1/1,2/1,2,3/1,2,3,4";
    else if (param == "encoder") values_text = "st/tk/sa/lsa/sc";
    else if (param == "dict-method") values_text = "odl/kmeans/rs";
    else throw std::runtime_error("unknown sweep parameter: " + param);
  }
  std::string cur;
  for (char c : values_text + "/") {
    if (c == '/') {
      if (!cur.empty()) values.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }

  std::ofstream out(out_file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write sweep output: " + out_file);
  out << "param,value,mean_vor,mean_cle\n";
  for (const std::string& value : values) {
    TrackOptions o = base;
    if (param == "dict-size") o.dict_size = std::stoi(value);
    else if (param == "levels") o.levels = value;
    else if (param == "encoder") o.encoder = value;
    else if (param == "dict-method") o.dict_method = value;
    else throw std::runtime_error("unknown sweep parameter: " + param);

    flt::TrackerConfig cfg = make_config(o);
    flt::Sequence seq = flt::load_sequence(o.seq_dir, std::filesystem::path(o.truth_file),
                                           o.truth_one_based);
    flt::BoundingBox init = parse_box(o.init_text);
    std::vector<flt::FrameResult> results = flt::track_sequence(seq, init, cfg);
    flt::EvalReport report = flt::evaluate(boxes_of(results), *seq.truth);

    std::string label = value;
    for (char& c : label) {
      if (c == ',') c = '+';
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s,%s,%.6f,%.6f\n", param.c_str(), label.c_str(),
                  report.mean_vor, report.mean_cle);
    out << buf;
    std::printf("%s", buf);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"online feature-learning tracker"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic sequence");
  flt::SynthSpec synth_spec;
  std::string synth_out;
  int start_x = -1, start_y = -1;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--width", synth_spec.frame_w, "frame width");
  synth->add_option("--height", synth_spec.frame_h, "frame height");
  synth->add_option("--frames", synth_spec.n_frames, "frame count");
  synth->add_option("--target-size", synth_spec.target_size, "target side in pixels");
  synth->add_option("--vx", synth_spec.velocity_x, "x velocity, pixels/frame");
  synth->add_option("--vy", synth_spec.velocity_y, "y velocity, pixels/frame");
  synth->add_option("--jitter", synth_spec.jitter_sigma, "position jitter sigma");
  synth->add_option("--noise", synth_spec.noise_sigma, "background noise sigma");
  synth->add_option("--seed", synth_spec.seed, "random seed");
  synth->add_option("--start-x", start_x, "initial x (default centers the path)");
  synth->add_option("--start-y", start_y, "initial y (default centers the path)");

  // track
  auto* track = app.add_subcommand("track", "run the tracker over a sequence");
  TrackOptions track_opts;
  std::string track_out;
  add_track_options(track, track_opts);
  track->add_option("--out", track_out, "trajectory CSV")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "score a trajectory against ground truth");
  std::string eval_traj, eval_truth, eval_out;
  bool eval_one_based = false;
  eval->add_option("--traj", eval_traj, "trajectory CSV from track")->required();
  eval->add_option("--truth", eval_truth, "ground-truth file")->required();
  eval->add_option("--out", eval_out, "per-frame report CSV")->required();
  eval->add_flag("--truth-one-based", eval_one_based, "truth coordinates start at 1");

  // learn-dict
  auto* learn = app.add_subcommand("learn-dict", "learn a dictionary from a sequence frame");
  std::string ld_seq, ld_out, ld_method = "odl", ld_region;
  int ld_frame = 1, ld_size = 100, ld_epochs = 10, ld_patch = 8, ld_stride = 4;
  double ld_lambda = 0.0;
  std::uint64_t ld_seed = 0;
  learn->add_option("--seq", ld_seq, "frame directory")->required();
  learn->add_option("--out", ld_out, "output dictionary file (FTDICT01)")->required();
  learn->add_option("--method", ld_method, "odl|kmeans|rs");
  learn->add_option("--frame", ld_frame, "frame to learn from (1-based)");
  learn->add_option("--region", ld_region, "restrict to box \"x,y,w,h\"");
  learn->add_option("--dict-size", ld_size, "number of bases");
  learn->add_option("--epochs", ld_epochs, "learning epochs");
  learn->add_option("--lambda", ld_lambda, "sparsity weight (default 1.2/sqrt(p^2))");
  learn->add_option("--patch", ld_patch, "patch size");
  learn->add_option("--stride", ld_stride, "patch step");
  learn->add_option("--seed", ld_seed, "random seed");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "track with one parameter varied");
  TrackOptions sweep_opts;
  std::string sweep_param, sweep_values, sweep_out;
  add_track_options(sweep, sweep_opts);
  sweep->add_option("--param", sweep_param, "dict-size|levels|encoder|dict-method")->required();
  sweep->add_option("--values", sweep_values, "values separated by '/'");
  sweep->add_option("--out", sweep_out, "summary CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      if (start_x >= 0) synth_spec.start_x = start_x;
      if (start_y >= 0) synth_spec.start_y = start_y;
      flt::Sequence seq = flt::synth_sequence(synth_spec);
      flt::save_sequence(synth_out, seq);
      std::printf("wrote %d frames to %s\n", seq.size(), synth_out.c_str());
      return 0;
    }
    if (track->parsed()) {
      return run_track(track_opts, track_out);
    }
    if (eval->parsed()) {
      std::vector<flt::FrameResult> traj = flt::read_trajectory_csv(eval_traj);
      std::vector<flt::BoundingBox> truth = load_truth_file(eval_truth, eval_one_based);
      flt::EvalReport report = flt::evaluate(boxes_of(traj), truth);
      flt::write_report_csv(eval_out, report);
      std::printf("mean_vor=%.6f mean_cle=%.6f\n", report.mean_vor, report.mean_cle);
      return 0;
    }
    if (learn->parsed()) {
      flt::Sequence seq = flt::load_sequence(ld_seq);
      if (ld_frame < 1 || ld_frame > seq.size()) {
        throw std::runtime_error("frame " + std::to_string(ld_frame) + " out of range");
      }
      const flt::GrayFrame& frame = seq.frames[static_cast<std::size_t>(ld_frame - 1)];
      flt::BoundingBox region{0, 0, frame.width, frame.height};
      if (!ld_region.empty()) region = parse_box(ld_region);
      flt::PatchGridSpec grid{ld_patch, ld_stride};
      flt::PatchMatrix patches =
          flt::contrast_normalize(flt::extract_patches(frame, region, grid));
      double lambda = ld_lambda > 0 ? ld_lambda : flt::default_dict_lambda(ld_patch * ld_patch);
      auto [dict, state] = flt::init_dictionary(parse_dict_method(ld_method), patches, ld_size,
                                                ld_epochs, lambda, ld_seed);
      flt::save_dictionary(ld_out, dict);
      std::printf("wrote %dx%d dictionary to %s\n", dict.dim(), dict.size(), ld_out.c_str());
      return 0;
    }
    if (sweep->parsed()) {
      return run_sweep(sweep_opts, sweep_param, sweep_values, sweep_out);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "flt: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
