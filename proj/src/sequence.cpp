#include "flt/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "flt/rng.hpp"

namespace flt {

namespace {

std::string frame_name(int index, const std::string& ext) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "img%04d.%s", index, ext.c_str());
  return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',' || c == '\t' || c == ' ' || c == '\r') {
      if (!cur.empty()) fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) fields.push_back(std::move(cur));
  return fields;
}

int parse_int_field(const std::string& tok) {
  std::size_t pos = 0;
  int v = std::stoi(tok, &pos);
  if (pos != tok.size()) throw std::invalid_argument(tok);
  return v;
}

}  // namespace

BoundingBox parse_truth_line(const std::string& line) {
  std::vector<std::string> fields = split_fields(line);
  if (fields.size() != 4) {
    throw std::runtime_error("truth line has " + std::to_string(fields.size()) +
                             " fields, expected 4: \"" + line + "\"");
  }
  int v[4];
  for (int i = 0; i < 4; ++i) {
    try {
      v[i] = parse_int_field(fields[i]);
    } catch (const std::exception&) {
      throw std::runtime_error("non-integer token \"" + fields[i] + "\" in truth line: \"" + line +
                               "\"");
    }
  }
  if (v[2] <= 0 || v[3] <= 0) {
    throw std::runtime_error("non-positive box size in truth line: \"" + line + "\"");
  }
  return BoundingBox{v[0], v[1], v[2], v[3]};
}

Sequence load_sequence(const std::filesystem::path& frame_dir,
                       const std::optional<std::filesystem::path>& truth_path,
                       bool truth_one_based) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(frame_dir)) {
    throw std::runtime_error("missing directory: " + frame_dir.string());
  }

  // Collect imgNNNN.{pgm,ppm} indices, then demand 1..max with no gaps.
  std::vector<std::pair<int, fs::path>> found;
  for (const auto& entry : fs::directory_iterator(frame_dir)) {
    if (!entry.is_regular_file()) continue;
    const fs::path& p = entry.path();
    std::string stem = p.stem().string();
    std::string ext = p.extension().string();
    if (ext != ".pgm" && ext != ".ppm") continue;
    if (stem.size() < 7 || stem.compare(0, 3, "img") != 0) continue;
    std::string digits = stem.substr(3);
    if (!std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(c); }))
      continue;
    found.emplace_back(std::stoi(digits), p);
  }
  if (found.empty()) {
    throw std::runtime_error("no imgNNNN.pgm/.ppm frames in " + frame_dir.string());
  }
  std::sort(found.begin(), found.end());

  int max_index = found.back().first;
  std::vector<const fs::path*> by_index(static_cast<std::size_t>(max_index) + 1, nullptr);
  for (const auto& [idx, p] : found) {
    if (idx >= 1) by_index[static_cast<std::size_t>(idx)] = &p;
  }
  Sequence seq;
  seq.name = frame_dir.filename().string();
  for (int i = 1; i <= max_index; ++i) {
    if (!by_index[static_cast<std::size_t>(i)]) {
      throw std::runtime_error("gap at index " + std::to_string(i) + " in " + frame_dir.string());
    }
    seq.frames.push_back(read_raster(*by_index[static_cast<std::size_t>(i)]));
  }

  if (truth_path) {
    std::ifstream in(*truth_path);
    if (!in) throw std::runtime_error("cannot open truth file: " + truth_path->string());
    std::vector<BoundingBox> truth;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line == "\r") continue;
      try {
        BoundingBox b = parse_truth_line(line);
        if (truth_one_based) {
          b.x -= 1;
          b.y -= 1;
        }
        truth.push_back(b);
      } catch (const std::exception& e) {
        throw std::runtime_error(truth_path->string() + ":" + std::to_string(line_no) + ": " +
                                 e.what());
      }
    }
    if (truth.size() != seq.frames.size()) {
      throw std::runtime_error("truth length " + std::to_string(truth.size()) +
                               " != " + std::to_string(seq.frames.size()) + " frames (" +
                               truth_path->string() + ")");
    }
    seq.truth = std::move(truth);
  }
  return seq;
}

void save_sequence(const std::filesystem::path& dir, const Sequence& seq) {
  std::filesystem::create_directories(dir);
  for (int i = 0; i < seq.size(); ++i) {
    write_pgm(dir / frame_name(i + 1, "pgm"), seq.frames[static_cast<std::size_t>(i)]);
  }
  if (seq.truth) {
    std::ofstream out(dir / "groundtruth.txt", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write truth file in " + dir.string());
    for (const BoundingBox& b : *seq.truth) {
      out << b.x << "," << b.y << "," << b.w << "," << b.h << "\n";
    }
  }
}

Sequence synth_sequence(const SynthSpec& spec) {
  if (spec.n_frames < 1) throw std::runtime_error("n_frames must be >= 1");
  if (spec.target_size < 1 || spec.target_size > std::min(spec.frame_w, spec.frame_h)) {
    throw std::runtime_error("target_size must fit inside the frame");
  }

  int free_x = spec.frame_w - spec.target_size;
  int free_y = spec.frame_h - spec.target_size;
  int travel_x = spec.velocity_x * (spec.n_frames - 1);
  int travel_y = spec.velocity_y * (spec.n_frames - 1);
  int start_x = spec.start_x.value_or((free_x - travel_x) / 2);
  int start_y = spec.start_y.value_or((free_y - travel_y) / 2);

  int margin = static_cast<int>(std::ceil(3.0 * spec.jitter_sigma));
  for (int t = 0; t < spec.n_frames; ++t) {
    int nx = start_x + t * spec.velocity_x;
    int ny = start_y + t * spec.velocity_y;
    if (nx - margin < 0 || ny - margin < 0 || nx + margin > free_x || ny + margin > free_y) {
      throw std::runtime_error("target would exit frame at frame " + std::to_string(t + 1));
    }
  }

  Rng rng(spec.seed);
  int ts = spec.target_size;
  std::vector<std::uint8_t> texture(static_cast<std::size_t>(ts) * ts);
  for (auto& px : texture) px = static_cast<std::uint8_t>(rng.below(256));

  auto clamp_u8 = [](double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  };

  Sequence seq;
  seq.name = "synth";
  std::vector<BoundingBox> truth;
  for (int t = 0; t < spec.n_frames; ++t) {
    int jx = spec.jitter_sigma > 0 ? static_cast<int>(std::lround(rng.gaussian() * spec.jitter_sigma)) : 0;
    int jy = spec.jitter_sigma > 0 ? static_cast<int>(std::lround(rng.gaussian() * spec.jitter_sigma)) : 0;
    int px = std::clamp(start_x + t * spec.velocity_x + jx, 0, free_x);
    int py = std::clamp(start_y + t * spec.velocity_y + jy, 0, free_y);

    GrayFrame frame;
    frame.width = spec.frame_w;
    frame.height = spec.frame_h;
    frame.pixels.resize(static_cast<std::size_t>(spec.frame_w) * spec.frame_h);
    for (auto& pix : frame.pixels) {
      double v = 128.0 + (spec.noise_sigma > 0 ? rng.gaussian() * spec.noise_sigma : 0.0);
      pix = clamp_u8(v);
    }
    for (int r = 0; r < ts; ++r) {
      for (int c = 0; c < ts; ++c) {
        frame.at(py + r, px + c) = texture[static_cast<std::size_t>(r) * ts + c];
      }
    }
    seq.frames.push_back(std::move(frame));
    truth.push_back(BoundingBox{px, py, ts, ts});
  }
  seq.truth = std::move(truth);
  return seq;
}

}  // namespace flt
