#include "flt/image.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

namespace flt {

namespace {

// Next whitespace-delimited token, skipping '#' comment lines.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (!std::isspace(c)) {
      tok.push_back(static_cast<char>(c));
      while ((c = in.peek()) != EOF && !std::isspace(c) && c != '#') {
        tok.push_back(static_cast<char>(in.get()));
      }
      return tok;
    }
  }
  return tok;
}

int parse_header_int(std::istream& in, const std::filesystem::path& file, const char* what) {
  std::string tok = next_token(in);
  try {
    std::size_t pos = 0;
    int v = std::stoi(tok, &pos);
    if (pos != tok.size() || v <= 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(file.string() + ": bad " + what + " in raster header");
  }
}

std::uint8_t luma(int r, int g, int b) {
  double y = 0.299 * r + 0.587 * g + 0.114 * b;
  return static_cast<std::uint8_t>(std::lround(y));
}

}  // namespace

GrayFrame read_raster(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open raster file: " + file.string());

  std::string magic = next_token(in);
  bool binary = (magic == "P5" || magic == "P6");
  bool color = (magic == "P6" || magic == "P3");
  if (magic != "P5" && magic != "P2" && magic != "P6" && magic != "P3") {
    throw std::runtime_error(file.string() + ": unsupported raster magic '" + magic + "'");
  }

  GrayFrame frame;
  frame.width = parse_header_int(in, file, "width");
  frame.height = parse_header_int(in, file, "height");
  int maxval = parse_header_int(in, file, "maxval");
  if (maxval != 255) {
    throw std::runtime_error(file.string() + ": only maxval 255 is supported");
  }

  std::size_t count = static_cast<std::size_t>(frame.width) * frame.height;
  std::size_t channels = color ? 3 : 1;
  std::vector<std::uint8_t> raw(count * channels);

  if (binary) {
    in.get();  // single whitespace after maxval
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
      throw std::runtime_error(file.string() + ": truncated raster data");
    }
  } else {
    for (std::size_t i = 0; i < raw.size(); ++i) {
      std::string tok = next_token(in);
      if (tok.empty()) throw std::runtime_error(file.string() + ": truncated raster data");
      int v = std::stoi(tok);
      if (v < 0 || v > maxval) throw std::runtime_error(file.string() + ": sample out of range");
      raw[i] = static_cast<std::uint8_t>(v);
    }
  }

  if (color) {
    frame.pixels.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      frame.pixels[i] = luma(raw[3 * i], raw[3 * i + 1], raw[3 * i + 2]);
    }
  } else {
    frame.pixels = std::move(raw);
  }
  return frame;
}

void write_pgm(const std::filesystem::path& file, const GrayFrame& frame) {
  if (frame.pixels.size() != static_cast<std::size_t>(frame.width) * frame.height) {
    throw std::runtime_error("frame pixel count does not match dimensions");
  }
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write raster file: " + file.string());
  out << "P5\n" << frame.width << " " << frame.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.pixels.data()),
            static_cast<std::streamsize>(frame.pixels.size()));
  if (!out) throw std::runtime_error("write failed: " + file.string());
}

}  // namespace flt
