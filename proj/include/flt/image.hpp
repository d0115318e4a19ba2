#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace flt {

// Single 8-bit grayscale frame, row-major.
struct GrayFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(int row, int col) const {
    return pixels[static_cast<std::size_t>(row) * width + col];
  }
  std::uint8_t& at(int row, int col) {
    return pixels[static_cast<std::size_t>(row) * width + col];
  }

  bool operator==(const GrayFrame&) const = default;
};

// Reads PGM (P5/P2) directly; PPM (P6/P3) is converted to gray with the ITU
// luma weights 0.299/0.587/0.114, rounded to nearest integer.
GrayFrame read_raster(const std::filesystem::path& file);

// Binary 8-bit PGM (P5), the on-disk format of this project.
void write_pgm(const std::filesystem::path& file, const GrayFrame& frame);

}  // namespace flt
