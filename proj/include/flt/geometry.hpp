#pragma once

#include <algorithm>

namespace flt {

// Axis-aligned box with 0-based top-left corner. Boxes may extend past the
// frame; use sites clip them first.
struct BoundingBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool valid() const { return w > 0 && h > 0; }
  double center_x() const { return x + w / 2.0; }
  double center_y() const { return y + h / 2.0; }

  bool operator==(const BoundingBox&) const = default;
};

// Intersection with [0, frame_w) x [0, frame_h). The result can be empty
// (w or h <= 0); callers must check valid().
inline BoundingBox clip_to_frame(const BoundingBox& b, int frame_w, int frame_h) {
  int x0 = std::max(b.x, 0);
  int y0 = std::max(b.y, 0);
  int x1 = std::min(b.x + b.w, frame_w);
  int y1 = std::min(b.y + b.h, frame_h);
  return BoundingBox{x0, y0, x1 - x0, y1 - y0};
}

// Grow a box by `margin` pixels on every side.
inline BoundingBox inflate(const BoundingBox& b, int margin) {
  return BoundingBox{b.x - margin, b.y - margin, b.w + 2 * margin, b.h + 2 * margin};
}

}  // namespace flt
