// SPDX-License-Identifier: Apache-2.0
//
// Axis-aligned boxes in corner format (x1, y1, x2, y2), pixel units.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace symscene {

struct BoundingBox {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Box coordinates as fractions of a reference frame, each in [0, 1].
struct NormalizedBox {
  double u1 = 0, v1 = 0, u2 = 0, v2 = 0;

  friend bool operator==(const NormalizedBox&, const NormalizedBox&) = default;
};

/// Throws InvalidInput unless all coordinates are finite and x1 <= x2, y1 <= y2.
void validate(const BoundingBox& box);

/// Intersection over union. Two zero-area boxes have IoU 0.
double iou(const BoundingBox& a, const BoundingBox& b);

struct ScoredBox {
  BoundingBox box;
  double score = 0;
  int group = 0;  // only consulted by class-aware NMS
};

struct NmsOptions {
  double iou_threshold = 0.5;
  // Suppress only within the same `group`; otherwise class-agnostic.
  bool per_group = false;
};

/// Greedy non-maximum suppression. Boxes are visited by descending score
/// (equal scores: lower input index first); a box is dropped when its IoU with
/// an already kept box exceeds the threshold. Returns kept input indices in
/// visiting order.
std::vector<std::size_t> nms(std::span<const ScoredBox> dets, const NmsOptions& opts = {});

/// Coordinates divided by the image size after clamping the box to the image.
NormalizedBox normalize_global(const BoundingBox& box, double image_w, double image_h);

/// Smallest box containing every input box.
BoundingBox enveloping_box(std::span<const BoundingBox> boxes);

/// Coordinates relative to `envelope`. An envelope axis of zero extent maps the
/// box's min edge to 0 and max edge to 1 along that axis.
NormalizedBox normalize_relative(const BoundingBox& box, const BoundingBox& envelope);

}  // namespace symscene
