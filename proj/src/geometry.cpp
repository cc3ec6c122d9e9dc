// SPDX-License-Identifier: Apache-2.0
#include "symscene/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "symscene/error.hpp"

namespace symscene {

namespace {

constexpr double kContainmentSlack = 1e-9;

std::string to_string(const BoundingBox& b) {
  return "(" + std::to_string(b.x1) + ", " + std::to_string(b.y1) + ", " + std::to_string(b.x2) +
         ", " + std::to_string(b.y2) + ")";
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Returns (lo, hi) of [lo_edge, hi_edge] relative to [ref_lo, ref_hi].
std::pair<double, double> relative_axis(double lo_edge, double hi_edge, double ref_lo,
                                        double ref_hi) {
  const double extent = ref_hi - ref_lo;
  if (extent <= 0) return {0.0, 1.0};
  return {clamp01((lo_edge - ref_lo) / extent), clamp01((hi_edge - ref_lo) / extent)};
}

}  // namespace

void validate(const BoundingBox& b) {
  if (!std::isfinite(b.x1) || !std::isfinite(b.y1) || !std::isfinite(b.x2) ||
      !std::isfinite(b.y2)) {
    throw InvalidInput("box has non-finite coordinate");
  }
  if (b.x1 > b.x2 || b.y1 > b.y2) throw InvalidInput("box corners out of order " + to_string(b));
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  validate(a);
  validate(b);
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0) return 0.0;
  return std::min(1.0, inter / uni);
}

std::vector<std::size_t> nms(std::span<const ScoredBox> dets, const NmsOptions& opts) {
  if (!(opts.iou_threshold >= 0.0 && opts.iou_threshold <= 1.0)) {
    throw InvalidInput("iou_threshold must lie in [0, 1]");
  }
  for (const auto& d : dets) {
    validate(d.box);
    if (!std::isfinite(d.score)) throw InvalidInput("nms score is not finite");
  }

  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return dets[i].score > dets[j].score;
  });

  std::vector<std::size_t> kept;
  for (std::size_t idx : order) {
    const auto& cand = dets[idx];
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
      if (opts.per_group && dets[k].group != cand.group) return false;
      return iou(dets[k].box, cand.box) > opts.iou_threshold;
    });
    if (!suppressed) kept.push_back(idx);
  }
  return kept;
}

NormalizedBox normalize_global(const BoundingBox& b, double image_w, double image_h) {
  if (!(image_w > 0) || !(image_h > 0) || !std::isfinite(image_w) || !std::isfinite(image_h)) {
    throw InvalidInput("image dimensions must be positive");
  }
  validate(b);
  return {std::clamp(b.x1, 0.0, image_w) / image_w, std::clamp(b.y1, 0.0, image_h) / image_h,
          std::clamp(b.x2, 0.0, image_w) / image_w, std::clamp(b.y2, 0.0, image_h) / image_h};
}

BoundingBox enveloping_box(std::span<const BoundingBox> boxes) {
  if (boxes.empty()) throw InvalidInput("enveloping_box of an empty box list");
  BoundingBox env = boxes.front();
  for (const auto& b : boxes) {
    validate(b);
    env.x1 = std::min(env.x1, b.x1);
    env.y1 = std::min(env.y1, b.y1);
    env.x2 = std::max(env.x2, b.x2);
    env.y2 = std::max(env.y2, b.y2);
  }
  return env;
}

NormalizedBox normalize_relative(const BoundingBox& b, const BoundingBox& env) {
  validate(b);
  validate(env);
  const double slack =
      kContainmentSlack * std::max({1.0, std::abs(env.x1), std::abs(env.x2), std::abs(env.y1),
                                    std::abs(env.y2)});
  if (b.x1 < env.x1 - slack || b.y1 < env.y1 - slack || b.x2 > env.x2 + slack ||
      b.y2 > env.y2 + slack) {
    throw InvalidInput("box " + to_string(b) + " lies outside envelope " + to_string(env));
  }
  const auto [u1, u2] = relative_axis(b.x1, b.x2, env.x1, env.x2);
  const auto [v1, v2] = relative_axis(b.y1, b.y2, env.y1, env.y2);
  return {u1, v1, u2, v2};
}

}  // namespace symscene
