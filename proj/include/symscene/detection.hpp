// SPDX-License-Identifier: Apache-2.0
//
// Detector output model and the post-processing applied before encoding:
// score threshold, NMS, top-k class/attribute selection.
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "symscene/geometry.hpp"

namespace symscene {

inline constexpr std::size_t kDefaultNumClasses = 1600;
inline constexpr std::size_t kDefaultNumAttributes = 400;

struct Detection {
  BoundingBox box;
  std::vector<double> class_scores;
  std::vector<double> attribute_scores;

  /// Max class score; the value thresholded and ranked by select_objects.
  double confidence() const;
};

/// Throws InvalidInput on a bad box, wrong score-vector length or a score
/// outside [0, 1].
void validate(const Detection& d, std::size_t num_classes, std::size_t num_attributes);

class Vocabulary {
 public:
  Vocabulary(std::vector<std::string> class_names, std::vector<std::string> attribute_names);

  /// Two label files, one name per line. Blank lines are skipped.
  static Vocabulary load(const std::filesystem::path& classes,
                         const std::filesystem::path& attributes);

  const std::vector<std::string>& class_names() const { return class_names_; }
  const std::vector<std::string>& attribute_names() const { return attribute_names_; }
  std::size_t num_classes() const { return class_names_.size(); }
  std::size_t num_attributes() const { return attribute_names_.size(); }

 private:
  std::vector<std::string> class_names_;
  std::vector<std::string> attribute_names_;
};

struct Scene {
  std::string id;
  double image_w = 0;
  double image_h = 0;
  std::vector<Detection> detections;
  std::optional<std::vector<std::string>> captions;
};

struct RankedScore {
  std::size_t index = 0;
  double score = 0;

  friend bool operator==(const RankedScore&, const RankedScore&) = default;
};

/// Descending by score, ties by ascending index.
using TopK = std::vector<RankedScore>;

/// The k largest entries of `scores`. Throws InvalidInput if k == 0 or
/// k > scores.size().
TopK top_k(std::span<const double> scores, std::size_t k);

/// Scores of `t` divided by their sum; uniform 1/k when they sum to zero.
std::vector<double> normalized_topk_weights(const TopK& t);

struct SelectOptions {
  double score_threshold = 0.2;
  double iou_threshold = 0.5;
  std::size_t max_objects = 100;
  bool class_aware_nms = false;
};

/// Indices into scene.detections that survive thresholding (confidence >
/// score_threshold), NMS and truncation, in descending confidence order.
std::vector<std::size_t> select_object_indices(const Scene& scene, const SelectOptions& opts);

std::vector<Detection> select_objects(const Scene& scene, const SelectOptions& opts);

}  // namespace symscene
