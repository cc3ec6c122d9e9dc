// SPDX-License-Identifier: Apache-2.0
//
// JSON-lines readers for scene and ground-truth files, report serialization.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "json.hpp"

#include "symscene/codec.hpp"
#include "symscene/detection.hpp"
#include "symscene/metrics.hpp"

namespace symscene {

/// One scene per line: {image_w, image_h, detections: [{box, class_scores |
/// class_scores_sparse, attribute_scores | attribute_scores_sparse}],
/// captions?, image_id?}. Sparse scores are [[index, score], ...]. Scenes
/// without an id are named after their 0-based position.
std::vector<Scene> read_scenes(std::istream& in, std::size_t num_classes,
                               std::size_t num_attributes);
std::vector<Scene> read_scenes(const std::filesystem::path& path, std::size_t num_classes,
                               std::size_t num_attributes);

struct GroundTruthImage {
  std::string id;
  std::vector<GroundTruthObject> objects;
};

/// One image per line: {image_id, objects: [{box, class_index, attribute_indices}]}.
std::vector<GroundTruthImage> read_ground_truth(std::istream& in);
std::vector<GroundTruthImage> read_ground_truth(const std::filesystem::path& path);

/// Pairs predictions with ground truth by image id: ground-truth order first,
/// then prediction-only images (all their detections count as false positives).
std::vector<EvalImage> join_for_eval(std::vector<Scene> predictions,
                                     std::vector<GroundTruthImage> ground_truth);

nlohmann::json to_json(const EvalReport& report);
nlohmann::json to_json(const TextualEncoding& t);
nlohmann::json to_json(const Inversion& inv, const std::vector<std::string>& attribute_names,
                       std::size_t attribute_limit);

std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path);
void write_binary_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace symscene
