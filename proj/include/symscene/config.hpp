// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <string>

#include "symscene/codec.hpp"
#include "symscene/metrics.hpp"

namespace symscene {

struct Config {
  std::size_t num_classes = kDefaultNumClasses;
  std::size_t num_attributes = kDefaultNumAttributes;
  std::size_t embedding_dim = kDefaultEmbeddingDim;
  std::size_t top_k = kDefaultTopK;
  double score_threshold = 0.2;
  double iou_threshold = 0.5;
  std::size_t max_objects = 100;
  double attr_threshold = 0.5;
  std::size_t attr_topk = 0;  // 0 selects threshold mode for attribute metrics
  bool weight_norm = true;
  bool include_captions = false;
  bool class_aware_nms = false;

  /// Throws ConfigError on thresholds outside [0, 1], zero counts or layouts
  /// that overflow 2048 slots.
  void validate() const;

  /// Applies `key=value` pairs; unknown keys and bad values throw ConfigError.
  void apply(const std::map<std::string, std::string>& values);

  SceneEncodeOptions encode_options() const;
  EvalOptions eval_options(std::size_t max_dets) const;

  /// `key=value` lines in a fixed key order.
  std::string to_text() const;
};

/// Parses `key=value` lines; blank lines and '#' comments are ignored.
std::map<std::string, std::string> parse_config_text(std::istream& in);
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

}  // namespace symscene
