// SPDX-License-Identifier: Apache-2.0
//
// Class-agnostic detection metrics (AP, AR) and class / attribute prediction
// quality over matched detections.
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "symscene/detection.hpp"
#include "symscene/geometry.hpp"

namespace symscene {

struct GroundTruthObject {
  BoundingBox box;
  std::size_t class_index = 0;
  std::vector<std::size_t> attribute_indices;
};

struct Matching {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (prediction, ground truth)
  std::vector<std::size_t> unmatched_preds;
  std::vector<std::size_t> unmatched_gts;
};

/// Greedy class-agnostic matching: predictions in descending score order
/// (ties: lower index) each claim the unclaimed ground truth with the highest
/// IoU >= threshold (ties: lower index).
Matching match(std::span<const ScoredBox> preds, std::span<const BoundingBox> gts,
               double iou_threshold);
Matching match(std::span<const ScoredBox> preds, std::span<const GroundTruthObject> gts,
               double iou_threshold);

/// Boxes of one image.
struct DetectionSet {
  std::vector<ScoredBox> predictions;
  std::vector<BoundingBox> ground_truth;
};

/// All-point interpolated area under the dataset-wide precision/recall curve.
/// Throws InvalidInput when the dataset has no ground-truth objects.
double average_precision(std::span<const DetectionSet> images, double iou_threshold);

/// Fraction of ground-truth objects matched when each image keeps only its
/// `max_dets` highest-scoring predictions.
double average_recall(std::span<const DetectionSet> images, double iou_threshold,
                      std::size_t max_dets = 100);

struct PredictionQuality {
  double accuracy = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

/// Harmonic mean, 0 when precision + recall is 0.
double f1_score(double precision, double recall);

struct ClassPair {
  std::size_t predicted;
  std::size_t truth;
};

/// Top-1 accuracy plus micro-averaged one-vs-rest P/R/F1 over the classes that
/// appear as ground truth among the pairs. nullopt for no pairs.
std::optional<PredictionQuality> class_metrics(std::span<const ClassPair> pairs);

/// Predicted class = argmax of class_scores (ties: lower index).
std::optional<PredictionQuality> class_metrics(const Matching& m, std::span<const Detection> preds,
                                               std::span<const GroundTruthObject> gts);

struct AttributePair {
  std::vector<std::size_t> predicted;  // sorted, unique
  std::vector<std::size_t> truth;      // sorted, unique
};

/// Micro multi-label P = sum|pred & gt| / sum|pred|, R likewise over |gt|
/// (0 when the denominator is 0). Accuracy is the mean Jaccard index; a pair
/// where both sets are empty scores 1. nullopt for no pairs.
std::optional<PredictionQuality> attribute_metrics(std::span<const AttributePair> pairs);

struct AttributeSelection {
  enum class Mode { kThreshold, kTopK };
  Mode mode = Mode::kThreshold;
  double threshold = 0.5;  // attributes scoring strictly above are predicted
  std::size_t top_k = 5;
};

std::vector<std::size_t> predicted_attributes(const Detection& d, const AttributeSelection& sel);

std::optional<PredictionQuality> attribute_metrics(const Matching& m,
                                                   std::span<const Detection> preds,
                                                   std::span<const GroundTruthObject> gts,
                                                   const AttributeSelection& sel);

struct EvalImage {
  std::string id;
  std::vector<Detection> predictions;
  std::vector<GroundTruthObject> ground_truth;
};

struct EvalOptions {
  double iou_threshold = 0.5;
  std::size_t max_dets = 100;
  AttributeSelection attributes;
};

struct EvalCounts {
  std::size_t images = 0;
  std::size_t predictions = 0;
  std::size_t ground_truth = 0;
  std::size_t matched = 0;
  std::size_t unmatched_predictions = 0;
  std::size_t unmatched_ground_truth = 0;
};

struct EvalReport {
  double ap = 0;
  double ar = 0;
  std::optional<PredictionQuality> class_quality;
  std::optional<PredictionQuality> attribute_quality;
  EvalCounts counts;
};

EvalReport evaluate(std::span<const EvalImage> images, const EvalOptions& opts = {});

/// Fixed-width table: AP AR | class A P R F1 | attribute A P R F1, in percent.
std::string format_report_table(const EvalReport& report, const std::string& name = "model");

}  // namespace symscene
