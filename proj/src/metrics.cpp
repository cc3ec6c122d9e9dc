// SPDX-License-Identifier: Apache-2.0
#include "symscene/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "symscene/error.hpp"

namespace symscene {

namespace {

void check_threshold(double t, const char* what) {
  if (!(t >= 0.0 && t <= 1.0)) throw InvalidInput(std::string(what) + " must lie in [0, 1]");
}

// Prediction indices by descending score, ties by index.
std::vector<std::size_t> score_order(std::span<const ScoredBox> preds) {
  for (const auto& p : preds) {
    if (!std::isfinite(p.score)) throw InvalidInput("prediction score is not finite");
  }
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return preds[a].score > preds[b].score;
  });
  return order;
}

std::vector<BoundingBox> boxes_of(std::span<const GroundTruthObject> gts) {
  std::vector<BoundingBox> out;
  out.reserve(gts.size());
  for (const auto& g : gts) out.push_back(g.box);
  return out;
}

std::vector<ScoredBox> scored_boxes(std::span<const Detection> preds) {
  std::vector<ScoredBox> out;
  out.reserve(preds.size());
  for (const auto& d : preds) out.push_back({d.box, d.confidence(), 0});
  return out;
}

std::size_t total_ground_truth(std::span<const DetectionSet> images) {
  std::size_t n = 0;
  for (const auto& im : images) n += im.ground_truth.size();
  return n;
}

double safe_ratio(double num, double den) { return den > 0 ? num / den : 0.0; }

std::vector<std::size_t> sorted_unique(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

Matching match(std::span<const ScoredBox> preds, std::span<const BoundingBox> gts,
               double iou_threshold) {
  check_threshold(iou_threshold, "iou_threshold");
  Matching m;
  std::vector<bool> claimed(gts.size(), false);
  for (std::size_t p : score_order(preds)) {
    std::optional<std::size_t> best;
    double best_iou = -1;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (claimed[g]) continue;
      const double v = iou(preds[p].box, gts[g]);
      if (v >= iou_threshold && v > best_iou) {
        best = g;
        best_iou = v;
      }
    }
    if (best) {
      claimed[*best] = true;
      m.pairs.emplace_back(p, *best);
    } else {
      m.unmatched_preds.push_back(p);
    }
  }
  for (std::size_t g = 0; g < gts.size(); ++g) {
    if (!claimed[g]) m.unmatched_gts.push_back(g);
  }
  return m;
}

Matching match(std::span<const ScoredBox> preds, std::span<const GroundTruthObject> gts,
               double iou_threshold) {
  return match(preds, boxes_of(gts), iou_threshold);
}

double average_precision(std::span<const DetectionSet> images, double iou_threshold) {
  const std::size_t num_gt = total_ground_truth(images);
  if (num_gt == 0) throw InvalidInput("average precision is undefined without ground truth");

  struct Ranked {
    double score;
    bool true_positive;
  };
  std::vector<Ranked> ranked;
  for (const auto& im : images) {
    const auto m = match(im.predictions, im.ground_truth, iou_threshold);
    std::vector<bool> tp(im.predictions.size(), false);
    for (const auto& [p, g] : m.pairs) tp[p] = true;
    // Append in per-image score order so equal scores resolve by (image, index).
    for (std::size_t p : score_order(im.predictions)) ranked.push_back({im.predictions[p].score, tp[p]});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Ranked& a, const Ranked& b) { return a.score > b.score; });

  std::vector<double> recall, precision;
  recall.reserve(ranked.size());
  precision.reserve(ranked.size());
  std::size_t tp = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (ranked[i].true_positive) ++tp;
    recall.push_back(static_cast<double>(tp) / static_cast<double>(num_gt));
    precision.push_back(static_cast<double>(tp) / static_cast<double>(i + 1));
  }
  // Precision envelope: best precision at this recall or beyond.
  for (std::size_t i = precision.size(); i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double ap = 0;
  double prev_recall = 0;
  for (std::size_t i = 0; i < recall.size(); ++i) {
    if (recall[i] > prev_recall) {
      ap += (recall[i] - prev_recall) * precision[i];
      prev_recall = recall[i];
    }
  }
  return std::clamp(ap, 0.0, 1.0);
}

double average_recall(std::span<const DetectionSet> images, double iou_threshold,
                      std::size_t max_dets) {
  const std::size_t num_gt = total_ground_truth(images);
  if (num_gt == 0) throw InvalidInput("average recall is undefined without ground truth");
  std::size_t matched = 0;
  for (const auto& im : images) {
    auto order = score_order(im.predictions);
    if (order.size() > max_dets) order.resize(max_dets);
    std::sort(order.begin(), order.end());
    std::vector<ScoredBox> kept;
    for (std::size_t p : order) kept.push_back(im.predictions[p]);
    matched += match(kept, im.ground_truth, iou_threshold).pairs.size();
  }
  return static_cast<double>(matched) / static_cast<double>(num_gt);
}

double f1_score(double precision, double recall) {
  const double s = precision + recall;
  return s > 0 ? 2 * precision * recall / s : 0.0;
}

std::optional<PredictionQuality> class_metrics(std::span<const ClassPair> pairs) {
  if (pairs.empty()) return std::nullopt;
  std::set<std::size_t> truth_classes;
  for (const auto& p : pairs) truth_classes.insert(p.truth);
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& p : pairs) {
    if (p.predicted == p.truth) {
      ++tp;
    } else {
      ++fn;
      if (truth_classes.contains(p.predicted)) ++fp;
    }
  }
  PredictionQuality q;
  q.accuracy = static_cast<double>(tp) / static_cast<double>(pairs.size());
  q.precision = safe_ratio(static_cast<double>(tp), static_cast<double>(tp + fp));
  q.recall = safe_ratio(static_cast<double>(tp), static_cast<double>(tp + fn));
  q.f1 = f1_score(q.precision, q.recall);
  return q;
}

std::optional<PredictionQuality> class_metrics(const Matching& m, std::span<const Detection> preds,
                                               std::span<const GroundTruthObject> gts) {
  std::vector<ClassPair> pairs;
  for (const auto& [p, g] : m.pairs) {
    if (preds[p].class_scores.empty()) throw InvalidInput("prediction has no class scores");
    pairs.push_back({top_k(preds[p].class_scores, 1).front().index, gts[g].class_index});
  }
  return class_metrics(pairs);
}

std::optional<PredictionQuality> attribute_metrics(std::span<const AttributePair> pairs) {
  if (pairs.empty()) return std::nullopt;
  std::size_t hits = 0, predicted = 0, truth = 0;
  double jaccard_sum = 0;
  for (const auto& p : pairs) {
    std::vector<std::size_t> common;
    std::set_intersection(p.predicted.begin(), p.predicted.end(), p.truth.begin(), p.truth.end(),
                          std::back_inserter(common));
    const std::size_t uni = p.predicted.size() + p.truth.size() - common.size();
    jaccard_sum += uni == 0 ? 1.0 : static_cast<double>(common.size()) / static_cast<double>(uni);
    hits += common.size();
    predicted += p.predicted.size();
    truth += p.truth.size();
  }
  PredictionQuality q;
  q.accuracy = jaccard_sum / static_cast<double>(pairs.size());
  q.precision = safe_ratio(static_cast<double>(hits), static_cast<double>(predicted));
  q.recall = safe_ratio(static_cast<double>(hits), static_cast<double>(truth));
  q.f1 = f1_score(q.precision, q.recall);
  return q;
}

std::vector<std::size_t> predicted_attributes(const Detection& d, const AttributeSelection& sel) {
  std::vector<std::size_t> out;
  if (sel.mode == AttributeSelection::Mode::kThreshold) {
    check_threshold(sel.threshold, "attr_threshold");
    for (std::size_t i = 0; i < d.attribute_scores.size(); ++i) {
      if (d.attribute_scores[i] > sel.threshold) out.push_back(i);
    }
    return out;
  }
  const std::size_t k = std::min(sel.top_k, d.attribute_scores.size());
  if (k == 0) return out;
  for (const auto& e : top_k(d.attribute_scores, k)) out.push_back(e.index);
  return sorted_unique(std::move(out));
}

std::optional<PredictionQuality> attribute_metrics(const Matching& m,
                                                   std::span<const Detection> preds,
                                                   std::span<const GroundTruthObject> gts,
                                                   const AttributeSelection& sel) {
  std::vector<AttributePair> pairs;
  for (const auto& [p, g] : m.pairs) {
    pairs.push_back({predicted_attributes(preds[p], sel), sorted_unique(gts[g].attribute_indices)});
  }
  return attribute_metrics(pairs);
}

EvalReport evaluate(std::span<const EvalImage> images, const EvalOptions& opts) {
  EvalReport r;
  std::vector<DetectionSet> sets;
  std::vector<ClassPair> class_pairs;
  std::vector<AttributePair> attribute_pairs;
  for (const auto& im : images) {
    auto& set = sets.emplace_back();
    set.predictions = scored_boxes(im.predictions);
    set.ground_truth = boxes_of(im.ground_truth);

    const auto m = match(set.predictions, set.ground_truth, opts.iou_threshold);
    for (const auto& [p, g] : m.pairs) {
      const auto& d = im.predictions[p];
      if (d.class_scores.empty()) throw InvalidInput("prediction has no class scores");
      class_pairs.push_back({top_k(d.class_scores, 1).front().index, im.ground_truth[g].class_index});
      attribute_pairs.push_back({predicted_attributes(d, opts.attributes),
                                 sorted_unique(im.ground_truth[g].attribute_indices)});
    }
    r.counts.images += 1;
    r.counts.predictions += im.predictions.size();
    r.counts.ground_truth += im.ground_truth.size();
    r.counts.matched += m.pairs.size();
    r.counts.unmatched_predictions += m.unmatched_preds.size();
    r.counts.unmatched_ground_truth += m.unmatched_gts.size();
  }
  r.ap = average_precision(sets, opts.iou_threshold);
  r.ar = average_recall(sets, opts.iou_threshold, opts.max_dets);
  r.class_quality = class_metrics(class_pairs);
  r.attribute_quality = attribute_metrics(attribute_pairs);
  return r;
}

std::string format_report_table(const EvalReport& r, const std::string& name) {
  auto pct = [](std::optional<double> v) {
    char buf[16];
    if (!v) return std::string("     -");
    std::snprintf(buf, sizeof buf, "%6.2f", 100.0 * *v);
    return std::string(buf);
  };
  auto quality = [&](const std::optional<PredictionQuality>& q) {
    if (!q) return pct({}) + " " + pct({}) + " " + pct({}) + " " + pct({});
    return pct(q->accuracy) + " " + pct(q->precision) + " " + pct(q->recall) + " " + pct(q->f1);
  };
  char label[32];
  std::snprintf(label, sizeof label, "%-12.12s", name.c_str());
  std::string out;
  out += "             |         Object Detection                  |   Attribute Prediction\n";
  out += "Name         |     AP     AR      A      P      R     F1 |      A      P      R     F1\n";
  out += std::string(label) + " | " + pct(r.ap) + " " + pct(r.ar) + " " + quality(r.class_quality) +
         " | " + quality(r.attribute_quality) + "\n";
  return out;
}

}  // namespace symscene
