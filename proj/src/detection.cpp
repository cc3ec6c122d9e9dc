// SPDX-License-Identifier: Apache-2.0
#include "symscene/detection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "symscene/error.hpp"

namespace symscene {

namespace {

void check_scores(std::span<const double> scores, std::size_t expected, const char* what) {
  if (scores.size() != expected) {
    throw InvalidInput(std::string(what) + " vector has length " + std::to_string(scores.size()) +
                       ", expected " + std::to_string(expected));
  }
  for (double s : scores) {
    if (!(s >= 0.0 && s <= 1.0)) throw InvalidInput(std::string(what) + " outside [0, 1]");
  }
}

void check_names(const std::vector<std::string>& names, const char* what) {
  std::unordered_set<std::string_view> seen;
  for (const auto& n : names) {
    if (n.empty()) throw InvalidInput(std::string(what) + " vocabulary has an empty name");
    if (!seen.insert(n).second) {
      throw InvalidInput(std::string(what) + " vocabulary repeats '" + n + "'");
    }
  }
}

std::vector<std::string> read_label_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary file " + path.string());
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    names.push_back(line.substr(first, last - first + 1));
  }
  return names;
}

}  // namespace

double Detection::confidence() const {
  if (class_scores.empty()) return 0.0;
  return *std::max_element(class_scores.begin(), class_scores.end());
}

void validate(const Detection& d, std::size_t num_classes, std::size_t num_attributes) {
  validate(d.box);
  check_scores(d.class_scores, num_classes, "class score");
  check_scores(d.attribute_scores, num_attributes, "attribute score");
}

Vocabulary::Vocabulary(std::vector<std::string> class_names,
                       std::vector<std::string> attribute_names)
    : class_names_(std::move(class_names)), attribute_names_(std::move(attribute_names)) {
  check_names(class_names_, "class");
  check_names(attribute_names_, "attribute");
}

Vocabulary Vocabulary::load(const std::filesystem::path& classes,
                            const std::filesystem::path& attributes) {
  return Vocabulary(read_label_file(classes), read_label_file(attributes));
}

TopK top_k(std::span<const double> scores, std::size_t k) {
  if (k == 0) throw InvalidInput("top_k needs k >= 1");
  if (k > scores.size()) {
    throw InvalidInput("top_k: k=" + std::to_string(k) + " exceeds " +
                       std::to_string(scores.size()) + " scores");
  }
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  TopK out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back({idx[i], scores[idx[i]]});
  return out;
}

std::vector<double> normalized_topk_weights(const TopK& t) {
  double sum = 0;
  for (const auto& e : t) sum += e.score;
  std::vector<double> w(t.size());
  if (!(sum > 0)) {
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(t.size()));
    return w;
  }
  for (std::size_t i = 0; i < t.size(); ++i) w[i] = t[i].score / sum;
  return w;
}

std::vector<std::size_t> select_object_indices(const Scene& scene, const SelectOptions& opts) {
  if (!(opts.score_threshold >= 0 && opts.score_threshold <= 1)) {
    throw InvalidInput("score_threshold must lie in [0, 1]");
  }
  std::vector<std::size_t> passing;
  std::vector<ScoredBox> candidates;
  for (std::size_t i = 0; i < scene.detections.size(); ++i) {
    const auto& d = scene.detections[i];
    const double conf = d.confidence();
    if (conf > opts.score_threshold) {
      passing.push_back(i);
      int group = 0;
      if (opts.class_aware_nms && !d.class_scores.empty()) {
        group = static_cast<int>(top_k(d.class_scores, 1).front().index);
      }
      candidates.push_back({d.box, conf, group});
    }
  }
  auto kept = nms(candidates, {opts.iou_threshold, opts.class_aware_nms});
  if (kept.size() > opts.max_objects) kept.resize(opts.max_objects);
  for (auto& k : kept) k = passing[k];
  return kept;
}

std::vector<Detection> select_objects(const Scene& scene, const SelectOptions& opts) {
  std::vector<Detection> out;
  for (std::size_t i : select_object_indices(scene, opts)) out.push_back(scene.detections[i]);
  return out;
}

}  // namespace symscene
