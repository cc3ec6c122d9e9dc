// SPDX-License-Identifier: Apache-2.0
#include "symscene/codec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "symscene/error.hpp"

namespace symscene {

namespace {

void write_box(std::vector<double>& v, std::size_t at, const NormalizedBox& b) {
  v[at] = b.u1;
  v[at + 1] = b.v1;
  v[at + 2] = b.u2;
  v[at + 3] = b.v2;
}

NormalizedBox read_box(std::span<const double> v, std::size_t at) {
  return {v[at], v[at + 1], v[at + 2], v[at + 3]};
}

double norm(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void check_vocab(const Detection& d, const Vocabulary& vocab) {
  validate(d, vocab.num_classes(), vocab.num_attributes());
}

}  // namespace

std::string_view to_string(PrivacyTier tier) {
  switch (tier) {
    case PrivacyTier::kNotPrivate:
      return "not-private";
    case PrivacyTier::kAtRisk:
      return "at-risk";
    case PrivacyTier::kPrivate:
      return "private";
  }
  return "unknown";
}

PrivacyTier parse_tier(std::string_view text) {
  std::string t(text);
  std::replace(t.begin(), t.end(), '_', '-');
  std::transform(t.begin(), t.end(), t.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (t == "not-private") return PrivacyTier::kNotPrivate;
  if (t == "at-risk") return PrivacyTier::kAtRisk;
  if (t == "private") return PrivacyTier::kPrivate;
  throw InvalidInput("unknown privacy tier '" + std::string(text) + "'");
}

void SceneEncoding::append(const ObjectEncoding& obj) {
  if (obj.vector.size() != kEncodingDim) throw InvalidInput("object encoding must have 2048 slots");
  if (num_objects() > 0 && obj.tier != tier) {
    throw InvalidInput("object tier differs from scene tier");
  }
  tier = obj.tier;
  values.insert(values.end(), obj.vector.begin(), obj.vector.end());
}

ObjectEncoding encode_symbolic(const Detection& d, const BoundingBox& scene_envelope,
                               double image_w, double image_h, const Vocabulary& vocab,
                               const EmbeddingTable& table, const CodecOptions& opts) {
  const SymbolicLayout layout{opts.k, table.dim()};
  if (opts.k == 0) throw ConfigError("top-k must be at least 1");
  if (!layout.fits()) {
    throw ConfigError("symbolic layout needs " + std::to_string(layout.used()) +
                      " slots (k=" + std::to_string(opts.k) + ", dim=" +
                      std::to_string(table.dim()) + "), more than 2048");
  }
  check_vocab(d, vocab);

  ObjectEncoding enc{std::vector<double>(kEncodingDim, 0.0), PrivacyTier::kPrivate};
  auto& v = enc.vector;
  const std::size_t dim = table.dim();

  const auto classes = top_k(d.class_scores, opts.k);
  for (std::size_t rank = 0; rank < classes.size(); ++rank) {
    const auto e = embed_label(table, vocab.class_names()[classes[rank].index]);
    std::copy(e.vector.begin(), e.vector.end(),
              v.begin() + static_cast<std::ptrdiff_t>(layout.class_begin() + rank * dim));
  }

  const auto attrs = top_k(d.attribute_scores, opts.k);
  std::vector<double> weights;
  if (opts.weight_norm) {
    weights = normalized_topk_weights(attrs);
  } else {
    for (const auto& a : attrs) weights.push_back(a.score);
  }
  for (std::size_t rank = 0; rank < attrs.size(); ++rank) {
    const auto e = embed_label(table, vocab.attribute_names()[attrs[rank].index]);
    for (std::size_t j = 0; j < dim; ++j) v[layout.attribute_begin() + j] += weights[rank] * e.vector[j];
  }

  write_box(v, layout.global_box_begin(), normalize_global(d.box, image_w, image_h));
  write_box(v, layout.relative_box_begin(), normalize_relative(d.box, scene_envelope));
  return enc;
}

ObjectEncoding encode_raw(const Detection& d, const BoundingBox& scene_envelope, double image_w,
                          double image_h) {
  const RawLayout layout{d.class_scores.size(), d.attribute_scores.size()};
  if (!layout.fits()) {
    throw ConfigError("raw layout needs " + std::to_string(layout.used()) +
                      " slots, more than 2048");
  }
  validate(d, d.class_scores.size(), d.attribute_scores.size());

  ObjectEncoding enc{std::vector<double>(kEncodingDim, 0.0), PrivacyTier::kAtRisk};
  auto& v = enc.vector;
  std::copy(d.class_scores.begin(), d.class_scores.end(), v.begin());
  std::copy(d.attribute_scores.begin(), d.attribute_scores.end(),
            v.begin() + static_cast<std::ptrdiff_t>(layout.attribute_begin()));
  write_box(v, layout.global_box_begin(), normalize_global(d.box, image_w, image_h));
  write_box(v, layout.relative_box_begin(), normalize_relative(d.box, scene_envelope));
  return enc;
}

TextualEncoding encode_textual(const Detection& d, const Vocabulary& vocab, std::size_t k) {
  check_vocab(d, vocab);
  TextualEncoding out;
  for (const auto& e : top_k(d.class_scores, k)) out.class_words.push_back(vocab.class_names()[e.index]);
  for (const auto& e : top_k(d.attribute_scores, k)) {
    out.attribute_words.push_back(vocab.attribute_names()[e.index]);
  }
  return out;
}

namespace {

void check_scene(const Scene& scene) {
  if (!(scene.image_w > 0) || !(scene.image_h > 0)) {
    throw InvalidInput("scene '" + scene.id + "': image dimensions must be positive");
  }
}

void validate_detections(const Scene& scene, const Vocabulary& vocab) {
  for (std::size_t i = 0; i < scene.detections.size(); ++i) {
    try {
      validate(scene.detections[i], vocab.num_classes(), vocab.num_attributes());
    } catch (const InvalidInput& e) {
      throw InvalidInput("scene '" + scene.id + "' object " + std::to_string(i) + ": " + e.what());
    }
  }
}

}  // namespace

SceneEncoding encode_scene(const Scene& scene, EncodeMode mode, const Vocabulary& vocab,
                           const EmbeddingTable* table, const SceneEncodeOptions& opts) {
  check_scene(scene);
  validate_detections(scene, vocab);
  if (mode == EncodeMode::kSymbolic && table == nullptr) {
    throw InvalidInput("symbolic encoding needs an embedding table");
  }

  SceneEncoding out;
  out.scene_id = scene.id;
  out.tier = mode == EncodeMode::kSymbolic ? PrivacyTier::kPrivate : PrivacyTier::kAtRisk;
  if (opts.include_captions && scene.captions) out.captions = scene.captions;

  const auto selected = select_object_indices(scene, opts.select);
  if (selected.empty()) return out;

  std::vector<BoundingBox> boxes;
  for (std::size_t i : selected) boxes.push_back(scene.detections[i].box);
  const BoundingBox envelope = enveloping_box(boxes);

  out.values.reserve(selected.size() * kEncodingDim);
  for (std::size_t i : selected) {
    const auto& d = scene.detections[i];
    try {
      out.append(mode == EncodeMode::kSymbolic
                     ? encode_symbolic(d, envelope, scene.image_w, scene.image_h, vocab, *table,
                                       opts.codec)
                     : encode_raw(d, envelope, scene.image_w, scene.image_h));
    } catch (const InvalidInput& e) {
      throw InvalidInput("scene '" + scene.id + "' object " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

std::vector<TextualEncoding> encode_scene_textual(const Scene& scene, const Vocabulary& vocab,
                                                  const SceneEncodeOptions& opts) {
  check_scene(scene);
  validate_detections(scene, vocab);
  std::vector<TextualEncoding> out;
  for (std::size_t i : select_object_indices(scene, opts.select)) {
    out.push_back(encode_textual(scene.detections[i], vocab, opts.codec.k));
  }
  return out;
}

LabelIndex::LabelIndex(const std::vector<std::string>& names, const EmbeddingTable& table)
    : dim_(table.dim()), names_(names), unit_(names.size() * table.dim(), 0.0),
      usable_(names.size(), false) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto e = embed_label(table, names[i]);
    const double n = norm(e.vector);
    if (n == 0) continue;
    usable_[i] = true;
    for (std::size_t j = 0; j < dim_; ++j) unit_[i * dim_ + j] = e.vector[j] / n;
  }
}

std::vector<RankedScore> LabelIndex::rank(std::span<const double> query) const {
  if (query.size() != dim_) throw InvalidInput("query length does not match embedding dim");
  const double qn = norm(query);
  std::vector<RankedScore> out;
  if (qn == 0) return out;
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!usable_[i]) continue;
    double dot = 0;
    for (std::size_t j = 0; j < dim_; ++j) dot += unit_[i * dim_ + j] * query[j];
    out.push_back({i, dot / qn});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RankedScore& a, const RankedScore& b) { return a.score > b.score; });
  return out;
}

Inversion invert_symbolic(const ObjectEncoding& enc, const LabelIndex& classes,
                          const LabelIndex& attributes, std::size_t k) {
  if (enc.tier != PrivacyTier::kPrivate) throw InvalidInput("only symbolic encodings can be inverted");
  if (enc.vector.size() != kEncodingDim) throw InvalidInput("object encoding must have 2048 slots");
  if (classes.dim() != attributes.dim()) throw InvalidInput("label indexes disagree on dim");
  const SymbolicLayout layout{k, classes.dim()};
  if (k == 0 || !layout.fits()) throw ConfigError("symbolic layout does not fit in 2048 slots");

  const std::span<const double> v(enc.vector);
  Inversion out;
  for (std::size_t slot = 0; slot < k; ++slot) {
    const auto ranked = classes.rank(v.subspan(layout.class_begin() + slot * layout.dim, layout.dim));
    out.class_names.emplace_back(ranked.empty() ? std::string(kUnrecoverable)
                                                : classes.names()[ranked.front().index]);
  }
  out.attribute_ranking = attributes.rank(v.subspan(layout.attribute_begin(), layout.dim));
  out.global_box = read_box(v, layout.global_box_begin());
  out.relative_box = read_box(v, layout.relative_box_begin());
  return out;
}

Inversion invert_symbolic(const ObjectEncoding& enc, const Vocabulary& vocab,
                          const EmbeddingTable& table, std::size_t k) {
  return invert_symbolic(enc, LabelIndex(vocab.class_names(), table),
                         LabelIndex(vocab.attribute_names(), table), k);
}

}  // namespace symscene
