// SPDX-License-Identifier: Apache-2.0
//
// Per-object scene encodings. Every encoding is a 2048-vector:
//
//   symbolic (k = 5, dim = 300)            raw (C = 1600, A = 400)
//   [0, 1500)     top-k class embeddings   [0, 1600)     class scores
//   [1500, 1800)  weighted attribute sum   [1600, 2000)  attribute scores
//   [1800, 1804)  box / image              [2000, 2004)  box / image
//   [1804, 1808)  box / scene envelope     [2004, 2008)  box / scene envelope
//   [1808, 2048)  zero                     [2008, 2048)  zero
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "symscene/detection.hpp"
#include "symscene/embedding.hpp"
#include "symscene/geometry.hpp"

namespace symscene {

inline constexpr std::size_t kEncodingDim = 2048;
inline constexpr std::size_t kDefaultTopK = 5;
inline constexpr std::size_t kDefaultEmbeddingDim = 300;
inline constexpr std::size_t kBoxBlockDim = 8;

/// Ordered from least to most private.
enum class PrivacyTier : std::uint8_t { kNotPrivate = 0, kAtRisk = 1, kPrivate = 2 };

std::string_view to_string(PrivacyTier tier);
/// Accepts "not-private", "at-risk", "private" (also with '_').
PrivacyTier parse_tier(std::string_view text);

struct SymbolicLayout {
  std::size_t k;
  std::size_t dim;

  constexpr std::size_t class_begin() const { return 0; }
  constexpr std::size_t attribute_begin() const { return k * dim; }
  constexpr std::size_t global_box_begin() const { return attribute_begin() + dim; }
  constexpr std::size_t relative_box_begin() const { return global_box_begin() + 4; }
  constexpr std::size_t used() const { return global_box_begin() + kBoxBlockDim; }
  constexpr bool fits() const { return used() <= kEncodingDim; }
};

struct RawLayout {
  std::size_t num_classes;
  std::size_t num_attributes;

  constexpr std::size_t class_begin() const { return 0; }
  constexpr std::size_t attribute_begin() const { return num_classes; }
  constexpr std::size_t global_box_begin() const { return num_classes + num_attributes; }
  constexpr std::size_t relative_box_begin() const { return global_box_begin() + 4; }
  constexpr std::size_t used() const { return global_box_begin() + kBoxBlockDim; }
  constexpr bool fits() const { return used() <= kEncodingDim; }
};

struct ObjectEncoding {
  std::vector<double> vector;  // length kEncodingDim
  PrivacyTier tier = PrivacyTier::kPrivate;
};

struct TextualEncoding {
  std::vector<std::string> class_words;
  std::vector<std::string> attribute_words;
};

/// N x 2048 row-major matrix of object encodings sharing one tier.
struct SceneEncoding {
  std::string scene_id;
  PrivacyTier tier = PrivacyTier::kPrivate;
  std::vector<double> values;
  std::optional<std::vector<std::string>> captions;

  std::size_t num_objects() const { return values.size() / kEncodingDim; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values).subspan(i * kEncodingDim, kEncodingDim);
  }
  void append(const ObjectEncoding& obj);
};

struct CodecOptions {
  std::size_t k = kDefaultTopK;
  // Attribute weights are the top-k scores divided by their sum; when false
  // the raw scores are used as weights.
  bool weight_norm = true;
};

/// Throws ConfigError when the box blocks cannot fit in 2048 slots.
ObjectEncoding encode_symbolic(const Detection& d, const BoundingBox& scene_envelope,
                               double image_w, double image_h, const Vocabulary& vocab,
                               const EmbeddingTable& table, const CodecOptions& opts = {});

ObjectEncoding encode_raw(const Detection& d, const BoundingBox& scene_envelope, double image_w,
                          double image_h);

/// Top-k class and attribute names, highest score first.
TextualEncoding encode_textual(const Detection& d, const Vocabulary& vocab,
                               std::size_t k = kDefaultTopK);

enum class EncodeMode { kSymbolic, kRaw };

struct SceneEncodeOptions {
  SelectOptions select;
  CodecOptions codec;
  bool include_captions = false;
};

/// Selects objects, computes the envelope over the selected boxes and encodes
/// each one. `table` may be null in raw mode.
SceneEncoding encode_scene(const Scene& scene, EncodeMode mode, const Vocabulary& vocab,
                           const EmbeddingTable* table, const SceneEncodeOptions& opts = {});

/// Textual encodings of the selected objects, in selection order.
std::vector<TextualEncoding> encode_scene_textual(const Scene& scene, const Vocabulary& vocab,
                                                  const SceneEncodeOptions& opts = {});

inline constexpr std::string_view kUnrecoverable = "unrecoverable";

/// What a symbolic vector gives back when matched against the vocabulary.
struct Inversion {
  std::vector<std::string> class_names;      // kUnrecoverable for zero slots
  std::vector<RankedScore> attribute_ranking;  // cosine similarity, empty if block is zero
  NormalizedBox global_box;
  NormalizedBox relative_box;
};

/// Unit-normalized label embeddings for nearest-neighbour lookup.
class LabelIndex {
 public:
  LabelIndex(const std::vector<std::string>& names, const EmbeddingTable& table);

  std::size_t dim() const { return dim_; }
  const std::vector<std::string>& names() const { return names_; }
  /// Entries ranked by cosine similarity to `query`, ties by index. Labels with
  /// a zero embedding are never ranked. Empty when `query` has zero norm.
  std::vector<RankedScore> rank(std::span<const double> query) const;

 private:
  std::size_t dim_;
  std::vector<std::string> names_;
  std::vector<double> unit_;  // rows of length dim_
  std::vector<bool> usable_;
};

Inversion invert_symbolic(const ObjectEncoding& enc, const LabelIndex& classes,
                          const LabelIndex& attributes, std::size_t k = kDefaultTopK);

Inversion invert_symbolic(const ObjectEncoding& enc, const Vocabulary& vocab,
                          const EmbeddingTable& table, std::size_t k = kDefaultTopK);

}  // namespace symscene
