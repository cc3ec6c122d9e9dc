// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace symscene {

/// Immutable word -> vector table, loaded from the usual
/// `<token> <f1> ... <fdim>` text layout. Tokens are stored lowercase.
class EmbeddingTable {
 public:
  static EmbeddingTable load(const std::filesystem::path& path);
  static EmbeddingTable parse(std::istream& in);
  /// Builds a table from in-memory entries; all vectors must share one length.
  static EmbeddingTable from_entries(
      const std::vector<std::pair<std::string, std::vector<double>>>& entries);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return index_.size(); }

  /// Stored vector for an already-normalized token, or nullopt.
  std::optional<std::span<const double>> find(std::string_view token) const;

 private:
  EmbeddingTable() = default;
  void insert(std::string token, std::span<const double> values);

  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> data_;  // rows of length dim_
};

struct LabelEmbedding {
  std::vector<double> vector;
  std::vector<std::string> oov_tokens;
};

/// Lowercases `name`, splits on whitespace and averages the vectors of the
/// tokens found in the table. Missing tokens are listed in `oov_tokens`; a
/// name with no known token embeds to the zero vector.
LabelEmbedding embed_label(const EmbeddingTable& table, std::string_view name);

/// Lowercase + whitespace split.
std::vector<std::string> tokenize_label(std::string_view name);

}  // namespace symscene
