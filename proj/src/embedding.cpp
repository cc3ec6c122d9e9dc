// SPDX-License-Identifier: Apache-2.0
#include "symscene/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>

#include "symscene/error.hpp"

namespace symscene {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Splits on spaces/tabs; trailing '\r' is treated as whitespace.
std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

}  // namespace

std::vector<std::string> tokenize_label(std::string_view name) {
  std::vector<std::string> tokens;
  for (auto f : split_fields(name)) tokens.push_back(lowercase(f));
  return tokens;
}

void EmbeddingTable::insert(std::string token, std::span<const double> values) {
  auto [it, inserted] = index_.try_emplace(std::move(token), data_.size() / std::max<std::size_t>(dim_, 1));
  if (inserted) {
    data_.insert(data_.end(), values.begin(), values.end());
  } else {
    std::copy(values.begin(), values.end(), data_.begin() + static_cast<std::ptrdiff_t>(it->second * dim_));
  }
}

EmbeddingTable EmbeddingTable::parse(std::istream& in) {
  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    const std::size_t n = fields.size() - 1;
    if (n == 0) throw ParseError("token '" + std::string(fields[0]) + "' has no vector", line_no);
    if (table.dim_ == 0) {
      table.dim_ = n;
    } else if (n != table.dim_) {
      throw ParseError("expected " + std::to_string(table.dim_) + " values, found " +
                           std::to_string(n),
                       line_no);
    }
    values.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto f = fields[i + 1];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), values[i]);
      if (ec != std::errc{} || ptr != f.data() + f.size() || !std::isfinite(values[i])) {
        throw ParseError("cannot parse value '" + std::string(f) + "'", line_no);
      }
    }
    table.insert(lowercase(fields[0]), values);
  }
  if (table.dim_ == 0) throw ParseError("embedding file has no entries", 0);
  return table;
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embedding file " + path.string());
  try {
    return parse(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.detail(), e.line());
  }
}

EmbeddingTable EmbeddingTable::from_entries(
    const std::vector<std::pair<std::string, std::vector<double>>>& entries) {
  if (entries.empty()) throw InvalidInput("embedding table needs at least one entry");
  EmbeddingTable table;
  table.dim_ = entries.front().second.size();
  if (table.dim_ == 0) throw InvalidInput("embedding dimension must be positive");
  for (const auto& [token, vec] : entries) {
    if (vec.size() != table.dim_) throw InvalidInput("embedding '" + token + "' has wrong length");
    if (!std::all_of(vec.begin(), vec.end(), [](double v) { return std::isfinite(v); })) {
      throw InvalidInput("embedding '" + token + "' has a non-finite component");
    }
    table.insert(lowercase(token), vec);
  }
  return table;
}

std::optional<std::span<const double>> EmbeddingTable::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return std::span<const double>(data_.data() + it->second * dim_, dim_);
}

LabelEmbedding embed_label(const EmbeddingTable& table, std::string_view name) {
  LabelEmbedding out;
  out.vector.assign(table.dim(), 0.0);
  std::size_t found = 0;
  const auto tokens = tokenize_label(name);
  for (const auto& tok : tokens) {
    if (auto vec = table.find(tok)) {
      if (found == 0) {
        std::copy(vec->begin(), vec->end(), out.vector.begin());
      } else {
        for (std::size_t i = 0; i < vec->size(); ++i) out.vector[i] += (*vec)[i];
      }
      ++found;
    } else {
      out.oov_tokens.push_back(tok);
    }
  }
  if (found > 1) {
    for (double& v : out.vector) v /= static_cast<double>(found);
  }
  return out;
}

}  // namespace symscene
