// SPDX-License-Identifier: Apache-2.0
#include "symscene/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "symscene/error.hpp"

namespace symscene {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::size_t parse_count(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

double parse_ratio(const std::string& key, const std::string& v) {
  double out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

void check_ratio(const char* key, double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(key) + " must lie in [0, 1]");
}

}  // namespace

void Config::validate() const {
  check_ratio("score_threshold", score_threshold);
  check_ratio("iou_threshold", iou_threshold);
  check_ratio("attr_threshold", attr_threshold);
  if (num_classes == 0 || num_attributes == 0) throw ConfigError("vocabulary sizes must be positive");
  if (embedding_dim == 0) throw ConfigError("embedding_dim must be positive");
  if (top_k == 0) throw ConfigError("top_k must be positive");
  if (max_objects == 0) throw ConfigError("max_objects must be positive");
  if (top_k > num_classes || top_k > num_attributes) {
    throw ConfigError("top_k exceeds the class or attribute vocabulary size");
  }
  const SymbolicLayout sym{top_k, embedding_dim};
  if (!sym.fits()) {
    throw ConfigError("top_k*embedding_dim + embedding_dim + 8 = " + std::to_string(sym.used()) +
                      " exceeds 2048");
  }
  const RawLayout raw{num_classes, num_attributes};
  if (!raw.fits()) {
    throw ConfigError("num_classes + num_attributes + 8 = " + std::to_string(raw.used()) +
                      " exceeds 2048");
  }
}

void Config::apply(const std::map<std::string, std::string>& values) {
  for (const auto& [key, v] : values) {
    if (key == "num_classes") {
      num_classes = parse_count(key, v);
    } else if (key == "num_attributes") {
      num_attributes = parse_count(key, v);
    } else if (key == "embedding_dim") {
      embedding_dim = parse_count(key, v);
    } else if (key == "top_k") {
      top_k = parse_count(key, v);
    } else if (key == "score_threshold") {
      score_threshold = parse_ratio(key, v);
    } else if (key == "iou_threshold") {
      iou_threshold = parse_ratio(key, v);
    } else if (key == "max_objects") {
      max_objects = parse_count(key, v);
    } else if (key == "attr_threshold") {
      attr_threshold = parse_ratio(key, v);
    } else if (key == "attr_topk") {
      attr_topk = parse_count(key, v);
    } else if (key == "weight_norm") {
      weight_norm = parse_bool(key, v);
    } else if (key == "include_captions") {
      include_captions = parse_bool(key, v);
    } else if (key == "class_aware_nms") {
      class_aware_nms = parse_bool(key, v);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
}

SceneEncodeOptions Config::encode_options() const {
  SceneEncodeOptions o;
  o.select = {score_threshold, iou_threshold, max_objects, class_aware_nms};
  o.codec = {top_k, weight_norm};
  o.include_captions = include_captions;
  return o;
}

EvalOptions Config::eval_options(std::size_t max_dets) const {
  EvalOptions o;
  o.iou_threshold = iou_threshold;
  o.max_dets = max_dets;
  o.attributes.threshold = attr_threshold;
  if (attr_topk > 0) {
    o.attributes.mode = AttributeSelection::Mode::kTopK;
    o.attributes.top_k = attr_topk;
  }
  return o;
}

std::string Config::to_text() const {
  std::ostringstream out;
  out << std::boolalpha;
  out << "num_classes=" << num_classes << '\n'
      << "num_attributes=" << num_attributes << '\n'
      << "embedding_dim=" << embedding_dim << '\n'
      << "top_k=" << top_k << '\n'
      << "score_threshold=" << score_threshold << '\n'
      << "iou_threshold=" << iou_threshold << '\n'
      << "max_objects=" << max_objects << '\n'
      << "attr_threshold=" << attr_threshold << '\n'
      << "attr_topk=" << attr_topk << '\n'
      << "weight_norm=" << weight_norm << '\n'
      << "include_captions=" << include_captions << '\n'
      << "class_aware_nms=" << class_aware_nms << '\n';
  return out.str();
}

std::map<std::string, std::string> parse_config_text(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", line_no);
    out[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return parse_config_text(in);
  } catch (const ParseError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace symscene
