// SPDX-License-Identifier: Apache-2.0
#include "symscene/io.hpp"

#include <fstream>
#include <iterator>
#include <map>

#include "symscene/error.hpp"

namespace symscene {

using nlohmann::json;

namespace {

std::ifstream open_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

BoundingBox parse_box(const json& j) {
  if (!j.is_array() || j.size() != 4) throw InvalidInput("box must be [x1, y1, x2, y2]");
  BoundingBox b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
  validate(b);
  return b;
}

std::vector<double> parse_scores(const json& obj, const std::string& key, std::size_t n) {
  if (obj.contains(key)) return obj.at(key).get<std::vector<double>>();
  std::vector<double> out(n, 0.0);
  const std::string sparse = key + "_sparse";
  if (!obj.contains(sparse)) return out;
  for (const auto& e : obj.at(sparse)) {
    if (!e.is_array() || e.size() != 2) throw InvalidInput(sparse + " entries must be [index, score]");
    const auto idx = e[0].get<long long>();
    if (idx < 0 || static_cast<std::size_t>(idx) >= n) {
      throw InvalidInput(sparse + " index " + std::to_string(idx) + " out of range");
    }
    out[static_cast<std::size_t>(idx)] = e[1].get<double>();
  }
  return out;
}

std::string id_string(const json& j) { return j.is_string() ? j.get<std::string>() : j.dump(); }

template <typename Fn>
void for_each_json_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(json::parse(line));
    } catch (const json::exception& e) {
      throw ParseError(e.what(), line_no);
    } catch (const InvalidInput& e) {
      throw ParseError(e.what(), line_no);
    }
  }
}

json quality_json(const std::optional<PredictionQuality>& q) {
  if (!q) return nullptr;
  return {{"accuracy", q->accuracy}, {"precision", q->precision}, {"recall", q->recall}, {"f1", q->f1}};
}

json box_json(const NormalizedBox& b) { return json::array({b.u1, b.v1, b.u2, b.v2}); }

}  // namespace

std::vector<Scene> read_scenes(std::istream& in, std::size_t num_classes,
                               std::size_t num_attributes) {
  std::vector<Scene> scenes;
  for_each_json_line(in, [&](const json& j) {
    Scene s;
    if (j.contains("image_id")) {
      s.id = id_string(j.at("image_id"));
    } else if (j.contains("scene_id")) {
      s.id = id_string(j.at("scene_id"));
    } else {
      s.id = std::to_string(scenes.size());
    }
    s.image_w = j.at("image_w").get<double>();
    s.image_h = j.at("image_h").get<double>();
    if (!(s.image_w > 0) || !(s.image_h > 0)) throw InvalidInput("image dimensions must be positive");
    for (const auto& d : j.value("detections", json::array())) {
      Detection det;
      det.box = parse_box(d.at("box"));
      det.class_scores = parse_scores(d, "class_scores", num_classes);
      det.attribute_scores = parse_scores(d, "attribute_scores", num_attributes);
      validate(det, num_classes, num_attributes);
      s.detections.push_back(std::move(det));
    }
    if (j.contains("captions")) s.captions = j.at("captions").get<std::vector<std::string>>();
    scenes.push_back(std::move(s));
  });
  return scenes;
}

std::vector<Scene> read_scenes(const std::filesystem::path& path, std::size_t num_classes,
                               std::size_t num_attributes) {
  auto in = open_text(path);
  try {
    return read_scenes(in, num_classes, num_attributes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.detail(), e.line());
  }
}

std::vector<GroundTruthImage> read_ground_truth(std::istream& in) {
  std::vector<GroundTruthImage> images;
  for_each_json_line(in, [&](const json& j) {
    GroundTruthImage im;
    im.id = id_string(j.at("image_id"));
    for (const auto& o : j.value("objects", json::array())) {
      GroundTruthObject g;
      g.box = parse_box(o.at("box"));
      g.class_index = o.at("class_index").get<std::size_t>();
      g.attribute_indices = o.value("attribute_indices", std::vector<std::size_t>{});
      im.objects.push_back(std::move(g));
    }
    images.push_back(std::move(im));
  });
  return images;
}

std::vector<GroundTruthImage> read_ground_truth(const std::filesystem::path& path) {
  auto in = open_text(path);
  try {
    return read_ground_truth(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.detail(), e.line());
  }
}

std::vector<EvalImage> join_for_eval(std::vector<Scene> predictions,
                                     std::vector<GroundTruthImage> ground_truth) {
  std::map<std::string, std::size_t> pred_by_id;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (!pred_by_id.emplace(predictions[i].id, i).second) {
      throw InvalidInput("duplicate prediction image_id '" + predictions[i].id + "'");
    }
  }
  std::vector<EvalImage> out;
  std::vector<bool> used(predictions.size(), false);
  for (auto& gt : ground_truth) {
    EvalImage im;
    im.id = gt.id;
    im.ground_truth = std::move(gt.objects);
    if (auto it = pred_by_id.find(gt.id); it != pred_by_id.end()) {
      if (used[it->second]) throw InvalidInput("duplicate ground-truth image_id '" + gt.id + "'");
      used[it->second] = true;
      im.predictions = std::move(predictions[it->second].detections);
    }
    out.push_back(std::move(im));
  }
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (used[i]) continue;
    out.push_back({predictions[i].id, std::move(predictions[i].detections), {}});
  }
  return out;
}

json to_json(const EvalReport& r) {
  return {
      {"ap", r.ap},
      {"ar", r.ar},
      {"class", quality_json(r.class_quality)},
      {"attribute", quality_json(r.attribute_quality)},
      {"counts",
       {{"images", r.counts.images},
        {"predictions", r.counts.predictions},
        {"ground_truth", r.counts.ground_truth},
        {"matched", r.counts.matched},
        {"unmatched_predictions", r.counts.unmatched_predictions},
        {"unmatched_ground_truth", r.counts.unmatched_ground_truth}}},
  };
}

json to_json(const TextualEncoding& t) {
  return {{"class_words", t.class_words}, {"attribute_words", t.attribute_words}};
}

json to_json(const Inversion& inv, const std::vector<std::string>& attribute_names,
             std::size_t attribute_limit) {
  json ranking = json::array();
  for (std::size_t i = 0; i < inv.attribute_ranking.size() && i < attribute_limit; ++i) {
    const auto& e = inv.attribute_ranking[i];
    ranking.push_back({{"name", attribute_names.at(e.index)}, {"similarity", e.score}});
  }
  return {{"class_names", inv.class_names},
          {"attribute_ranking", ranking},
          {"global_box", box_json(inv.global_box)},
          {"relative_box", box_json(inv.relative_box)}};
}

std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_binary_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace symscene
