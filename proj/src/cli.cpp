// SPDX-License-Identifier: Apache-2.0
#include "symscene/cli.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "symscene/config.hpp"
#include "symscene/error.hpp"
#include "symscene/io.hpp"
#include "symscene/net.hpp"
#include "symscene/wire.hpp"

namespace symscene::cli {

namespace {

std::atomic<bool> g_shutdown{false};

// A missing or unreadable input named on the command line.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require_file(const std::string& path, const char* what) {
  if (!std::filesystem::is_regular_file(path)) {
    throw UsageError(std::string(what) + " '" + path + "' does not exist");
  }
}

struct ConfigFlags {
  std::string config_path;
  bool verbose = false;
  std::optional<std::size_t> num_classes, num_attributes, embedding_dim, top_k, max_objects,
      attr_topk;
  std::optional<double> score_threshold, iou_threshold, attr_threshold;
  bool no_weight_norm = false;
  bool captions = false;
  bool class_aware_nms = false;

  void attach(CLI::App& app) {
    app.add_option("--config", config_path, "key=value config file (default: $SYMSCENE_CONFIG)");
    app.add_flag("-v,--verbose", verbose, "print the effective config to stderr");
    app.add_option("--num-classes", num_classes, "class vocabulary size");
    app.add_option("--num-attributes", num_attributes, "attribute vocabulary size");
    app.add_option("--embedding-dim", embedding_dim, "word embedding dimension");
    app.add_option("--top-k", top_k, "classes/attributes kept per object");
    app.add_option("--score-threshold", score_threshold, "minimum object confidence");
    app.add_option("--iou-threshold", iou_threshold, "IoU threshold for NMS and matching");
    app.add_option("--max-objects", max_objects, "objects kept per scene");
    app.add_option("--attr-threshold", attr_threshold, "attribute score threshold for eval");
    app.add_option("--attr-topk", attr_topk, "use top-k attributes for eval instead of a threshold");
    app.add_flag("--no-weight-norm", no_weight_norm, "weight attributes by raw scores");
    app.add_flag("--captions", captions, "transmit scene captions");
    app.add_flag("--class-aware-nms", class_aware_nms, "suppress only within the argmax class");
  }

  Config resolve(std::ostream& err) const {
    Config c;
    std::string path = config_path;
    if (path.empty()) {
      if (const char* env = std::getenv("SYMSCENE_CONFIG"); env && *env) path = env;
    }
    if (!path.empty()) c.apply(read_config_file(path));
    if (num_classes) c.num_classes = *num_classes;
    if (num_attributes) c.num_attributes = *num_attributes;
    if (embedding_dim) c.embedding_dim = *embedding_dim;
    if (top_k) c.top_k = *top_k;
    if (max_objects) c.max_objects = *max_objects;
    if (attr_topk) c.attr_topk = *attr_topk;
    if (score_threshold) c.score_threshold = *score_threshold;
    if (iou_threshold) c.iou_threshold = *iou_threshold;
    if (attr_threshold) c.attr_threshold = *attr_threshold;
    if (no_weight_norm) c.weight_norm = false;
    if (captions) c.include_captions = true;
    if (class_aware_nms) c.class_aware_nms = true;
    c.validate();
    if (verbose) err << "# effective config\n" << c.to_text();
    return c;
  }
};

struct EncodeArgs {
  std::string scenes, embeddings, classes, attributes, output;
  std::string mode = "symbolic";
};

int do_encode(const EncodeArgs& a, const Config& cfg, std::ostream& out) {
  require_file(a.scenes, "scenes file");
  require_file(a.classes, "class vocabulary");
  require_file(a.attributes, "attribute vocabulary");
  if (a.mode == "symbolic") require_file(a.embeddings, "embedding file");

  const auto vocab = Vocabulary::load(a.classes, a.attributes);
  if (vocab.num_classes() != cfg.num_classes || vocab.num_attributes() != cfg.num_attributes) {
    throw ConfigError("vocabulary has " + std::to_string(vocab.num_classes()) + " classes / " +
                      std::to_string(vocab.num_attributes()) + " attributes, config expects " +
                      std::to_string(cfg.num_classes) + " / " + std::to_string(cfg.num_attributes));
  }
  const auto scenes = read_scenes(a.scenes, cfg.num_classes, cfg.num_attributes);
  const auto opts = cfg.encode_options();

  if (a.mode == "textual") {
    std::ofstream file(a.output);
    if (!file) throw std::runtime_error("cannot write " + a.output);
    std::size_t objects = 0;
    for (const auto& s : scenes) {
      const auto encoded = encode_scene_textual(s, vocab, opts);
      for (std::size_t i = 0; i < encoded.size(); ++i, ++objects) {
        auto j = to_json(encoded[i]);
        j["scene_id"] = s.id;
        j["object"] = i;
        file << j.dump() << '\n';
      }
    }
    out << "wrote " << objects << " objects from " << scenes.size() << " scenes to " << a.output
        << '\n';
    return kExitOk;
  }

  std::optional<EmbeddingTable> table;
  EncodeMode mode = EncodeMode::kRaw;
  if (a.mode == "symbolic") {
    mode = EncodeMode::kSymbolic;
    table = EmbeddingTable::load(a.embeddings);
    if (table->dim() != cfg.embedding_dim) {
      throw ConfigError("embedding file has dim " + std::to_string(table->dim()) +
                        ", config expects " + std::to_string(cfg.embedding_dim));
    }
  }
  std::vector<std::uint8_t> bytes;
  std::size_t objects = 0;
  for (const auto& s : scenes) {
    const auto enc = encode_scene(s, mode, vocab, table ? &*table : nullptr, opts);
    objects += enc.num_objects();
    const auto frame = encode_frame(enc);
    bytes.insert(bytes.end(), frame.begin(), frame.end());
  }
  write_binary_file(a.output, bytes);
  out << "wrote " << scenes.size() << " frames (" << objects << " objects) to " << a.output << '\n';
  return kExitOk;
}

struct EvalArgs {
  std::string predictions, ground_truth, json_out, name = "model";
  std::size_t max_dets = 100;
};

int do_eval(const EvalArgs& a, const Config& cfg, std::ostream& out) {
  require_file(a.predictions, "prediction file");
  require_file(a.ground_truth, "ground-truth file");
  auto preds = read_scenes(a.predictions, cfg.num_classes, cfg.num_attributes);
  auto gts = read_ground_truth(a.ground_truth);
  const auto images = join_for_eval(std::move(preds), std::move(gts));
  const auto report = evaluate(images, cfg.eval_options(a.max_dets));
  const auto j = to_json(report);
  if (!a.json_out.empty()) {
    std::ofstream file(a.json_out);
    if (!file) throw std::runtime_error("cannot write " + a.json_out);
    file << j.dump(2) << '\n';
  }
  out << format_report_table(report, a.name) << j.dump() << '\n';
  return kExitOk;
}

struct ServeArgs {
  std::string bind = "127.0.0.1:7878";
  std::string min_tier = "private";
  std::size_t max_objects = 100;
  std::size_t max_frame_bytes = std::size_t{64} << 20;
  std::string record_dir, port_file;
};

int do_serve(const ServeArgs& a, std::ostream& out) {
  ServerPolicy policy;
  try {
    policy.minimum_tier = parse_tier(a.min_tier);
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  policy.max_objects = a.max_objects;
  policy.max_frame_bytes = a.max_frame_bytes;
  validate(policy);

  FrameSink sink = [](const SceneEncoding&, std::span<const std::uint8_t>) {};
  if (!a.record_dir.empty()) sink = make_recording_sink(a.record_dir);
  Server server(parse_endpoint(a.bind), policy, sink);
  server.start();
  out << "listening on port " << server.port() << " (min tier " << to_string(policy.minimum_tier)
      << ")" << std::endl;
  if (!a.port_file.empty()) {
    const auto tmp = a.port_file + ".tmp";
    std::ofstream(tmp) << server.port() << '\n';
    std::filesystem::rename(tmp, a.port_file);
  }
  while (!g_shutdown.load()) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  server.stop();
  g_shutdown = false;
  const auto s = server.stats();
  out << "served " << s.connections << " connections: " << s.accepted << " accepted, "
      << s.tier_rejected << " tier-rejected, " << s.malformed << " malformed, " << s.too_large
      << " too-large\n";
  return kExitOk;
}

struct SendArgs {
  std::string addr;
  std::vector<std::string> inputs;
};

int do_send(const SendArgs& a, std::ostream& out) {
  std::vector<std::vector<std::uint8_t>> frames;
  std::vector<std::string> labels;
  for (const auto& path : a.inputs) {
    require_file(path, "input");
    const auto bytes = read_binary_file(path);
    std::span<const std::uint8_t> rest(bytes);
    while (!rest.empty()) {
      std::size_t consumed = 0;
      const auto enc = decode_frame_prefix(rest, consumed);
      frames.emplace_back(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(consumed));
      labels.push_back(enc.scene_id);
      rest = rest.subspan(consumed);
    }
  }
  const auto results = send_frame_bytes(parse_endpoint(a.addr), frames);
  bool all_accepted = true;
  for (std::size_t i = 0; i < results.size(); ++i) {
    out << "frame " << i << " scene '" << labels[i] << "': " << to_string(results[i].status);
    if (results[i].num_objects) out << " (" << *results[i].num_objects << " objects)";
    out << '\n';
    all_accepted = all_accepted && results[i].status == FrameStatus::kAccepted;
  }
  return all_accepted ? kExitOk : kExitRejected;
}

struct InvertArgs {
  std::vector<std::string> inputs;
  std::string embeddings, classes, attributes, output;
  std::size_t attribute_limit = 5;
};

int do_invert(const InvertArgs& a, const Config& cfg, std::ostream& out) {
  require_file(a.embeddings, "embedding file");
  require_file(a.classes, "class vocabulary");
  require_file(a.attributes, "attribute vocabulary");
  for (const auto& p : a.inputs) require_file(p, "input");
  const auto vocab = Vocabulary::load(a.classes, a.attributes);
  const auto table = EmbeddingTable::load(a.embeddings);
  const LabelIndex classes(vocab.class_names(), table);
  const LabelIndex attributes(vocab.attribute_names(), table);

  std::ofstream file;
  std::ostream* sink = &out;
  if (!a.output.empty()) {
    file.open(a.output);
    if (!file) throw std::runtime_error("cannot write " + a.output);
    sink = &file;
  }
  for (const auto& path : a.inputs) {
    for (const auto& scene : decode_frames(read_binary_file(path))) {
      if (scene.tier != PrivacyTier::kPrivate) {
        throw std::runtime_error("scene '" + scene.scene_id + "' in " + path +
                                 " is not a symbolic encoding");
      }
      for (std::size_t i = 0; i < scene.num_objects(); ++i) {
        const auto row = scene.row(i);
        const ObjectEncoding obj{{row.begin(), row.end()}, scene.tier};
        auto j = to_json(invert_symbolic(obj, classes, attributes, cfg.top_k),
                         vocab.attribute_names(), a.attribute_limit);
        j["scene_id"] = scene.scene_id;
        j["object"] = i;
        *sink << j.dump() << '\n';
      }
    }
  }
  return kExitOk;
}

}  // namespace

void request_shutdown() noexcept { g_shutdown = true; }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Privacy-preserving symbolic scene encoding toolkit", "symscene"};
  app.require_subcommand(1);
  app.fallthrough();
  ConfigFlags flags;
  flags.attach(app);

  EncodeArgs enc;
  auto* encode = app.add_subcommand("encode", "encode detector scenes into .symv frames or text");
  encode->add_option("--scenes", enc.scenes, "scene JSON-lines file")->required();
  encode->add_option("--embeddings", enc.embeddings, "word embedding text file");
  encode->add_option("--classes", enc.classes, "class vocabulary file")->required();
  encode->add_option("--attributes", enc.attributes, "attribute vocabulary file")->required();
  encode->add_option("--mode", enc.mode, "symbolic | raw | textual")
      ->check(CLI::IsMember({"symbolic", "raw", "textual"}));
  encode->add_option("-o,--output", enc.output, "output path")->required();

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "score predictions against ground truth");
  eval->add_option("--predictions", ev.predictions, "prediction scenes (with image_id)")->required();
  eval->add_option("--ground-truth", ev.ground_truth, "ground-truth JSON-lines file")->required();
  eval->add_option("--max-dets", ev.max_dets, "predictions per image counted for AR")
      ->check(CLI::PositiveNumber);
  eval->add_option("--json", ev.json_out, "also write the report as JSON");
  eval->add_option("--name", ev.name, "row label in the table");

  ServeArgs sv;
  auto* serve = app.add_subcommand("serve", "run the validating cloud endpoint");
  serve->add_option("--bind", sv.bind, "host:port to listen on");
  serve->add_option("--min-tier", sv.min_tier, "at-risk | private")
      ->check(CLI::IsMember({"not-private", "at-risk", "private"}));
  serve->add_option("--max-objects", sv.max_objects, "objects allowed per frame");
  serve->add_option("--max-frame-bytes", sv.max_frame_bytes, "largest frame accepted");
  serve->add_option("--record", sv.record_dir, "directory receiving accepted frames");
  serve->add_option("--port-file", sv.port_file, "write the bound port here once listening");

  SendArgs sd;
  auto* send_cmd = app.add_subcommand("send", "ship .symv frames to a server");
  send_cmd->add_option("--addr", sd.addr, "server host:port")->required();
  send_cmd->add_option("--input", sd.inputs, ".symv files")->required()->expected(1, -1);

  InvertArgs iv;
  auto* invert = app.add_subcommand("invert", "report what a symbolic .symv file reveals");
  invert->add_option("--input", iv.inputs, ".symv files")->required()->expected(1, -1);
  invert->add_option("--embeddings", iv.embeddings, "word embedding text file")->required();
  invert->add_option("--classes", iv.classes, "class vocabulary file")->required();
  invert->add_option("--attributes", iv.attributes, "attribute vocabulary file")->required();
  invert->add_option("--attribute-limit", iv.attribute_limit, "ranked attributes to print");
  invert->add_option("-o,--output", iv.output, "write JSON lines here instead of stdout");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    if (*serve) {
      // Serve takes its own limits; the shared config only needs to be valid.
      flags.resolve(err);
      return do_serve(sv, out);
    }
    if (*send_cmd) return do_send(sd, out);
    const Config cfg = flags.resolve(err);
    if (*encode) {
      if (enc.mode == "symbolic" && enc.embeddings.empty()) {
        throw UsageError("--embeddings is required for symbolic mode");
      }
      return do_encode(enc, cfg, out);
    }
    if (*eval) return do_eval(ev, cfg, out);
    if (*invert) return do_invert(iv, cfg, out);
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace symscene::cli
