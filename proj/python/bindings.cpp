// SPDX-License-Identifier: Apache-2.0
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "symscene/codec.hpp"
#include "symscene/error.hpp"
#include "symscene/geometry.hpp"
#include "symscene/metrics.hpp"
#include "symscene/net.hpp"
#include "symscene/wire.hpp"

namespace py = pybind11;
using namespace symscene;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::array_t<double> scene_matrix(const SceneEncoding& e) {
  py::array_t<double> out({static_cast<py::ssize_t>(e.num_objects()), static_cast<py::ssize_t>(kEncodingDim)});
  std::copy(e.values.begin(), e.values.end(), out.mutable_data());
  return out;
}

std::vector<std::uint8_t> as_bytes(const py::bytes& b) {
  const std::string_view s = b;
  return {s.begin(), s.end()};
}

py::bytes to_bytes(const std::vector<std::uint8_t>& v) {
  return {reinterpret_cast<const char*>(v.data()), v.size()};
}

}  // namespace

PYBIND11_MODULE(_symscene, m) {
  m.doc() = "Symbolic scene encoding, detection metrics and SYMV framing";
  m.attr("ENCODING_DIM") = kEncodingDim;

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<FrameError>(m, "FrameError", PyExc_ValueError);

  py::class_<BoundingBox>(m, "BoundingBox")
      .def(py::init<double, double, double, double>(), py::arg("x1"), py::arg("y1"), py::arg("x2"),
           py::arg("y2"))
      .def_readwrite("x1", &BoundingBox::x1)
      .def_readwrite("y1", &BoundingBox::y1)
      .def_readwrite("x2", &BoundingBox::x2)
      .def_readwrite("y2", &BoundingBox::y2)
      .def("area", &BoundingBox::area)
      .def("__eq__", [](const BoundingBox& a, const BoundingBox& b) { return a == b; })
      .def("__repr__", [](const BoundingBox& b) {
        return "BoundingBox(" + std::to_string(b.x1) + ", " + std::to_string(b.y1) + ", " +
               std::to_string(b.x2) + ", " + std::to_string(b.y2) + ")";
      });

  py::class_<NormalizedBox>(m, "NormalizedBox")
      .def_readonly("u1", &NormalizedBox::u1)
      .def_readonly("v1", &NormalizedBox::v1)
      .def_readonly("u2", &NormalizedBox::u2)
      .def_readonly("v2", &NormalizedBox::v2)
      .def("as_tuple", [](const NormalizedBox& b) { return py::make_tuple(b.u1, b.v1, b.u2, b.v2); });

  m.def("iou", &iou, py::arg("a"), py::arg("b"));
  m.def(
      "nms",
      [](const std::vector<BoundingBox>& boxes, const std::vector<double>& scores, double thr) {
        if (boxes.size() != scores.size()) throw InvalidInput("boxes and scores differ in length");
        std::vector<ScoredBox> dets;
        for (std::size_t i = 0; i < boxes.size(); ++i) dets.push_back({boxes[i], scores[i]});
        return nms(dets, {thr, false});
      },
      py::arg("boxes"), py::arg("scores"), py::arg("iou_threshold") = 0.5,
      "Indices of kept boxes in descending score order.");

  py::enum_<PrivacyTier>(m, "PrivacyTier")
      .value("NOT_PRIVATE", PrivacyTier::kNotPrivate)
      .value("AT_RISK", PrivacyTier::kAtRisk)
      .value("PRIVATE", PrivacyTier::kPrivate);

  py::class_<Detection>(m, "Detection")
      .def(py::init([](BoundingBox box, std::vector<double> cls, std::vector<double> attr) {
             return Detection{box, std::move(cls), std::move(attr)};
           }),
           py::arg("box"), py::arg("class_scores"), py::arg("attribute_scores"))
      .def_readwrite("box", &Detection::box)
      .def_readwrite("class_scores", &Detection::class_scores)
      .def_readwrite("attribute_scores", &Detection::attribute_scores)
      .def("confidence", &Detection::confidence);

  py::class_<Vocabulary>(m, "Vocabulary")
      .def(py::init<std::vector<std::string>, std::vector<std::string>>(), py::arg("classes"),
           py::arg("attributes"))
      .def_static("load", &Vocabulary::load, py::arg("classes"), py::arg("attributes"))
      .def_property_readonly("class_names", &Vocabulary::class_names)
      .def_property_readonly("attribute_names", &Vocabulary::attribute_names);

  py::class_<EmbeddingTable>(m, "EmbeddingTable")
      .def_static("load", &EmbeddingTable::load, py::arg("path"))
      .def_static("from_entries", &EmbeddingTable::from_entries, py::arg("entries"))
      .def_property_readonly("dim", &EmbeddingTable::dim)
      .def("__len__", &EmbeddingTable::size)
      .def("get", [](const EmbeddingTable& t, const std::string& token) -> std::optional<py::array_t<double>> {
        auto v = t.find(token);
        if (!v) return std::nullopt;
        return to_array({v->begin(), v->end()});
      });

  m.def(
      "encode_symbolic",
      [](const Detection& d, const BoundingBox& envelope, double w, double h, const Vocabulary& vocab,
         const EmbeddingTable& table, std::size_t k, bool weight_norm) {
        return to_array(encode_symbolic(d, envelope, w, h, vocab, table, {k, weight_norm}).vector);
      },
      py::arg("detection"), py::arg("envelope"), py::arg("image_w"), py::arg("image_h"),
      py::arg("vocab"), py::arg("table"), py::arg("k") = kDefaultTopK, py::arg("weight_norm") = true);
  m.def(
      "encode_raw",
      [](const Detection& d, const BoundingBox& envelope, double w, double h) {
        return to_array(encode_raw(d, envelope, w, h).vector);
      },
      py::arg("detection"), py::arg("envelope"), py::arg("image_w"), py::arg("image_h"));

  py::class_<Inversion>(m, "Inversion")
      .def_readonly("class_names", &Inversion::class_names)
      .def_property_readonly("attribute_ranking",
                             [](const Inversion& inv) {
                               std::vector<std::pair<std::size_t, double>> out;
                               for (const auto& r : inv.attribute_ranking) out.emplace_back(r.index, r.score);
                               return out;
                             })
      .def_readonly("global_box", &Inversion::global_box)
      .def_readonly("relative_box", &Inversion::relative_box);

  m.def(
      "invert_symbolic",
      [](const std::vector<double>& vec, const Vocabulary& vocab, const EmbeddingTable& table, std::size_t k) {
        return invert_symbolic(ObjectEncoding{vec, PrivacyTier::kPrivate}, vocab, table, k);
      },
      py::arg("vector"), py::arg("vocab"), py::arg("table"), py::arg("k") = kDefaultTopK);

  py::class_<SceneEncoding>(m, "SceneEncoding")
      .def(py::init([](std::string id, PrivacyTier tier, py::array_t<double, py::array::c_style | py::array::forcecast> rows,
                       std::optional<std::vector<std::string>> captions) {
             if (rows.ndim() != 2 || rows.shape(1) != static_cast<py::ssize_t>(kEncodingDim)) {
               throw InvalidInput("rows must have shape (N, 2048)");
             }
             SceneEncoding e;
             e.scene_id = std::move(id);
             e.tier = tier;
             e.values.assign(rows.data(), rows.data() + rows.size());
             e.captions = std::move(captions);
             return e;
           }),
           py::arg("scene_id"), py::arg("tier"), py::arg("rows"), py::arg("captions") = std::nullopt)
      .def_readonly("scene_id", &SceneEncoding::scene_id)
      .def_readonly("tier", &SceneEncoding::tier)
      .def_readonly("captions", &SceneEncoding::captions)
      .def_property_readonly("rows", &scene_matrix)
      .def("__len__", &SceneEncoding::num_objects);

  m.def("encode_frame", [](const SceneEncoding& e) { return to_bytes(encode_frame(e)); });
  m.def("decode_frame", [](const py::bytes& b) { return decode_frame(as_bytes(b)); });
  m.def("decode_frames", [](const py::bytes& b) { return decode_frames(as_bytes(b)); });

  m.def(
      "average_precision",
      [](const std::vector<std::pair<std::vector<std::pair<BoundingBox, double>>, std::vector<BoundingBox>>>& images,
         double thr) {
        std::vector<DetectionSet> sets;
        for (const auto& [preds, gts] : images) {
          DetectionSet s;
          for (const auto& [b, score] : preds) s.predictions.push_back({b, score});
          s.ground_truth = gts;
          sets.push_back(std::move(s));
        }
        return average_precision(sets, thr);
      },
      py::arg("images"), py::arg("iou_threshold") = 0.5,
      "images: list of ([(box, score), ...], [gt_box, ...]).");

  py::enum_<FrameStatus>(m, "FrameStatus")
      .value("ACCEPTED", FrameStatus::kAccepted)
      .value("TIER_REJECTED", FrameStatus::kTierRejected)
      .value("MALFORMED", FrameStatus::kMalformed)
      .value("TOO_LARGE", FrameStatus::kTooLarge);

  m.def(
      "send",
      [](const std::string& addr, const std::vector<SceneEncoding>& scenes) {
        std::vector<SendResult> results;
        {
          py::gil_scoped_release release;
          results = send(parse_endpoint(addr), scenes);
        }
        std::vector<std::pair<FrameStatus, std::optional<std::uint32_t>>> out;
        for (const auto& r : results) out.emplace_back(r.status, r.num_objects);
        return out;
      },
      py::arg("addr"), py::arg("scenes"), "Ships frames to a server; returns (status, echoed count) per frame.");
}
