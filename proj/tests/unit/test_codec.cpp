// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "symscene/codec.hpp"
#include "symscene/error.hpp"
#include "test_support.hpp"

using namespace symscene;
using testing_support::numbered_names;

namespace {

std::vector<double> slice(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  return {v.begin() + static_cast<std::ptrdiff_t>(begin), v.begin() + static_cast<std::ptrdiff_t>(end)};
}

bool all_zero(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  return std::all_of(v.begin() + static_cast<std::ptrdiff_t>(begin),
                     v.begin() + static_cast<std::ptrdiff_t>(end), [](double x) { return x == 0.0; });
}

std::vector<double> basis(std::size_t dim, std::size_t hot, double value = 1.0) {
  std::vector<double> v(dim, 0.0);
  v[hot] = value;
  return v;
}

struct Toy {
  Vocabulary vocab;
  EmbeddingTable table;
};

// 8 classes, 6 attributes, 300-d vectors. Every label is in vocabulary with a
// distinct basis vector unless listed in `oov`.
Toy make_toy(const std::vector<std::string>& oov = {}) {
  const auto classes = numbered_names("class", 8);
  const auto attrs = numbered_names("attr", 6);
  std::vector<std::pair<std::string, std::vector<double>>> entries;
  std::size_t hot = 0;
  for (const auto& n : testing_support::concat(classes, attrs)) {
    if (std::find(oov.begin(), oov.end(), n) == oov.end()) entries.emplace_back(n, basis(300, hot));
    ++hot;
  }
  entries.emplace_back("filler", basis(300, 299));
  return {Vocabulary(classes, attrs), EmbeddingTable::from_entries(entries)};
}

Detection toy_detection(std::vector<double> cls, std::vector<double> attrs,
                        BoundingBox box = {64, 48, 320, 240}) {
  return {box, std::move(cls), std::move(attrs)};
}

const BoundingBox kImage{0, 0, 640, 480};

}  // namespace

TEST_CASE("layout arithmetic") {
  constexpr SymbolicLayout sym{5, 300};
  static_assert(sym.attribute_begin() == 5 * 300);
  static_assert(sym.attribute_begin() == 1500);
  static_assert(sym.global_box_begin() == 1500 + 300);
  static_assert(sym.used() == 1808);
  static_assert(sym.fits());
  constexpr RawLayout raw{1600, 400};
  static_assert(raw.attribute_begin() == 1600);
  static_assert(raw.global_box_begin() == 2000);
  static_assert(raw.used() == 2008);
  static_assert(raw.fits());
  static_assert(kEncodingDim == 2048);
  static_assert(!SymbolicLayout{7, 300}.fits());
  CHECK(true);
}

TEST_CASE("encode_symbolic places blocks in their slots") {
  auto toy = make_toy({"class0", "class1", "class3", "class4"});
  // class2 wins; the tie-broken runners-up 0, 1, 3, 4 are out of vocabulary
  const auto d = toy_detection({0, 0, 0.9, 0, 0, 0, 0, 0}, {0.5, 0.25, 0, 0, 0, 0});
  const auto enc = encode_symbolic(d, {64, 48, 320, 240}, 640, 480, toy.vocab, toy.table);
  const auto& v = enc.vector;
  REQUIRE(v.size() == 2048);
  CHECK(enc.tier == PrivacyTier::kPrivate);
  CHECK(slice(v, 0, 300) == basis(300, 2));
  CHECK(all_zero(v, 300, 1500));
  // attribute weights 0.5/0.75 and 0.25/0.75 over basis vectors 8 and 9
  std::vector<double> attr(300, 0.0);
  attr[8] = 0.5 / 0.75;
  attr[9] = 0.25 / 0.75;
  const auto got = slice(v, 1500, 1800);
  for (std::size_t i = 0; i < 300; ++i) CHECK(got[i] == doctest::Approx(attr[i]).epsilon(1e-15));
  CHECK(slice(v, 1800, 1804) == std::vector<double>{0.1, 0.1, 0.5, 0.5});
  CHECK(slice(v, 1804, 1808) == std::vector<double>{0, 0, 1, 1});
  CHECK(all_zero(v, 1808, 2048));
}

TEST_CASE("encode_symbolic without weight normalization uses raw scores") {
  auto toy = make_toy();
  const auto d = toy_detection({0.9, 0, 0, 0, 0, 0, 0, 0}, {0.5, 0.25, 0, 0, 0, 0});
  const auto enc = encode_symbolic(d, kImage, 640, 480, toy.vocab, toy.table, {5, false});
  CHECK(enc.vector[1500 + 8] == 0.5);
  CHECK(enc.vector[1500 + 9] == 0.25);
}

TEST_CASE("zero attribute scores over unknown labels give a zero attribute block") {
  auto toy = make_toy(numbered_names("attr", 6));
  const auto d = toy_detection({0.9, 0.1, 0, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0});
  const auto enc = encode_symbolic(d, kImage, 640, 480, toy.vocab, toy.table);
  CHECK(all_zero(enc.vector, 1500, 1800));
}

TEST_CASE("encode_symbolic rejects layouts that overflow 2048 slots") {
  auto toy = make_toy();
  const auto d = toy_detection({0.9, 0.1, 0, 0, 0, 0, 0, 0}, {0.5, 0, 0, 0, 0, 0});
  CHECK_THROWS_AS(encode_symbolic(d, kImage, 640, 480, toy.vocab, toy.table, {7, true}), ConfigError);
  CHECK_NOTHROW(encode_symbolic(d, kImage, 640, 480, toy.vocab, toy.table, {5, true}));
}

TEST_CASE("encode_symbolic rejects detections that do not fit the vocabulary") {
  auto toy = make_toy();
  const auto d = toy_detection({0.9, 0.1}, {0.5, 0, 0, 0, 0, 0});
  CHECK_THROWS_AS(encode_symbolic(d, kImage, 640, 480, toy.vocab, toy.table), InvalidInput);
}

TEST_CASE("encode_raw layout") {
  SUBCASE("zero scores and a full-image box") {
    Detection d{{0, 0, 640, 480}, std::vector<double>(1600, 0.0), std::vector<double>(400, 0.0)};
    const auto enc = encode_raw(d, {0, 0, 640, 480}, 640, 480);
    CHECK(enc.tier == PrivacyTier::kAtRisk);
    CHECK(all_zero(enc.vector, 0, 2000));
    CHECK(slice(enc.vector, 2000, 2008) == std::vector<double>{0, 0, 1, 1, 0, 0, 1, 1});
    CHECK(all_zero(enc.vector, 2008, 2048));
  }
  SUBCASE("one-hot class") {
    Detection d{{0, 0, 10, 10}, std::vector<double>(1600, 0.0), std::vector<double>(400, 0.0)};
    d.class_scores[7] = 1.0;
    const auto enc = encode_raw(d, {0, 0, 10, 10}, 640, 480);
    CHECK(enc.vector[7] == 1.0);
    CHECK(all_zero(enc.vector, 0, 7));
    CHECK(all_zero(enc.vector, 8, 1600));
  }
  SUBCASE("too many scores for the layout") {
    Detection d{{0, 0, 10, 10}, std::vector<double>(1700, 0.0), std::vector<double>(400, 0.0)};
    CHECK_THROWS_AS(encode_raw(d, {0, 0, 10, 10}, 640, 480), ConfigError);
  }
}

TEST_CASE("encode_raw is deterministic and injective on scores") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    auto d = testing_support::random_detection(rng, 1600, 400);
    const auto a = encode_raw(d, kImage, 640, 480);
    const auto b = encode_raw(d, kImage, 640, 480);
    CHECK(a.vector == b.vector);
    auto e = d;
    e.attribute_scores[rng() % 400] *= 0.5;
    e.class_scores[rng() % 1600] *= 0.5;
    CHECK(encode_raw(e, kImage, 640, 480).vector != a.vector);
  }
}

TEST_CASE("encode_textual") {
  const Vocabulary vocab({"sky", "car", "tree", "dog", "cat", "bus"}, {"red", "big", "old", "wet", "new", "dry"});
  Detection d{{0, 0, 1, 1}, {0.1, 0.3, 0.2, 0.9, 0.6, 0.05}, {0.2, 0.2, 0.2, 0.2, 0.2, 0.2}};
  const auto t = encode_textual(d, vocab);
  CHECK(t.class_words == std::vector<std::string>{"dog", "cat", "car", "tree", "sky"});
  // all tied -> vocabulary order
  CHECK(t.attribute_words == std::vector<std::string>{"red", "big", "old", "wet", "new"});
  CHECK_THROWS_AS(encode_textual(d, vocab, 7), InvalidInput);
}

TEST_CASE("encode_scene") {
  auto toy = make_toy();
  auto obj = [](BoundingBox b, std::size_t cls, double conf) {
    std::vector<double> c(8, 0.0);
    c[cls] = conf;
    return Detection{b, c, {0.6, 0.3, 0, 0, 0, 0}};
  };
  SceneEncodeOptions opts;

  SUBCASE("empty scene") {
    const Scene s{"empty", 640, 480, {}, {}};
    const auto enc = encode_scene(s, EncodeMode::kSymbolic, toy.vocab, &toy.table, opts);
    CHECK(enc.num_objects() == 0);
    CHECK(enc.scene_id == "empty");
    CHECK(enc.tier == PrivacyTier::kPrivate);
  }
  SUBCASE("single object is its own envelope") {
    const Scene s{"one", 640, 480, {obj({10, 20, 110, 220}, 3, 0.8)}, {}};
    const auto enc = encode_scene(s, EncodeMode::kSymbolic, toy.vocab, &toy.table, opts);
    REQUIRE(enc.num_objects() == 1);
    const auto row = enc.row(0);
    CHECK(std::vector<double>(row.begin() + 1804, row.begin() + 1808) == std::vector<double>{0, 0, 1, 1});
  }
  SUBCASE("rows follow confidence order") {
    const Scene s{"three", 640, 480,
                  {obj({0, 0, 100, 100}, 1, 0.5), obj({200, 0, 300, 100}, 2, 0.9),
                   obj({400, 0, 500, 100}, 3, 0.7), obj({0, 300, 10, 310}, 4, 0.1)},
                  {}};
    const auto enc = encode_scene(s, EncodeMode::kSymbolic, toy.vocab, &toy.table, opts);
    REQUIRE(enc.num_objects() == 3);
    // the class-0 slot carries the winning class's basis vector
    CHECK(enc.row(0)[2] == 1.0);
    CHECK(enc.row(1)[3] == 1.0);
    CHECK(enc.row(2)[1] == 1.0);
    // envelope (0,0,500,100): the first row's box spans x 200..300
    CHECK(enc.row(0)[1804] == doctest::Approx(0.4));
    CHECK(enc.row(0)[1806] == doctest::Approx(0.6));
  }
  SUBCASE("captions pass through only when enabled") {
    Scene s{"cap", 640, 480, {obj({0, 0, 10, 10}, 1, 0.9)}, std::vector<std::string>{"a dog"}};
    CHECK_FALSE(encode_scene(s, EncodeMode::kRaw, toy.vocab, nullptr, opts).captions);
    opts.include_captions = true;
    const auto enc = encode_scene(s, EncodeMode::kRaw, toy.vocab, nullptr, opts);
    REQUIRE(enc.captions);
    CHECK(*enc.captions == std::vector<std::string>{"a dog"});
    CHECK(enc.tier == PrivacyTier::kAtRisk);
  }
  SUBCASE("bad objects are reported with their index") {
    Scene s{"bad", 640, 480, {obj({0, 0, 10, 10}, 1, 0.9), obj({0, 0, 10, 10}, 1, 0.9)}, {}};
    s.detections[1].attribute_scores.pop_back();
    try {
      encode_scene(s, EncodeMode::kSymbolic, toy.vocab, &toy.table, opts);
      FAIL("expected InvalidInput");
    } catch (const InvalidInput& e) {
      CHECK(std::string(e.what()).find("object 1") != std::string::npos);
    }
  }
}

TEST_CASE("symbolic class block ignores monotone score transforms") {
  std::mt19937_64 rng(17);
  const auto classes = numbered_names("c", 60), attrs = numbered_names("a", 20);
  const Vocabulary vocab(classes, attrs);
  const auto table = testing_support::random_table(rng, testing_support::concat(classes, attrs), 300);
  for (int trial = 0; trial < 50; ++trial) {
    auto d = testing_support::random_detection(rng, 60, 20);
    const auto a = encode_symbolic(d, kImage, 640, 480, vocab, table);
    for (auto& s : d.class_scores) s = s * s * s;
    const auto b = encode_symbolic(d, kImage, 640, 480, vocab, table);
    CHECK(slice(a.vector, 0, 1500) == slice(b.vector, 0, 1500));
  }
}

TEST_CASE("different scores can share one symbolic encoding") {
  auto toy = make_toy();
  const auto a = toy_detection({0.9, 0.5, 0.4, 0.3, 0.2, 0.1, 0.05, 0.0}, {0.8, 0.4, 0.2, 0.1, 0.05, 0.0});
  // below-top-5 class scores change, attribute scores halve
  const auto b = toy_detection({0.9, 0.5, 0.4, 0.3, 0.2, 0.01, 0.0, 0.15}, {0.4, 0.2, 0.1, 0.05, 0.025, 0.0});
  CHECK(encode_symbolic(a, kImage, 640, 480, toy.vocab, toy.table).vector ==
        encode_symbolic(b, kImage, 640, 480, toy.vocab, toy.table).vector);
  CHECK(encode_raw(a, kImage, 640, 480).vector != encode_raw(b, kImage, 640, 480).vector);
}

TEST_CASE("invert_symbolic") {
  std::mt19937_64 rng(23);
  const auto classes = numbered_names("c", 40), attrs = numbered_names("a", 12);
  const Vocabulary vocab(classes, attrs);
  const auto table = testing_support::random_table(rng, testing_support::concat(classes, attrs), 300);

  SUBCASE("round trip recovers the top five classes") {
    for (int trial = 0; trial < 20; ++trial) {
      const auto d = testing_support::random_detection(rng, 40, 12);
      const auto enc = encode_symbolic(d, kImage, 640, 480, vocab, table);
      const auto inv = invert_symbolic(enc, vocab, table);
      std::vector<std::string> expected;
      for (const auto& e : top_k(d.class_scores, 5)) expected.push_back(classes[e.index]);
      CHECK(inv.class_names == expected);
      CHECK(inv.global_box == normalize_global(d.box, 640, 480));
      CHECK(inv.relative_box == normalize_relative(d.box, kImage));
    }
  }
  SUBCASE("a lone attribute ranks first") {
    std::vector<double> a(12, 0.0);
    a[7] = 1.0;
    const Detection d{{0, 0, 5, 5}, testing_support::random_scores(rng, 40), a};
    const auto inv = invert_symbolic(encode_symbolic(d, kImage, 640, 480, vocab, table), vocab, table);
    REQUIRE_FALSE(inv.attribute_ranking.empty());
    CHECK(inv.attribute_ranking.front().index == 7);
    CHECK(inv.attribute_ranking.front().score == doctest::Approx(1.0));
    CHECK(inv.attribute_ranking.size() == 12);
  }
  SUBCASE("zero slots are unrecoverable") {
    ObjectEncoding enc{std::vector<double>(2048, 0.0), PrivacyTier::kPrivate};
    const auto inv = invert_symbolic(enc, vocab, table);
    CHECK(inv.class_names == std::vector<std::string>(5, std::string(kUnrecoverable)));
    CHECK(inv.attribute_ranking.empty());
  }
  SUBCASE("raw encodings are refused") {
    ObjectEncoding enc{std::vector<double>(2048, 0.0), PrivacyTier::kAtRisk};
    CHECK_THROWS_AS(invert_symbolic(enc, vocab, table), InvalidInput);
  }
}

TEST_CASE("tier names") {
  CHECK(parse_tier("private") == PrivacyTier::kPrivate);
  CHECK(parse_tier("AT_RISK") == PrivacyTier::kAtRisk);
  CHECK(parse_tier("not-private") == PrivacyTier::kNotPrivate);
  CHECK_THROWS_AS(parse_tier("secret"), InvalidInput);
  CHECK(PrivacyTier::kNotPrivate < PrivacyTier::kAtRisk);
  CHECK(PrivacyTier::kAtRisk < PrivacyTier::kPrivate);
}
