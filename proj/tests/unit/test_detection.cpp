// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "symscene/detection.hpp"
#include "symscene/error.hpp"
#include "test_support.hpp"

using namespace symscene;

namespace {

Detection det(BoundingBox box, std::vector<double> cls, std::vector<double> attrs = {0.0, 0.0}) {
  return {box, std::move(cls), std::move(attrs)};
}

}  // namespace

TEST_CASE("top_k ordering and ties") {
  const std::vector<double> s{0.1, 0.9, 0.5};
  CHECK(top_k(s, 2) == TopK{{1, 0.9}, {2, 0.5}});
  const std::vector<double> tied{0.3, 0.3, 0.3};
  CHECK(top_k(tied, 2) == TopK{{0, 0.3}, {1, 0.3}});
  CHECK(top_k(s, 3) == TopK{{1, 0.9}, {2, 0.5}, {0, 0.1}});
}

TEST_CASE("top_k keeps zero scores when few entries are positive") {
  const std::vector<double> s{0.0, 0.4, 0.0, 0.0};
  CHECK(top_k(s, 3) == TopK{{1, 0.4}, {0, 0.0}, {2, 0.0}});
}

TEST_CASE("top_k rejects k out of range") {
  const std::vector<double> s{0.1, 0.2};
  CHECK_THROWS_AS(top_k(s, 0), InvalidInput);
  CHECK_THROWS_AS(top_k(s, 3), InvalidInput);
}

TEST_CASE("top_k selection survives strictly increasing transforms") {
  std::mt19937_64 rng(5);
  const std::vector<double (*)(double)> transforms{
      [](double x) { return x * x; }, [](double x) { return std::sqrt(x); },
      [](double x) { return 0.5 * x + 0.25; }, [](double x) { return std::expm1(x) / std::expm1(1.0); }};
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = testing_support::random_scores(rng, 50);
    const auto base = top_k(s, 5);
    for (auto f : transforms) {
      std::vector<double> t(s.size());
      std::transform(s.begin(), s.end(), t.begin(), f);
      const auto moved = top_k(t, 5);
      for (std::size_t i = 0; i < 5; ++i) CHECK(moved[i].index == base[i].index);
    }
  }
}

TEST_CASE("normalized_topk_weights") {
  auto weights = [](std::vector<double> scores) {
    TopK t;
    for (std::size_t i = 0; i < scores.size(); ++i) t.push_back({i, scores[i]});
    return normalized_topk_weights(t);
  };
  const auto a = weights({0.4, 0.3, 0.2, 0.05, 0.05});
  const std::vector<double> expect_a{0.4, 0.3, 0.2, 0.05, 0.05};
  for (std::size_t i = 0; i < 5; ++i) CHECK(a[i] == doctest::Approx(expect_a[i]).epsilon(1e-15));
  // sum 2.0
  CHECK(weights({0.8, 0.4, 0.4, 0.2, 0.2}) == std::vector<double>{0.4, 0.2, 0.2, 0.1, 0.1});
  CHECK(weights({0, 0, 0, 0, 0}) == std::vector<double>{0.2, 0.2, 0.2, 0.2, 0.2});
}

TEST_CASE("normalized weights sum to one and ignore common scaling") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> c(1e-3, 10.0);
  for (int trial = 0; trial < 500; ++trial) {
    const auto s = testing_support::random_scores(rng, 40);
    const auto t = top_k(s, 5);
    const auto w = normalized_topk_weights(t);
    CHECK(std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0) < 1e-12);
    const double k = c(rng);
    TopK scaled = t;
    for (auto& e : scaled) e.score *= k;
    const auto ws = normalized_topk_weights(scaled);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(std::abs(ws[i] - w[i]) < 1e-12);
  }
}

TEST_CASE("detection validation") {
  CHECK_NOTHROW(validate(det({0, 0, 1, 1}, {0.1, 0.2, 0.3}), 3, 2));
  CHECK_THROWS_AS(validate(det({0, 0, 1, 1}, {0.1, 0.2}), 3, 2), InvalidInput);
  CHECK_THROWS_AS(validate(det({0, 0, 1, 1}, {0.1, 1.2, 0.3}), 3, 2), InvalidInput);
  CHECK_THROWS_AS(validate(det({0, 0, 1, 1}, {0.1, 0.2, 0.3}, {0.5}), 3, 2), InvalidInput);
}

TEST_CASE("vocabulary rejects empty and repeated names") {
  CHECK_NOTHROW(Vocabulary({"a", "b"}, {"x"}));
  CHECK_THROWS_AS(Vocabulary({"a", ""}, {"x"}), InvalidInput);
  CHECK_THROWS_AS(Vocabulary({"a", "a"}, {"x"}), InvalidInput);
}

TEST_CASE("select_objects") {
  SelectOptions opts{0.5, 0.5, 10};

  SUBCASE("nothing above threshold") {
    Scene s{"s", 640, 480, {det({0, 0, 10, 10}, {0.3, 0.1, 0.2}), det({5, 5, 9, 9}, {0.5, 0.1, 0.0})}, {}};
    CHECK(select_objects(s, opts).empty());
  }
  SUBCASE("single passing detection") {
    Scene s{"s", 640, 480, {det({0, 0, 10, 10}, {0.3, 0.1, 0.2}), det({5, 5, 9, 9}, {0.1, 0.7, 0.0})}, {}};
    CHECK(select_object_indices(s, opts) == std::vector<std::size_t>{1});
  }
  SUBCASE("overlapping pair loses its weaker member") {
    // IoU(0, 1) = 0.9; reference NMS on the passing boxes keeps {0, 2, 3}
    Scene s{"s", 640, 480,
            {det({0, 0, 100, 100}, {0.9, 0.0, 0.0}), det({0, 0, 100, 90}, {0.0, 0.8, 0.0}),
             det({200, 200, 300, 300}, {0.0, 0.0, 0.7}), det({400, 0, 500, 100}, {0.6, 0.0, 0.0})},
            {}};
    const std::vector<oracle::Box> boxes{{0, 0, 100, 100}, {0, 0, 100, 90}, {200, 200, 300, 300}, {400, 0, 500, 100}};
    CHECK(oracle::nms(boxes, {0.9, 0.8, 0.7, 0.6}, 0.5) == std::vector<std::size_t>{0, 2, 3});
    CHECK(select_object_indices(s, opts) == std::vector<std::size_t>{0, 2, 3});
  }
  SUBCASE("truncated to max_objects by confidence") {
    Scene s{"s", 640, 480,
            {det({0, 0, 10, 10}, {0.6, 0, 0}), det({20, 20, 30, 30}, {0.9, 0, 0}),
             det({40, 40, 50, 50}, {0.7, 0, 0})},
            {}};
    opts.max_objects = 2;
    CHECK(select_object_indices(s, opts) == std::vector<std::size_t>{1, 2});
  }
}

TEST_CASE("select_objects invariants on random scenes") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    Scene s{"r", 640, 480, {}, {}};
    const int n = static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) s.detections.push_back(testing_support::random_detection(rng, 10, 4));
    SelectOptions opts{u(rng), u(rng), 1 + rng() % 8};
    const auto out = select_objects(s, opts);
    CHECK(out.size() <= opts.max_objects);
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(out[i].confidence() > opts.score_threshold);
      if (i > 0) CHECK(out[i - 1].confidence() >= out[i].confidence());
    }
  }
}
