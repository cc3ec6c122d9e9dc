// SPDX-License-Identifier: Apache-2.0
#include <cstring>
#include <random>

#include "doctest.h"
#include "symscene/error.hpp"
#include "symscene/wire.hpp"

using namespace symscene;

namespace {

SceneEncoding random_encoding(std::mt19937_64& rng, std::size_t n, bool captions) {
  std::uniform_real_distribution<float> u(-4.0f, 4.0f);
  SceneEncoding e;
  e.scene_id = "scene-" + std::to_string(rng() % 1000);
  e.tier = static_cast<PrivacyTier>(rng() % 3);
  e.values.resize(n * kEncodingDim);
  for (auto& v : e.values) v = u(rng);  // exactly representable as f32
  if (captions) e.captions = std::vector<std::string>{"a caption", "", "x"};
  return e;
}

FrameErrorCode error_code(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_frame(bytes);
  } catch (const FrameError& e) {
    return e.code();
  }
  FAIL("frame decoded");
  return FrameErrorCode::kTooLarge;
}

}  // namespace

TEST_CASE("empty frame golden bytes") {
  SceneEncoding e;
  e.scene_id = "a";
  e.tier = PrivacyTier::kPrivate;
  const std::vector<std::uint8_t> expected{'S', 'Y', 'M', 'V', 0x01, 0x02, 0x00, 0x00,
                                           0x01, 0x00, 0x00, 0x00, 'a',  0x00, 0x00, 0x00,
                                           0x00, 0x00, 0x08, 0x00, 0x00};
  CHECK(encode_frame(e) == expected);
  const auto back = decode_frame(expected);
  CHECK(back.scene_id == "a");
  CHECK(back.tier == PrivacyTier::kPrivate);
  CHECK(back.num_objects() == 0);
  CHECK_FALSE(back.captions);
}

TEST_CASE("frame sizes") {
  SceneEncoding e;
  e.scene_id = "a";
  e.values.assign(kEncodingDim, 0.0);
  CHECK(encode_frame(e).size() == 21 + 2048 * 4);
  e.captions = std::vector<std::string>{"hi"};
  const auto bytes = encode_frame(e);
  CHECK(bytes.size() == 21 + 2048 * 4 + 4 + 4 + 2);
  CHECK(bytes[6] == 0x01);  // captions flag
}

TEST_CASE("payload is little-endian f32") {
  SceneEncoding e;
  e.values.assign(kEncodingDim, 0.0);
  e.values[0] = 1.0;
  e.values[2047] = -2.0;
  const auto bytes = encode_frame(e);
  const std::size_t payload = kMinFrameSize;
  CHECK(bytes[payload + 0] == 0x00);
  CHECK(bytes[payload + 1] == 0x00);
  CHECK(bytes[payload + 2] == 0x80);
  CHECK(bytes[payload + 3] == 0x3f);
  const std::size_t last = payload + 2047 * 4;
  CHECK(bytes[last + 3] == 0xc0);
  CHECK(bytes.size() == payload + 2048 * 4);
}

TEST_CASE("round trip") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const auto e = random_encoding(rng, rng() % 4, trial % 2 == 0);
    const auto d = decode_frame(encode_frame(e));
    CHECK(d.scene_id == e.scene_id);
    CHECK(d.tier == e.tier);
    CHECK(d.values == e.values);
    CHECK(d.captions == e.captions);
  }
}

TEST_CASE("values are narrowed to f32") {
  SceneEncoding e;
  e.values.assign(kEncodingDim, 0.1);
  const auto d = decode_frame(encode_frame(e));
  CHECK(d.values[0] == static_cast<double>(0.1f));
}

TEST_CASE("malformed frames") {
  SceneEncoding e;
  e.scene_id = "abc";
  e.values.assign(kEncodingDim, 1.0);
  const auto good = encode_frame(e);

  SUBCASE("bad magic") {
    auto b = good;
    b[0] = 'X';
    CHECK(error_code(b) == FrameErrorCode::kBadMagic);
  }
  SUBCASE("version") {
    auto b = good;
    b[4] = 2;
    CHECK(error_code(b) == FrameErrorCode::kUnsupportedVersion);
  }
  SUBCASE("tier") {
    auto b = good;
    b[5] = 3;
    CHECK(error_code(b) == FrameErrorCode::kBadTier);
  }
  SUBCASE("unknown flags") {
    auto b = good;
    b[7] = 0x80;
    CHECK(error_code(b) == FrameErrorCode::kBadFlags);
  }
  SUBCASE("dimension") {
    auto b = good;
    b[kFramePreambleSize + 3 + 4] = 0x00;
    b[kFramePreambleSize + 3 + 5] = 0x04;  // 1024
    CHECK(error_code(b) == FrameErrorCode::kBadDimension);
  }
  SUBCASE("truncated payload names the offset") {
    auto b = good;
    b.resize(b.size() - 1);
    try {
      decode_frame(b);
      FAIL("decoded");
    } catch (const FrameError& err) {
      CHECK(err.code() == FrameErrorCode::kTruncated);
      CHECK(std::string(err.what()).find("offset 23") != std::string::npos);
      CHECK(std::string(err.what()).find(std::to_string(good.size())) != std::string::npos);
    }
  }
  SUBCASE("trailing bytes") {
    auto b = good;
    b.push_back(0);
    CHECK(error_code(b) == FrameErrorCode::kTrailingBytes);
  }
  SUBCASE("huge object count does not allocate") {
    auto b = good;
    b[kFramePreambleSize + 3] = 0xff;
    b[kFramePreambleSize + 4] = 0xff;
    b[kFramePreambleSize + 5] = 0xff;
    b[kFramePreambleSize + 6] = 0xff;
    CHECK(error_code(b) == FrameErrorCode::kTruncated);
  }
  SUBCASE("every strict prefix is rejected") {
    for (std::size_t n = 0; n < kMinFrameSize + 3; ++n) {
      const std::vector<std::uint8_t> b(good.begin(), good.begin() + static_cast<long>(n));
      CHECK_THROWS_AS(decode_frame(b), FrameError);
    }
  }
}

TEST_CASE("concatenated frames") {
  std::mt19937_64 rng(47);
  std::vector<SceneEncoding> frames;
  std::vector<std::uint8_t> all;
  for (int i = 0; i < 3; ++i) {
    frames.push_back(random_encoding(rng, static_cast<std::size_t>(i), i == 1));
    const auto b = encode_frame(frames.back());
    all.insert(all.end(), b.begin(), b.end());
  }
  const auto back = decode_frames(all);
  REQUIRE(back.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(back[i].values == frames[i].values);
  CHECK(decode_frames({}).empty());
  all.pop_back();
  CHECK_THROWS_AS(decode_frames(all), FrameError);
}

TEST_CASE("encoder rejects ragged matrices") {
  SceneEncoding e;
  e.values.assign(100, 0.0);
  CHECK_THROWS_AS(encode_frame(e), InvalidInput);
}

TEST_CASE("fuzzed frames never crash") {
  std::mt19937_64 rng(53);
  const auto base = encode_frame(random_encoding(rng, 1, true));
  for (int i = 0; i < 2000; ++i) {
    auto b = base;
    const int flips = 1 + static_cast<int>(rng() % 4);
    for (int f = 0; f < flips; ++f) b[rng() % b.size()] = static_cast<std::uint8_t>(rng());
    if (rng() % 3 == 0) b.resize(rng() % b.size());
    try {
      const auto d = decode_frame(b);
      CHECK(d.values.size() % kEncodingDim == 0);
    } catch (const FrameError&) {
    }
  }
}
