// SPDX-License-Identifier: Apache-2.0
#include "symscene/wire.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <limits>

#include "symscene/error.hpp"

namespace symscene {

namespace {

constexpr std::uint64_t kU32Max = std::numeric_limits<std::uint32_t>::max();

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void bytes(std::string_view s) { out_.insert(out_.end(), s.begin(), s.end()); }

 private:
  std::vector<std::uint8_t>& out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return in_.size() - pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw FrameError(FrameErrorCode::kTruncated,
                       std::string("truncated frame: ") + what + " needs " + std::to_string(n) +
                           " bytes at offset " + std::to_string(pos_) + ", frame has " +
                           std::to_string(in_.size()) + " (expected at least " +
                           std::to_string(pos_ + n) + ")");
    }
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return in_[pos_++];
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    const auto v = static_cast<std::uint16_t>(in_[pos_] | (in_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  void skip(std::size_t n, const char* what) {
    need(n, what);
    pos_ += n;
  }
  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

std::uint32_t checked_u32(std::size_t n, const char* what) {
  if (n > kU32Max) throw FrameError(FrameErrorCode::kTooLarge, std::string(what) + " exceeds 2^32-1");
  return static_cast<std::uint32_t>(n);
}

}  // namespace

std::vector<std::uint8_t> encode_frame(const SceneEncoding& enc) {
  if (enc.values.size() % kEncodingDim != 0) {
    throw InvalidInput("scene encoding is not a whole number of 2048-slot rows");
  }
  if (static_cast<std::uint8_t>(enc.tier) > static_cast<std::uint8_t>(PrivacyTier::kPrivate)) {
    throw InvalidInput("scene encoding has an invalid tier");
  }
  const auto id_len = checked_u32(enc.scene_id.size(), "scene id length");
  const auto num_objects = checked_u32(enc.num_objects(), "object count");

  std::vector<std::uint8_t> out;
  out.reserve(kMinFrameSize + enc.scene_id.size() + enc.values.size() * 4);
  Writer w(out);
  for (auto b : kFrameMagic) w.u8(b);
  w.u8(kFrameVersion);
  w.u8(static_cast<std::uint8_t>(enc.tier));
  w.u16(enc.captions ? kFlagCaptions : 0);
  w.u32(id_len);
  w.bytes(enc.scene_id);
  w.u32(num_objects);
  w.u32(static_cast<std::uint32_t>(kEncodingDim));
  for (double v : enc.values) w.f32(static_cast<float>(v));
  if (enc.captions) {
    w.u32(checked_u32(enc.captions->size(), "caption count"));
    for (const auto& c : *enc.captions) {
      w.u32(checked_u32(c.size(), "caption length"));
      w.bytes(c);
    }
  }
  return out;
}

SceneEncoding decode_frame_prefix(std::span<const std::uint8_t> bytes, std::size_t& consumed) {
  Reader r(bytes);
  r.need(4, "magic");
  if (!std::equal(std::begin(kFrameMagic), std::end(kFrameMagic), bytes.begin())) {
    throw FrameError(FrameErrorCode::kBadMagic, "bad frame magic");
  }
  r.str(4, "magic");
  const auto version = r.u8("version");
  if (version != kFrameVersion) {
    throw FrameError(FrameErrorCode::kUnsupportedVersion,
                     "unsupported frame version " + std::to_string(version));
  }
  const auto tier = r.u8("tier");
  if (tier > static_cast<std::uint8_t>(PrivacyTier::kPrivate)) {
    throw FrameError(FrameErrorCode::kBadTier, "unknown privacy tier " + std::to_string(tier));
  }
  const auto flags = r.u16("flags");
  if ((flags & ~kFlagCaptions) != 0) {
    throw FrameError(FrameErrorCode::kBadFlags, "unknown frame flags " + std::to_string(flags));
  }

  SceneEncoding enc;
  enc.tier = static_cast<PrivacyTier>(tier);
  const auto id_len = r.u32("scene id length");
  enc.scene_id = r.str(id_len, "scene id");
  const auto num_objects = r.u32("object count");
  const auto dim = r.u32("dim");
  if (dim != kEncodingDim) {
    throw FrameError(FrameErrorCode::kBadDimension,
                     "frame dim " + std::to_string(dim) + ", expected 2048");
  }
  const std::uint64_t payload_bytes = std::uint64_t{num_objects} * kEncodingDim * 4;
  if (payload_bytes > r.remaining()) r.need(static_cast<std::size_t>(payload_bytes), "payload");
  enc.values.resize(static_cast<std::size_t>(num_objects) * kEncodingDim);
  const std::uint8_t* p = bytes.data() + r.offset();
  for (std::size_t i = 0; i < enc.values.size(); ++i, p += 4) {
    std::uint32_t u = 0;
    for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(p[b]) << (8 * b);
    enc.values[i] = std::bit_cast<float>(u);
  }
  r.skip(static_cast<std::size_t>(payload_bytes), "payload");

  if (flags & kFlagCaptions) {
    const auto count = r.u32("caption count");
    // Each caption costs at least its 4-byte length.
    if (std::uint64_t{count} * 4 > r.remaining()) r.need(std::size_t{count} * 4, "captions");
    std::vector<std::string> captions;
    captions.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      const auto len = r.u32("caption length");
      captions.push_back(r.str(len, "caption"));
    }
    enc.captions = std::move(captions);
  }
  consumed = r.offset();
  return enc;
}

SceneEncoding decode_frame(std::span<const std::uint8_t> bytes) {
  std::size_t consumed = 0;
  auto enc = decode_frame_prefix(bytes, consumed);
  if (consumed != bytes.size()) {
    throw FrameError(FrameErrorCode::kTrailingBytes,
                     "frame declares " + std::to_string(consumed) + " bytes, got " +
                         std::to_string(bytes.size()));
  }
  return enc;
}

std::vector<SceneEncoding> decode_frames(std::span<const std::uint8_t> bytes) {
  std::vector<SceneEncoding> out;
  while (!bytes.empty()) {
    std::size_t consumed = 0;
    out.push_back(decode_frame_prefix(bytes, consumed));
    bytes = bytes.subspan(consumed);
  }
  return out;
}

}  // namespace symscene
