// SPDX-License-Identifier: Apache-2.0
//
// SYMV frame, all integers little-endian:
//
//   "SYMV" | u8 version=1 | u8 tier | u16 flags | u32 id_len | id bytes
//   | u32 num_objects | u32 dim=2048 | num_objects*dim f32 (row-major)
//   | [flags bit 0] u32 caption_count, then per caption u32 len | bytes
//
// A frame is self-delimiting, so `.symv` files may hold several back to back.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "symscene/codec.hpp"

namespace symscene {

inline constexpr std::uint8_t kFrameMagic[4] = {'S', 'Y', 'M', 'V'};
inline constexpr std::uint8_t kFrameVersion = 1;
inline constexpr std::uint16_t kFlagCaptions = 0x0001;
// Frame bytes before the scene id.
inline constexpr std::size_t kFramePreambleSize = 4 + 1 + 1 + 2 + 4;
// Smallest possible frame: empty id, no objects, no captions.
inline constexpr std::size_t kMinFrameSize = kFramePreambleSize + 4 + 4;

enum class FrameErrorCode {
  kBadMagic,
  kUnsupportedVersion,
  kBadTier,
  kBadFlags,
  kTruncated,
  kBadDimension,
  kTrailingBytes,
  kTooLarge,
};

class FrameError : public std::runtime_error {
 public:
  FrameError(FrameErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  FrameErrorCode code() const noexcept { return code_; }

 private:
  FrameErrorCode code_;
};

/// Serializes with values narrowed to 32-bit floats (round to nearest even).
std::vector<std::uint8_t> encode_frame(const SceneEncoding& enc);

/// Decodes exactly one frame spanning all of `bytes`.
SceneEncoding decode_frame(std::span<const std::uint8_t> bytes);

/// Decodes the frame at the start of `bytes`, reporting its size in `consumed`.
SceneEncoding decode_frame_prefix(std::span<const std::uint8_t> bytes, std::size_t& consumed);

/// Decodes a concatenation of frames (the `.symv` file layout).
std::vector<SceneEncoding> decode_frames(std::span<const std::uint8_t> bytes);

}  // namespace symscene
