// SPDX-License-Identifier: Apache-2.0
//
// Edge client and cloud-side validating server. On the stream every frame is
// preceded by a u32 little-endian byte length. The server answers each frame
// with one status byte, followed on acceptance by the u32 LE object count.
#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "symscene/codec.hpp"

namespace symscene {

enum class FrameStatus : std::uint8_t {
  kAccepted = 0,
  kTierRejected = 1,
  kMalformed = 2,
  kTooLarge = 3,
};

std::string_view to_string(FrameStatus status);

struct ServerPolicy {
  PrivacyTier minimum_tier = PrivacyTier::kPrivate;
  std::size_t max_objects = 100;
  std::size_t max_frame_bytes = std::size_t{64} << 20;
};

/// Throws ConfigError on a zero object limit or a frame limit below the
/// smallest valid frame.
void validate(const ServerPolicy& policy);

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;
};

/// "host:port"; an empty host means all interfaces.
Endpoint parse_endpoint(const std::string& text);

/// Receives each accepted frame, decoded and as raw bytes. Called concurrently
/// from different connections.
using FrameSink = std::function<void(const SceneEncoding&, std::span<const std::uint8_t>)>;

/// Writes each frame verbatim to `dir/frame_NNNNNN.symv`, numbered in arrival order.
FrameSink make_recording_sink(const std::filesystem::path& dir);

struct ServerStats {
  std::size_t connections = 0;
  std::size_t accepted = 0;
  std::size_t tier_rejected = 0;
  std::size_t malformed = 0;
  std::size_t too_large = 0;
};

class Server {
 public:
  Server(Endpoint bind, ServerPolicy policy, FrameSink sink);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds, listens and starts accepting on a background thread.
  void start();
  /// Closes the listener and every open connection, then joins all threads.
  void stop();
  /// Blocks until stop() is called from another thread.
  void wait();

  /// Bound port; useful after binding port 0.
  std::uint16_t port() const;
  ServerStats stats() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class TransportError : public std::runtime_error {
 public:
  TransportError(const std::string& what, std::size_t frame_index)
      : std::runtime_error(what + " (at frame " + std::to_string(frame_index) + ")"),
        frame_index_(frame_index) {}
  std::size_t frame_index() const noexcept { return frame_index_; }

 private:
  std::size_t frame_index_;
};

struct SendResult {
  FrameStatus status = FrameStatus::kMalformed;
  std::optional<std::uint32_t> num_objects;  // echoed on acceptance
};

/// Sends pre-encoded frames in order over one connection and collects the
/// server's replies. Throws TransportError naming the frame being handled.
std::vector<SendResult> send_frame_bytes(const Endpoint& server,
                                         std::span<const std::vector<std::uint8_t>> frames);

std::vector<SendResult> send(const Endpoint& server, std::span<const SceneEncoding> scenes);

}  // namespace symscene
