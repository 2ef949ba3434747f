#pragma once

#include <cstdint>

namespace nuq {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Counter-based random stream.
///
/// A stream is identified by (seed, stream_id); its key is
/// mix64(mix64(seed) + stream_id) and the n-th raw output is
/// mix64(key + n * 0x9E3779B97F4A7C15). Streams are independent of each
/// other and of evaluation order, so sample index i can always be mapped to
/// stream i regardless of how work is split across workers.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  /// Standard normal via the Box-Muller transform; draws come in cached pairs.
  double normal() noexcept;

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace nuq
