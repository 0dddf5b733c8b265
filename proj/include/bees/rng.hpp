#pragma once

#include <cstdint>

namespace bees {

// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based random stream keyed by (seed, stream id).
//
// Draw n is mix64(key + (n + 1) * golden), i.e. the SplitMix64 sequence
// started at `key`, but addressable at any counter. Only integer arithmetic
// is involved, so the sequence is identical on every platform. Streams with
// different ids are decorrelated through the key derivation, and `split`
// derives child streams without touching the parent's counter.
class RngStream {
 public:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  constexpr RngStream(std::uint64_t seed = 0, std::uint64_t stream = 0) noexcept
      : seed_(seed), stream_(stream), key_(derive_key(seed, stream)) {}

  constexpr std::uint64_t seed() const noexcept { return seed_; }
  constexpr std::uint64_t stream() const noexcept { return stream_; }
  constexpr std::uint64_t counter() const noexcept { return counter_; }

  // Stateless access to draw `n`; does not advance the stream.
  constexpr std::uint64_t at(std::uint64_t n) const noexcept {
    return mix64(key_ + (n + 1) * kGolden);
  }

  constexpr std::uint64_t next_u64() noexcept { return at(counter_++); }

  // Uniform double in [0, 1) with 53 random bits.
  constexpr double next_uniform() noexcept { return to_unit(next_u64()); }

  static constexpr double to_unit(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }

  // Independent child stream. The child of (seed, s) with id c is keyed by
  // (seed, mix64(s) ^ c), so children of different parents do not collide.
  constexpr RngStream split(std::uint64_t child) const noexcept {
    return RngStream(seed_, mix64(stream_ + kGolden) ^ child);
  }

  friend constexpr bool operator==(const RngStream& a, const RngStream& b) noexcept {
    return a.seed_ == b.seed_ && a.stream_ == b.stream_ && a.counter_ == b.counter_;
  }

 private:
  static constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) noexcept {
    return mix64(mix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL + 0x2545f4914f6cdd1dULL));
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Fixed stream ids used by the simulator so that rewards, advice noise and
// learner sampling never share draws.
namespace streams {
inline constexpr std::uint64_t kAdversary = 1;
inline constexpr std::uint64_t kPoolNoise = 2;
inline constexpr std::uint64_t kLearner = 3;
}  // namespace streams

}  // namespace bees
