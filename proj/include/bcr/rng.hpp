// Counter-based, splittable random stream.
//
// Output i of a stream with key k is mix(k + (i + 1) * phi), where mix is the
// SplitMix64 finalizer and phi the 64-bit golden-ratio increment. A stream is
// therefore fully described by (key, counter) and streams for different
// ensemble members are obtained by deriving keys, never by sharing state.
#pragma once

#include <cstdint>
#include <limits>

namespace bcr {

/// Identifies one member of an ensemble: (master seed, run index).
struct RunKey {
  std::uint64_t master_seed = 0;
  std::uint64_t run_index = 0;

  friend bool operator==(const RunKey&, const RunKey&) = default;
};

class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}
  explicit CounterRng(RunKey run) noexcept : key_(derive_key(run)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    ++counter_;
    return mix(key_ + counter_ * kGolden);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  /// Independent child stream; does not advance this stream.
  CounterRng split(std::uint64_t stream_id) const noexcept {
    return CounterRng(mix(mix(key_) ^ (stream_id * kGolden + kSplitSalt)));
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  static std::uint64_t derive_key(RunKey run) noexcept {
    return mix(mix(run.master_seed) + (run.run_index + 1) * kRunStride);
  }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kRunStride = 0xD1B54A32D192ED03ULL;
  static constexpr std::uint64_t kSplitSalt = 0x8CB92BA72F3D8DD7ULL;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace bcr
