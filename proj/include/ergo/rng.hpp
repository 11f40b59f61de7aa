#pragma once

#include <cstdint>
#include <limits>

namespace ergo {

// SplitMix64 used both as the generator and as the seed mixer.  Stream r of a
// master seed starts from mix(master) ^ mix(r + 1), so replica r draws the same
// numbers no matter which thread runs it or in which order.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state = 0) : state_(state) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

inline SplitMix64 stream(std::uint64_t master, std::uint64_t index) {
  return SplitMix64(SplitMix64::mix(master ^ 0xD1B54A32D192ED03ULL) ^
                    SplitMix64::mix(index + 1));
}

// Uniform on [0,1) with 53 random bits.
template <typename Rng>
double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace ergo
