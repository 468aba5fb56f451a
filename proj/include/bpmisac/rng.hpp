#pragma once

#include <cstdint>
#include <limits>
#include <random>

#include "bpmisac/types.hpp"

namespace bpmisac {

/// Counter-based random stream.
///
/// Output i is a pure function of (key, i), so a stream can be split into
/// independent children by index without touching shared state. This is what
/// makes per-trial draws independent of thread scheduling. Satisfies
/// UniformRandomBitGenerator, so it plugs into the <random> distributions.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + (++counter_) * kGamma); }

  /// Child stream `index`; does not advance this stream.
  [[nodiscard]] RngStream split(std::uint64_t index) const;

  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  /// Standard circularly-symmetric complex Gaussian, E|z|^2 = 1.
  cplx complex_normal();

  std::uint64_t key() const { return key_; }

 private:
  struct RawKey {};
  RngStream(std::uint64_t key, RawKey) : key_(key) {}

  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  static std::uint64_t mix(std::uint64_t z);

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace bpmisac
