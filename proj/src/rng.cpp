#include "bpmisac/rng.hpp"

#include <cmath>

namespace bpmisac {

std::uint64_t RngStream::mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RngStream RngStream::split(std::uint64_t index) const {
  return RngStream(mix(key_ ^ mix(index + 0x243f6a8885a308d3ULL)), RawKey{});
}

cplx RngStream::complex_normal() {
  // Box-Muller; u1 in (0,1] keeps the log finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-std::log(u1));
  return {r * std::cos(2.0 * kPi * u2), r * std::sin(2.0 * kPi * u2)};
}

}  // namespace bpmisac
