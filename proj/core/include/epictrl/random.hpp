#pragma once

#include <cstdint>
#include <random>

#include "epictrl/model.hpp"

namespace epictrl {

/// Uniform doubles in [0, 1) from the top 53 bits of mt19937_64. Unlike
/// std::uniform_real_distribution the sequence is the same on every platform.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}
  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

/// Admissible controls u = u_max * r with r uniform in [0, 1].
ControlPair random_controls(const ControlBounds& bounds, std::uint64_t seed);

/// Direction h = (u_max / 2) * r with r uniform in [-1, 1]. From u = u_max/2,
/// u + eps h stays admissible for |eps| <= 1.
ControlPair random_direction(const ControlBounds& bounds, std::uint64_t seed);

}  // namespace epictrl
