#include "epictrl/random.hpp"

namespace epictrl {

namespace {

SpaceTimeField scaled_noise(const SpaceTimeField& hi, UniformStream& rng, double lo_r, double hi_r, double scale) {
  SpaceTimeField out(hi.steps(), hi.cells());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out.values()[k] = scale * hi.values()[k] * (lo_r + (hi_r - lo_r) * rng.next());
  }
  return out;
}

}  // namespace

ControlPair random_controls(const ControlBounds& bounds, std::uint64_t seed) {
  UniformStream rng(seed);
  SpaceTimeField ui = scaled_noise(bounds.ui_max, rng, 0.0, 1.0, 1.0);
  SpaceTimeField ue = scaled_noise(bounds.ue_max, rng, 0.0, 1.0, 1.0);
  return {std::move(ui), std::move(ue)};
}

ControlPair random_direction(const ControlBounds& bounds, std::uint64_t seed) {
  UniformStream rng(seed);
  SpaceTimeField hi = scaled_noise(bounds.ui_max, rng, -1.0, 1.0, 0.5);
  SpaceTimeField he = scaled_noise(bounds.ue_max, rng, -1.0, 1.0, 0.5);
  return {std::move(hi), std::move(he)};
}

}  // namespace epictrl
