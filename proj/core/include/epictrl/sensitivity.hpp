#pragma once

#include <vector>

#include "epictrl/forward.hpp"

namespace epictrl {

/// Direction (h_i, h_e) in control space; same shape as ControlPair, any sign.
using ControlVariation = ControlPair;

/// Integrates the linearized state system around `base` for the variation h.
///
/// The discretization is the exact derivative of ForwardIntegrator::step: the
/// same ordering, matrices and implicit/explicit split, with the frozen
/// coefficients u_i i_n, u_e e_n, u_i s_{n+1}, u_e s_{n+1} and the source
/// (s_{n+1} i_n) h_i + (s_{n+1} e_n) h_e read from the base trajectory.
/// Level 0 is zero.
TangentTrajectory solve_tangent(const Scenario& scenario, const Trajectory& base,
                                const ControlPair& base_controls, const ControlVariation& variation);

struct RemainderRow {
  double epsilon = 0.0;
  double remainder = 0.0;       ///< ||S(u + eps h) - S(u) - eps * tangent||, sup in time of H-norm
  double remainder_half = 0.0;  ///< same at eps / 2
  double ratio = 0.0;           ///< remainder / remainder_half (about 4 for a quadratic remainder)
  double remainder_over_eps = 0.0;
};

/// Second-order remainder test of the control-to-state map. Epsilons for which
/// u + eps h leaves the admissible box are dropped; throws PreconditionError
/// if none is left.
std::vector<RemainderRow> frechet_remainder_check(const Scenario& scenario,
                                                  const ControlPair& base_controls,
                                                  const ControlVariation& variation,
                                                  const std::vector<double>& epsilons,
                                                  unsigned max_threads = 1);

/// u + eps h, without admissibility checks.
ControlPair perturbed(const ControlPair& u, const ControlVariation& h, double eps);

}  // namespace epictrl
