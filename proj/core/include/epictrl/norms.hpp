#pragma once

#include <vector>

#include "epictrl/model.hpp"

namespace epictrl {

// Discrete norms by midpoint quadrature in space and the right-endpoint rule in time.

/// sqrt(sum over compartments of ||x_c||^2_H)
double state_h_norm(const EpidemicState& x);

/// max_k ||a_k - b_k||_H over the quadruplet (discrete C([0,T];H)).
double sup_h_distance(const std::vector<EpidemicState>& a, const std::vector<EpidemicState>& b);

/// max_k ||a_k||_H.
double sup_h_norm(const std::vector<EpidemicState>& a);

/// Discrete C([0,T];H) + L2(0,T;V) distance. The V-seminorm uses the
/// diffusion stencil with unit coefficient.
double y_distance(const Mesh& mesh, double dt, const std::vector<EpidemicState>& a,
                  const std::vector<EpidemicState>& b);

/// ||.||_{L2(Q)} over both control components with dt * cell_volume weights.
double control_norm(const Mesh& mesh, double dt, const ControlPair& u);
double control_distance(const Mesh& mesh, double dt, const ControlPair& a, const ControlPair& b);

/// L2(Q) inner product of two control-shaped pairs.
double control_inner(const Mesh& mesh, double dt, const ControlPair& a, const ControlPair& b);

/// L2(Q) norm of a single space-time field.
double space_time_norm(const Mesh& mesh, double dt, const SpaceTimeField& f);

}  // namespace epictrl
