#include "epictrl/norms.hpp"

#include <algorithm>
#include <cmath>

#include "epictrl/errors.hpp"

namespace epictrl {

namespace {

void check_same_length(const std::vector<EpidemicState>& a, const std::vector<EpidemicState>& b) {
  if (a.size() != b.size()) throw PreconditionError("trajectories have different numbers of levels");
}

double level_distance_sq(const EpidemicState& a, const EpidemicState& b) {
  double sum = 0.0;
  for (Compartment c : kCompartments) {
    const auto av = a[c].values();
    const auto bv = b[c].values();
    for (std::size_t k = 0; k < av.size(); ++k) {
      const double d = av[k] - bv[k];
      sum += d * d;
    }
  }
  return sum * a.s.mesh().cell_volume();
}

}  // namespace

double state_h_norm(const EpidemicState& x) {
  double sum = 0.0;
  for (Compartment c : kCompartments) sum += inner(x[c], x[c]);
  return std::sqrt(sum);
}

double sup_h_distance(const std::vector<EpidemicState>& a, const std::vector<EpidemicState>& b) {
  check_same_length(a, b);
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, level_distance_sq(a[k], b[k]));
  return std::sqrt(m);
}

double sup_h_norm(const std::vector<EpidemicState>& a) {
  double m = 0.0;
  for (const auto& x : a) m = std::max(m, state_h_norm(x));
  return m;
}

double y_distance(const Mesh& mesh, double dt, const std::vector<EpidemicState>& a,
                  const std::vector<EpidemicState>& b) {
  check_same_length(a, b);
  const DiffusionOperator unit = assemble_diffusion(mesh, Field(mesh, 1.0), 1.0, 1.0);
  double l2v = 0.0;
  Field d(mesh);
  Field ad(mesh);
  for (std::size_t k = 1; k < a.size(); ++k) {
    for (Compartment c : kCompartments) {
      for (std::size_t j = 0; j < mesh.num_cells(); ++j) d[j] = a[k][c][j] - b[k][c][j];
      unit.apply(d.values(), ad.values());
      l2v += dt * (inner(d, d) + inner(ad, d));
    }
  }
  return sup_h_distance(a, b) + std::sqrt(l2v);
}

double control_inner(const Mesh& mesh, double dt, const ControlPair& a, const ControlPair& b) {
  if (!a.ui.same_shape(b.ui) || !a.ue.same_shape(b.ue)) {
    throw PreconditionError("control pairs have different shapes");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < a.ui.size(); ++k) sum += a.ui.values()[k] * b.ui.values()[k];
  for (std::size_t k = 0; k < a.ue.size(); ++k) sum += a.ue.values()[k] * b.ue.values()[k];
  return sum * dt * mesh.cell_volume();
}

double control_norm(const Mesh& mesh, double dt, const ControlPair& u) {
  return std::sqrt(control_inner(mesh, dt, u, u));
}

double control_distance(const Mesh& mesh, double dt, const ControlPair& a, const ControlPair& b) {
  if (!a.ui.same_shape(b.ui) || !a.ue.same_shape(b.ue)) {
    throw PreconditionError("control pairs have different shapes");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < a.ui.size(); ++k) {
    const double d = a.ui.values()[k] - b.ui.values()[k];
    sum += d * d;
  }
  for (std::size_t k = 0; k < a.ue.size(); ++k) {
    const double d = a.ue.values()[k] - b.ue.values()[k];
    sum += d * d;
  }
  return std::sqrt(sum * dt * mesh.cell_volume());
}

double space_time_norm(const Mesh& mesh, double dt, const SpaceTimeField& f) {
  double sum = 0.0;
  for (double v : f.values()) sum += v * v;
  return std::sqrt(sum * dt * mesh.cell_volume());
}

}  // namespace epictrl
