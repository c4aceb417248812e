#include "epictrl/sensitivity.hpp"

#include <cmath>

#include "epictrl/errors.hpp"
#include "epictrl/norms.hpp"
#include "epictrl/parallel.hpp"

namespace epictrl {

TangentTrajectory solve_tangent(const Scenario& sc, const Trajectory& base,
                                const ControlPair& u, const ControlVariation& h) {
  const std::size_t steps = sc.time.steps;
  if (base.size() != steps + 1) throw PreconditionError("base trajectory has the wrong number of levels");
  if (!h.ui.same_shape(u.ui) || !h.ue.same_shape(u.ue) || !u.ui.same_shape(sc.bounds.ui_max)) {
    throw ConfigError("variation shape does not match the base controls");
  }
  const Mesh& mesh = sc.mesh;
  const std::size_t cells = mesh.num_cells();
  const auto& rates = sc.rates;

  TangentTrajectory tan{sc.time, {}};
  tan.levels.reserve(steps + 1);
  tan.levels.push_back(EpidemicState::zeros(mesh));
  if (steps == 0) return tan;

  const double inv_dt = 1.0 / sc.time.dt();
  CompartmentOperators ops(sc);
  ShiftedSystem sys_s(inv_dt);
  ShiftedSystem sys_e(inv_dt);
  ShiftedSystem sys_i(inv_dt);
  ShiftedSystem sys_r(inv_dt);
  Field absorption(mesh);
  Field d_absorption(mesh);
  Field rhs(mesh);

  for (std::size_t n = 0; n < steps; ++n) {
    const EpidemicState& x = base[n];
    const EpidemicState& x1 = base[n + 1];
    const EpidemicState& d = tan.levels.back();
    const auto ui = u.ui.at_step(n);
    const auto ue = u.ue.at_step(n);
    const auto hi = h.ui.at_step(n);
    const auto he = h.ue.at_step(n);
    const double gamma = sc.waning.at(n);
    EpidemicState next = EpidemicState::zeros(mesh);

    // xi: derivative of the s-update; d(absorption) = h_i i + u_i iota + h_e e + u_e eta.
    for (std::size_t c = 0; c < cells; ++c) {
      absorption[c] = ui[c] * x.i[c] + ue[c] * x.e[c];
      d_absorption[c] = hi[c] * x.i[c] + ui[c] * d.i[c] + he[c] * x.e[c] + ue[c] * d.e[c];
      rhs[c] = d.s[c] * inv_dt + gamma * d.r[c] - d_absorption[c] * x1.s[c];
    }
    sys_s.with_diagonal(ops.at(Compartment::S, n), absorption.values()).solve(rhs.values(), next.s.values());

    // eta: derivative of the infection flux absorption * s_{n+1}.
    for (std::size_t c = 0; c < cells; ++c) {
      const double d_infection = d_absorption[c] * x1.s[c] + absorption[c] * next.s[c];
      rhs[c] = d.e[c] * inv_dt + d_infection;
    }
    sys_e.with_constant(ops.at(Compartment::E, n), rates.sigma + rates.phi_e)
        .solve(rhs.values(), next.e.values());

    for (std::size_t c = 0; c < cells; ++c) rhs[c] = d.i[c] * inv_dt + rates.sigma * next.e[c];
    sys_i.with_constant(ops.at(Compartment::I, n), rates.phi_r).solve(rhs.values(), next.i.values());

    for (std::size_t c = 0; c < cells; ++c) {
      rhs[c] = d.r[c] * inv_dt + rates.phi_r * next.i[c] + rates.phi_e * next.e[c] - gamma * d.r[c];
    }
    sys_r.with_constant(ops.at(Compartment::R, n), 0.0).solve(rhs.values(), next.r.values());

    tan.levels.push_back(std::move(next));
  }
  return tan;
}

ControlPair perturbed(const ControlPair& u, const ControlVariation& h, double eps) {
  ControlPair out = u;
  for (std::size_t k = 0; k < out.ui.size(); ++k) out.ui.values()[k] += eps * h.ui.values()[k];
  for (std::size_t k = 0; k < out.ue.size(); ++k) out.ue.values()[k] += eps * h.ue.values()[k];
  return out;
}

std::vector<RemainderRow> frechet_remainder_check(const Scenario& sc, const ControlPair& u,
                                                  const ControlVariation& h,
                                                  const std::vector<double>& epsilons,
                                                  unsigned max_threads) {
  validate_controls(sc, u);
  std::vector<double> usable;
  for (double eps : epsilons) {
    if (is_admissible(sc.bounds, perturbed(u, h, eps)) &&
        is_admissible(sc.bounds, perturbed(u, h, 0.5 * eps))) {
      usable.push_back(eps);
    }
  }
  if (usable.empty()) throw PreconditionError("u + eps h is inadmissible for every requested eps");

  const Trajectory base = solve_forward(sc, u);
  const TangentTrajectory tangent = solve_tangent(sc, base, u, h);

  const auto remainder = [&](double eps) {
    const Trajectory moved = solve_forward(sc, perturbed(u, h, eps));
    std::vector<EpidemicState> linear = base.levels;
    for (std::size_t k = 0; k < linear.size(); ++k) {
      for (Compartment c : kCompartments) {
        auto v = linear[k][c].values();
        const auto t = tangent[k][c].values();
        for (std::size_t j = 0; j < v.size(); ++j) v[j] += eps * t[j];
      }
    }
    return sup_h_distance(moved.levels, linear);
  };

  std::vector<RemainderRow> rows(usable.size());
  parallel_for(usable.size(), max_threads, [&](std::size_t k) {
    RemainderRow& row = rows[k];
    row.epsilon = usable[k];
    row.remainder = remainder(usable[k]);
    row.remainder_half = remainder(0.5 * usable[k]);
    row.ratio = row.remainder_half > 0.0 ? row.remainder / row.remainder_half : 0.0;
    row.remainder_over_eps = row.remainder / usable[k];
  });
  return rows;
}

}  // namespace epictrl
