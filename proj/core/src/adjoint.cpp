#include "epictrl/adjoint.hpp"

#include <algorithm>
#include <cmath>

#include "epictrl/errors.hpp"

namespace epictrl {

TerminalData terminal_conditions(const Field& e_final, const Field& i_final, double lambda) {
  const Mesh& mesh = e_final.mesh();
  TerminalData out{AdjointState::zeros(mesh), 0};
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const double excess = e_final[c] + i_final[c] - lambda;
    if (std::abs(excess) <= kKinkTolerance) ++out.kink_cells;
    const double positive = std::max(excess, 0.0);
    out.state.q[c] = positive;
    out.state.w[c] = positive;
  }
  return out;
}

AdjointTrajectory solve_adjoint(const Scenario& sc, const Trajectory& fwd, const ControlPair& u) {
  const std::size_t steps = sc.time.steps;
  if (fwd.size() != steps + 1) throw PreconditionError("forward trajectory is missing levels");
  validate_controls(sc, u);

  const Mesh& mesh = sc.mesh;
  const std::size_t cells = mesh.num_cells();
  const auto& rates = sc.rates;

  TerminalData terminal = terminal_conditions(fwd.back().e, fwd.back().i, sc.threshold.lambda);
  AdjointTrajectory adj{sc.time, std::vector<AdjointState>(steps + 1, AdjointState::zeros(mesh)),
                        terminal.kink_cells};
  adj.levels[steps] = std::move(terminal.state);
  if (steps == 0) return adj;

  const double inv_dt = 1.0 / sc.time.dt();
  CompartmentOperators ops(sc);
  ShiftedSystem sys_p(inv_dt);
  ShiftedSystem sys_q(inv_dt);
  ShiftedSystem sys_w(inv_dt);
  ShiftedSystem sys_z(inv_dt);
  Field rhs(mesh);
  Field absorption(mesh);

  for (std::size_t n = steps; n-- > 0;) {
    const AdjointState& old = adj.levels[n + 1];
    AdjointState& cur = adj.levels[n];
    const EpidemicState& x = fwd[n];
    const Field& s_next = fwd[n + 1].s;
    const auto ui = u.ui.at_step(n);
    const auto ue = u.ue.at_step(n);
    const double gamma = sc.waning.at(n);

    for (std::size_t c = 0; c < cells; ++c) rhs[c] = old.z[c] * inv_dt + gamma * old.p[c];
    sys_z.with_constant(ops.at(Compartment::R, n), gamma).solve(rhs.values(), cur.z.values());

    for (std::size_t c = 0; c < cells; ++c) {
      rhs[c] = old.w[c] * inv_dt + rates.phi_r * cur.z[c] - ui[c] * s_next[c] * (old.p[c] - old.q[c]);
    }
    sys_w.with_constant(ops.at(Compartment::I, n), rates.phi_r).solve(rhs.values(), cur.w.values());

    for (std::size_t c = 0; c < cells; ++c) {
      rhs[c] = old.q[c] * inv_dt + rates.sigma * cur.w[c] + rates.phi_e * cur.z[c] -
               ue[c] * s_next[c] * (old.p[c] - old.q[c]);
    }
    sys_q.with_constant(ops.at(Compartment::E, n), rates.sigma + rates.phi_e)
        .solve(rhs.values(), cur.q.values());

    for (std::size_t c = 0; c < cells; ++c) {
      absorption[c] = ui[c] * x.i[c] + ue[c] * x.e[c];
      rhs[c] = old.p[c] * inv_dt + absorption[c] * cur.q[c];
    }
    sys_p.with_diagonal(ops.at(Compartment::S, n), absorption.values()).solve(rhs.values(), cur.p.values());
  }
  return adj;
}

}  // namespace epictrl
