#include "epictrl/optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "epictrl/errors.hpp"
#include "epictrl/norms.hpp"
#include "epictrl/parallel.hpp"
#include "epictrl/sensitivity.hpp"

namespace epictrl {

CostBreakdown evaluate_cost(const Scenario& sc, const Trajectory& traj, const ControlPair& u) {
  if (traj.size() != sc.time.steps + 1) throw PreconditionError("trajectory does not match the time grid");
  const Mesh& mesh = sc.mesh;
  const EpidemicState& last = traj.back();
  double terminal = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const double excess = std::max(last.e[c] + last.i[c] - sc.threshold.lambda, 0.0);
    terminal += excess * excess;
  }
  CostBreakdown cost;
  cost.terminal_term = 0.5 * mesh.cell_volume() * terminal;
  cost.control_term = 0.5 * control_inner(mesh, sc.time.dt(), u, u);
  cost.total = cost.terminal_term + cost.control_term;
  return cost;
}

GradientPair reduced_gradient(const Trajectory& fwd, const AdjointTrajectory& adj, const ControlPair& u) {
  const std::size_t steps = u.ui.steps();
  if (fwd.size() != steps + 1 || adj.size() != steps + 1) {
    throw PreconditionError("forward/adjoint trajectories do not match the control shape");
  }
  GradientPair g{u.ui, u.ue};
  const std::size_t cells = u.ui.cells();
  for (std::size_t n = 0; n < steps; ++n) {
    const EpidemicState& x = fwd[n];
    const Field& s_next = fwd[n + 1].s;
    const AdjointState& a = adj[n];
    for (std::size_t c = 0; c < cells; ++c) {
      const double q_minus_p = a.q[c] - a.p[c];
      g.gi(n, c) += s_next[c] * x.i[c] * q_minus_p;
      g.ge(n, c) += s_next[c] * x.e[c] * q_minus_p;
    }
  }
  return g;
}

double gradient_dot(const Mesh& mesh, double dt, const GradientPair& g, const ControlPair& h) {
  return control_inner(mesh, dt, ControlPair{g.gi, g.ge}, h);
}

ControlPair project_controls(const ControlPair& candidate, const ControlBounds& bounds) {
  if (!candidate.ui.same_shape(bounds.ui_max) || !candidate.ue.same_shape(bounds.ue_max)) {
    throw ConfigError("candidate controls do not match the bounds");
  }
  ControlPair out = candidate;
  const auto clamp = [](SpaceTimeField& v, const SpaceTimeField& hi) {
    for (std::size_t k = 0; k < v.size(); ++k) {
      v.values()[k] = std::clamp(v.values()[k], 0.0, hi.values()[k]);
    }
  };
  clamp(out.ui, bounds.ui_max);
  clamp(out.ue, bounds.ue_max);
  return out;
}

namespace {

ControlPair gradient_step(const ControlPair& u, const GradientPair& g, double alpha) {
  ControlPair out = u;
  for (std::size_t k = 0; k < out.ui.size(); ++k) out.ui.values()[k] -= alpha * g.gi.values()[k];
  for (std::size_t k = 0; k < out.ue.size(); ++k) out.ue.values()[k] -= alpha * g.ge.values()[k];
  return out;
}

}  // namespace

double vi_residual(const Mesh& mesh, double dt, const ControlPair& u, const GradientPair& g,
                   const ControlBounds& bounds) {
  const ControlPair projected = project_controls(gradient_step(u, g, 1.0), bounds);
  return control_distance(mesh, dt, u, projected);
}

double vi_normalization(const Mesh& mesh, double dt, const ControlBounds& bounds) {
  return control_norm(mesh, dt, ControlPair{bounds.ui_max, bounds.ue_max}) + 1.0;
}

double projection_fixed_point_residual(const Scenario& sc, const Trajectory& fwd,
                                       const AdjointTrajectory& adj, const ControlPair& u) {
  ControlPair target{SpaceTimeField(u.ui.steps(), u.ui.cells()), SpaceTimeField(u.ue.steps(), u.ue.cells())};
  for (std::size_t n = 0; n < u.ui.steps(); ++n) {
    for (std::size_t c = 0; c < u.ui.cells(); ++c) {
      const double p_minus_q = adj[n].p[c] - adj[n].q[c];
      target.ui(n, c) = fwd[n + 1].s[c] * fwd[n].i[c] * p_minus_q;
      target.ue(n, c) = fwd[n + 1].s[c] * fwd[n].e[c] * p_minus_q;
    }
  }
  return control_distance(sc.mesh, sc.time.dt(), u, project_controls(target, sc.bounds));
}

std::string_view termination_name(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::MaxIterations: return "max_iterations";
    case Termination::StepCollapse: return "step_collapse";
  }
  return "unknown";
}

OptimizationReport projected_gradient_descent(const Scenario& sc, const ControlPair& initial,
                                              const OptimizerOptions& opt) {
  validate_controls(sc, initial);
  const Mesh& mesh = sc.mesh;
  const double dt = sc.time.dt();
  const double scale = vi_normalization(mesh, dt, sc.bounds);

  OptimizationReport report;
  ControlPair u = initial;
  Trajectory traj = solve_forward(sc, u);
  ++report.forward_solves;
  CostBreakdown cost = evaluate_cost(sc, traj, u);
  double accepted_step = 0.0;
  std::size_t backtracks = 0;

  for (std::size_t k = 0;; ++k) {
    const AdjointTrajectory adj = solve_adjoint(sc, traj, u);
    ++report.adjoint_solves;
    const GradientPair g = reduced_gradient(traj, adj, u);
    const double residual = vi_residual(mesh, dt, u, g, sc.bounds) / scale;
    report.iterations.push_back({k, cost, residual, accepted_step, backtracks});
    report.final_vi_residual = residual;
    report.fixed_point_residual = projection_fixed_point_residual(sc, traj, adj, u) / scale;

    if (residual <= opt.vi_tolerance) {
      report.reason = Termination::Converged;
      break;
    }
    if (k >= opt.max_iters) {
      report.reason = Termination::MaxIterations;
      break;
    }

    double alpha = opt.initial_step;
    backtracks = 0;
    bool accepted = false;
    while (alpha >= opt.min_step) {
      ControlPair trial = project_controls(gradient_step(u, g, alpha), sc.bounds);
      // Armijo along the projection arc: J(trial) <= J(u) + c <g, trial - u>.
      const double predicted = gradient_dot(mesh, dt, g, perturbed(trial, u, -1.0));
      Trajectory trial_traj = solve_forward(sc, trial);
      ++report.forward_solves;
      const CostBreakdown trial_cost = evaluate_cost(sc, trial_traj, trial);
      if (trial_cost.total <= cost.total + opt.armijo_c * predicted && trial_cost.total <= cost.total) {
        u = std::move(trial);
        traj = std::move(trial_traj);
        cost = trial_cost;
        accepted = true;
        break;
      }
      alpha *= opt.backtrack_factor;
      ++backtracks;
    }
    if (!accepted) {
      report.reason = Termination::StepCollapse;
      break;
    }
    accepted_step = alpha;
  }
  report.controls = std::move(u);
  return report;
}

double fd_directional_derivative(const Scenario& sc, const ControlPair& u, const ControlPair& h,
                                 double epsilon, double* used_epsilon, unsigned max_threads) {
  validate_controls(sc, u);
  double eps = epsilon;
  int halvings = 0;
  while (!(is_admissible(sc.bounds, perturbed(u, h, eps)) && is_admissible(sc.bounds, perturbed(u, h, -eps)))) {
    eps *= 0.5;
    if (++halvings > 60) throw PreconditionError("u +/- eps h is inadmissible for every eps tried");
  }
  if (used_epsilon != nullptr) *used_epsilon = eps;
  std::array<double, 2> costs{};
  parallel_for(2, max_threads, [&](std::size_t k) {
    const ControlPair v = perturbed(u, h, k == 0 ? eps : -eps);
    costs[k] = evaluate_cost(sc, solve_forward(sc, v), v).total;
  });
  return (costs[0] - costs[1]) / (2.0 * eps);
}

double adjoint_directional_derivative(const Scenario& sc, const ControlPair& u, const ControlPair& h) {
  const Trajectory traj = solve_forward(sc, u);
  const AdjointTrajectory adj = solve_adjoint(sc, traj, u);
  return gradient_dot(sc.mesh, sc.time.dt(), reduced_gradient(traj, adj, u), h);
}

double tangent_directional_derivative(const Scenario& sc, const ControlPair& u, const ControlPair& h) {
  const Trajectory traj = solve_forward(sc, u);
  const TangentTrajectory tan = solve_tangent(sc, traj, u, h);
  const EpidemicState& x = traj.back();
  const EpidemicState& d = tan.back();
  double terminal = 0.0;
  for (std::size_t c = 0; c < sc.mesh.num_cells(); ++c) {
    terminal += std::max(x.e[c] + x.i[c] - sc.threshold.lambda, 0.0) * (d.e[c] + d.i[c]);
  }
  return sc.mesh.cell_volume() * terminal + control_inner(sc.mesh, sc.time.dt(), u, h);
}

}  // namespace epictrl
