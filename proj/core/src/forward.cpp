#include "epictrl/forward.hpp"

#include <sstream>

#include "epictrl/errors.hpp"
#include "epictrl/norms.hpp"

namespace epictrl {

namespace {

void enforce_nonnegative(Field& f, const char* name, std::size_t level) {
  for (std::size_t c = 0; c < f.size(); ++c) {
    if (f[c] < -kNegativeTolerance) {
      std::ostringstream os;
      os << "positivity violated: " << name << "=" << f[c] << " at cell " << c << ", level " << level;
      throw NumericalError(os.str(), f[c]);
    }
    if (f[c] < 0.0) f[c] = 0.0;
  }
}

}  // namespace

ForwardIntegrator::ForwardIntegrator(const Scenario& scenario)
    : scenario_(&scenario),
      ops_(scenario),
      sys_s_(1.0 / scenario.time.dt()),
      sys_e_(1.0 / scenario.time.dt()),
      sys_i_(1.0 / scenario.time.dt()),
      sys_r_(1.0 / scenario.time.dt()) {}

SolverKind ForwardIntegrator::solver_kind() const {
  return scenario_->mesh.dimension() == 1 ? SolverKind::Tridiagonal : SolverKind::SparseLDLT;
}

EpidemicState ForwardIntegrator::step(const EpidemicState& x, std::size_t n,
                                      const ControlPair& controls, StepFluxes* fluxes) {
  const Scenario& sc = *scenario_;
  const Mesh& mesh = sc.mesh;
  const std::size_t cells = mesh.num_cells();
  const double inv_dt = 1.0 / sc.time.dt();
  const double gamma = sc.waning.at(n);
  const auto& rates = sc.rates;
  const auto ui = controls.ui.at_step(n);
  const auto ue = controls.ue.at_step(n);

  EpidemicState next = EpidemicState::zeros(mesh);
  Field infection_i(mesh);
  Field infection_e(mesh);
  Field waning(mesh);
  Field rhs(mesh);

  // (1) susceptibles: infection absorbed implicitly, waning inflow explicit.
  Field absorption(mesh);
  for (std::size_t c = 0; c < cells; ++c) {
    absorption[c] = ui[c] * x.i[c] + ue[c] * x.e[c];
    waning[c] = gamma * x.r[c];
    rhs[c] = x.s[c] * inv_dt + waning[c];
  }
  sys_s_.with_diagonal(ops_.at(Compartment::S, n), absorption.values())
      .solve(rhs.values(), next.s.values());
  enforce_nonnegative(next.s, "s", n + 1);
  for (std::size_t c = 0; c < cells; ++c) {
    infection_i[c] = ui[c] * x.i[c] * next.s[c];
    infection_e[c] = ue[c] * x.e[c] * next.s[c];
  }

  // (2) exposed
  for (std::size_t c = 0; c < cells; ++c) rhs[c] = x.e[c] * inv_dt + infection_i[c] + infection_e[c];
  sys_e_.with_constant(ops_.at(Compartment::E, n), rates.sigma + rates.phi_e)
      .solve(rhs.values(), next.e.values());
  enforce_nonnegative(next.e, "e", n + 1);
  Field incubation(mesh);
  Field recovery_e(mesh);
  for (std::size_t c = 0; c < cells; ++c) {
    incubation[c] = rates.sigma * next.e[c];
    recovery_e[c] = rates.phi_e * next.e[c];
  }

  // (3) infected
  for (std::size_t c = 0; c < cells; ++c) rhs[c] = x.i[c] * inv_dt + incubation[c];
  sys_i_.with_constant(ops_.at(Compartment::I, n), rates.phi_r).solve(rhs.values(), next.i.values());
  enforce_nonnegative(next.i, "i", n + 1);
  Field recovery_i(mesh);
  for (std::size_t c = 0; c < cells; ++c) recovery_i[c] = rates.phi_r * next.i[c];

  // (4) recovered: waning outflow explicit so it matches the s inflow exactly.
  for (std::size_t c = 0; c < cells; ++c) {
    rhs[c] = x.r[c] * inv_dt + recovery_i[c] + recovery_e[c] - waning[c];
  }
  sys_r_.with_constant(ops_.at(Compartment::R, n), 0.0).solve(rhs.values(), next.r.values());
  enforce_nonnegative(next.r, "r", n + 1);

  if (fluxes != nullptr) {
    *fluxes = StepFluxes{std::move(infection_i), std::move(infection_e), std::move(incubation),
                         std::move(recovery_e),  std::move(recovery_i),  std::move(waning)};
  }
  return next;
}

Trajectory solve_forward(const Scenario& sc, const ControlPair& controls) {
  validate_controls(sc, controls);
  Trajectory traj{sc.time, {}};
  traj.levels.reserve(sc.time.steps + 1);
  traj.levels.push_back(sc.initial);
  if (sc.time.steps == 0) return traj;
  ForwardIntegrator integrator(sc);
  for (std::size_t n = 0; n < sc.time.steps; ++n) {
    traj.levels.push_back(integrator.step(traj.levels.back(), n, controls));
  }
  return traj;
}

std::vector<double> total_population(const Trajectory& traj) {
  std::vector<double> totals;
  totals.reserve(traj.size());
  for (const auto& x : traj.levels) {
    totals.push_back(integrate(x.s) + integrate(x.e) + integrate(x.i) + integrate(x.r));
  }
  return totals;
}

DependenceReport continuous_dependence_probe(const Scenario& sc, const ControlPair& u1,
                                             const ControlPair& u2) {
  validate_controls(sc, u1);
  validate_controls(sc, u2);
  DependenceReport report;
  report.control_distance = control_distance(sc.mesh, sc.time.dt(), u1, u2);
  if (u1.ui == u2.ui && u1.ue == u2.ue) {
    report.identical_controls = true;
    return report;
  }
  const Trajectory a = solve_forward(sc, u1);
  const Trajectory b = solve_forward(sc, u2);
  report.state_distance = y_distance(sc.mesh, sc.time.dt(), a.levels, b.levels);
  report.ratio = report.control_distance > 0.0 ? report.state_distance / report.control_distance : 0.0;
  return report;
}

}  // namespace epictrl
