#include "epictrl/delay.hpp"

#include <cmath>
#include <sstream>

#include "epictrl/errors.hpp"
#include "epictrl/norms.hpp"
#include "epictrl/parallel.hpp"

namespace epictrl {

std::size_t delay_lag_steps(const TimeGrid& time, double tau) {
  const double dt = time.dt();
  if (!(tau > 0.0) || !(dt > 0.0)) throw ConfigError("delay tau and dt must be positive");
  const double ratio = tau / dt;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    std::ostringstream os;
    os << "tau=" << tau << " is not an integer multiple of dt=" << dt;
    throw ConfigError(os.str());
  }
  return static_cast<std::size_t>(rounded);
}

DelayedHistory::DelayedHistory(Field e0, const TimeGrid& time, double tau)
    : e0_(std::move(e0)), time_(time), lag_(delay_lag_steps(time, tau)) {}

const Field& DelayedHistory::shifted(std::size_t level) const {
  if (level <= lag_) return e0_;
  const std::size_t k = level - lag_;
  if (k > levels_.size()) throw PreconditionError("delayed level has not been computed yet");
  return levels_[k - 1];
}

const Field& delay_lookup(const DelayedHistory& history, double t, double tau) {
  const TimeGrid& time = history.time();
  if (delay_lag_steps(time, tau) != history.lag_steps()) {
    throw ConfigError("tau does not match the history's lag");
  }
  if (t < 0.0 || t > time.horizon * (1.0 + 1e-12)) throw PreconditionError("lookup time outside [0, T]");
  // Times inside the prehistory window need no grid alignment.
  if (t <= tau * (1.0 + 1e-12)) return history.initial();
  const double level = t / time.dt();
  const double rounded = std::round(level);
  if (std::abs(level - rounded) > 1e-9 * std::max(1.0, level)) {
    throw ConfigError("lookup time is not on the time grid");
  }
  return history.shifted(static_cast<std::size_t>(rounded));
}

Trajectory solve_delay(const Scenario& sc, const ControlPair& controls, double tau) {
  validate_controls(sc, controls);
  const TimeGrid& time = sc.time;
  const std::size_t steps = time.steps;
  const std::size_t lag = delay_lag_steps(time, tau);
  if (steps % lag != 0) throw ConfigError("tau must divide the horizon T");

  const Mesh& mesh = sc.mesh;
  const std::size_t cells = mesh.num_cells();
  const double inv_dt = 1.0 / time.dt();
  const auto& rates = sc.rates;

  DelayedHistory history(sc.initial.e, time, tau);
  std::vector<Field> s{sc.initial.s};
  std::vector<Field> e{sc.initial.e};
  std::vector<Field> i{sc.initial.i};
  std::vector<Field> r{sc.initial.r};
  for (auto* v : {&s, &e, &i, &r}) v->reserve(steps + 1);

  CompartmentOperators ops(sc);
  ShiftedSystem sys_s(inv_dt);
  ShiftedSystem sys_e(inv_dt);
  ShiftedSystem sys_i(inv_dt);
  ShiftedSystem sys_r(inv_dt);
  Field rhs(mesh);
  Field absorption(mesh);

  const auto solve_into = [&](const ImplicitSolver& solver, std::vector<Field>& out) {
    Field next(mesh);
    solver.solve(rhs.values(), next.values());
    for (std::size_t c = 0; c < cells; ++c) {
      if (next[c] < -kNegativeTolerance) throw NumericalError("delay scheme lost positivity", next[c]);
      if (next[c] < 0.0) next[c] = 0.0;
    }
    out.push_back(std::move(next));
  };

  for (std::size_t lo = 0; lo < steps; lo += lag) {
    const std::size_t hi = lo + lag;
    // i: driven by sigma * delayed e.
    for (std::size_t j = lo; j < hi; ++j) {
      const Field& de = history.shifted(j + 1);
      for (std::size_t c = 0; c < cells; ++c) rhs[c] = i[j][c] * inv_dt + rates.sigma * de[c];
      solve_into(sys_i.with_constant(ops.at(Compartment::I, j), rates.phi_r), i);
    }
    // r: recoveries from i and delayed e, waning absorbed implicitly.
    for (std::size_t j = lo; j < hi; ++j) {
      const Field& de = history.shifted(j + 1);
      for (std::size_t c = 0; c < cells; ++c) {
        rhs[c] = r[j][c] * inv_dt + rates.phi_r * i[j + 1][c] + rates.phi_e * de[c];
      }
      solve_into(sys_r.with_constant(ops.at(Compartment::R, j), sc.waning.at(j)), r);
    }
    // s: absorption u_i i + u_e delta e with i from this interval.
    for (std::size_t j = lo; j < hi; ++j) {
      const Field& de = history.shifted(j + 1);
      const auto ui = controls.ui.at_step(j);
      const auto ue = controls.ue.at_step(j);
      for (std::size_t c = 0; c < cells; ++c) {
        absorption[c] = ui[c] * i[j + 1][c] + ue[c] * de[c];
        rhs[c] = s[j][c] * inv_dt + sc.waning.at(j) * r[j + 1][c];
      }
      solve_into(sys_s.with_diagonal(ops.at(Compartment::S, j), absorption.values()), s);
    }
    // e: gains the infection removed from s.
    for (std::size_t j = lo; j < hi; ++j) {
      const Field& de = history.shifted(j + 1);
      const auto ui = controls.ui.at_step(j);
      const auto ue = controls.ue.at_step(j);
      for (std::size_t c = 0; c < cells; ++c) {
        const double infection = (ui[c] * i[j + 1][c] + ue[c] * de[c]) * s[j + 1][c];
        rhs[c] = e[j][c] * inv_dt + infection;
      }
      solve_into(sys_e.with_constant(ops.at(Compartment::E, j), rates.sigma + rates.phi_e), e);
    }
    for (std::size_t j = lo; j < hi; ++j) history.push(e[j + 1]);
  }

  Trajectory traj{time, {}};
  traj.levels.reserve(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    traj.levels.push_back(EpidemicState{std::move(s[k]), std::move(e[k]), std::move(i[k]), std::move(r[k])});
  }
  return traj;
}

std::vector<ConvergenceRow> convergence_study(const Scenario& sc, const ControlPair& controls,
                                              const std::vector<double>& tau_list,
                                              unsigned max_threads) {
  for (double tau : tau_list) {
    const std::size_t lag = delay_lag_steps(sc.time, tau);
    if (sc.time.steps % lag != 0) throw ConfigError("every tau must divide the horizon T");
  }
  const Trajectory reference = solve_forward(sc, controls);
  std::vector<ConvergenceRow> rows(tau_list.size());
  parallel_for(tau_list.size(), max_threads, [&](std::size_t k) {
    const Trajectory delayed = solve_delay(sc, controls, tau_list[k]);
    const auto totals = total_population(delayed);
    rows[k].tau = tau_list[k];
    rows[k].error = sup_h_distance(delayed.levels, reference.levels);
    rows[k].conservation_defect = std::abs(totals.back() - totals.front());
  });
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double refinement = std::log(rows[k - 1].tau / rows[k].tau);
    if (refinement == 0.0) continue;
    if (rows[k].error > 0.0 && rows[k - 1].error > 0.0) {
      rows[k].order = std::log(rows[k - 1].error / rows[k].error) / refinement;
    }
    if (rows[k].conservation_defect > 0.0 && rows[k - 1].conservation_defect > 0.0) {
      rows[k].defect_order =
          std::log(rows[k - 1].conservation_defect / rows[k].conservation_defect) / refinement;
    }
  }
  return rows;
}

}  // namespace epictrl
