#pragma once

#include <cstddef>
#include <vector>

#include "epictrl/discretization.hpp"
#include "epictrl/model.hpp"

namespace epictrl {

/// Values in [-kNegativeTolerance, 0) are clamped to zero; anything below aborts the run.
inline constexpr double kNegativeTolerance = 1e-12;

/// All time levels 0..N of a state (or tangent) solution.
struct Trajectory {
  TimeGrid time;
  std::vector<EpidemicState> levels;

  std::size_t size() const { return levels.size(); }
  const EpidemicState& operator[](std::size_t k) const { return levels[k]; }
  const EpidemicState& back() const { return levels.back(); }
};

/// A tangent trajectory (xi, eta, iota, rho) lives in the same space as the state.
using TangentTrajectory = Trajectory;

/// The transfer terms recorded during one semi-implicit step, each at the
/// time level the step evaluated it.
struct StepFluxes {
  Field infection_by_infected;  ///< u_i i_n s_{n+1}
  Field infection_by_exposed;   ///< u_e e_n s_{n+1}
  Field incubation;             ///< sigma e_{n+1}
  Field recovery_exposed;       ///< phi_e e_{n+1}
  Field recovery_infected;      ///< phi_r i_{n+1}
  Field waning;                 ///< gamma_n r_n
};

/// Semi-implicit Gauss-Seidel time stepper for the state system.
///
/// One step solves, in order,
///   (I/dt + diag(u_i i_n + u_e e_n) + A_s) s_{n+1} = s_n/dt + gamma_n r_n
///   (I/dt + (sigma + phi_e) + A_e)         e_{n+1} = e_n/dt + Phi_i + Phi_e
///   (I/dt + phi_r + A_i)                   i_{n+1} = i_n/dt + sigma e_{n+1}
///   (I/dt + A_r)                           r_{n+1} = r_n/dt + phi_r i_{n+1} + phi_e e_{n+1} - gamma_n r_n
/// and every transfer is evaluated once and added to one compartment and
/// subtracted from another, so the integral of s+e+i+r is conserved up to
/// linear-solve roundoff. All four matrices are M-matrices; with dt*gamma <= 1
/// every right-hand side is nonnegative, hence so is the new state.
///
/// Not thread-safe (factorization caches); use one integrator per thread.
class ForwardIntegrator {
 public:
  explicit ForwardIntegrator(const Scenario& scenario);

  EpidemicState step(const EpidemicState& state, std::size_t n, const ControlPair& controls,
                     StepFluxes* fluxes = nullptr);

  SolverKind solver_kind() const;

 private:
  const Scenario* scenario_;
  CompartmentOperators ops_;
  ShiftedSystem sys_s_;
  ShiftedSystem sys_e_;
  ShiftedSystem sys_i_;
  ShiftedSystem sys_r_;
};

Trajectory solve_forward(const Scenario& scenario, const ControlPair& controls);

/// Integral of s+e+i+r at each level.
std::vector<double> total_population(const Trajectory& trajectory);

/// Result of comparing the solutions for two control pairs.
struct DependenceReport {
  double state_distance = 0.0;    ///< discrete C([0,T];H) + L2(0,T;V) distance
  double control_distance = 0.0;  ///< discrete L2(Q) distance
  double ratio = 0.0;
  bool identical_controls = false;
};

DependenceReport continuous_dependence_probe(const Scenario& scenario, const ControlPair& u1,
                                             const ControlPair& u2);

}  // namespace epictrl
