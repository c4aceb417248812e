#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "epictrl/adjoint.hpp"
#include "epictrl/forward.hpp"

namespace epictrl {

/// J = J1 + J2 with J1 = 1/2 int_Omega ((e+i)(T) - lambda)^+^2 and
/// J2 = 1/2 int_Q (u_i^2 + u_e^2).
struct CostBreakdown {
  double terminal_term = 0.0;
  double control_term = 0.0;
  double total = 0.0;
};

CostBreakdown evaluate_cost(const Scenario& scenario, const Trajectory& trajectory,
                            const ControlPair& controls);

/// Reduced gradient g_i = s i (q - p) + u_i, g_e = s e (q - p) + u_e.
struct GradientPair {
  SpaceTimeField gi;
  SpaceTimeField ge;
};

/// Step n pairs s_{n+1}, i_n, e_n (the levels of the forward infection flux)
/// with p_n, q_n (the adjoint level produced by the same step).
GradientPair reduced_gradient(const Trajectory& forward, const AdjointTrajectory& adjoint,
                              const ControlPair& controls);

/// <g, h> in L2(Q).
double gradient_dot(const Mesh& mesh, double dt, const GradientPair& g, const ControlPair& h);

/// Pointwise clamp to [0, u_max], the L2 projection onto the box.
ControlPair project_controls(const ControlPair& candidate, const ControlBounds& bounds);

/// ||u - P(u - g)||_{L2(Q)} over both components.
double vi_residual(const Mesh& mesh, double dt, const ControlPair& controls, const GradientPair& gradient,
                   const ControlBounds& bounds);

/// ||u_max||_{L2(Q)} + 1, the scale used to make VI tolerances scenario-independent.
double vi_normalization(const Mesh& mesh, double dt, const ControlBounds& bounds);

/// ||u - P(s i (p - q), s e (p - q))||_{L2(Q)}, evaluated from the forward and
/// adjoint trajectories directly.
double projection_fixed_point_residual(const Scenario& scenario, const Trajectory& forward,
                                       const AdjointTrajectory& adjoint, const ControlPair& controls);

struct OptimizerOptions {
  std::size_t max_iters = 200;
  double vi_tolerance = 1e-6;  ///< on the normalized VI residual
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;
  double initial_step = 1.0;
  double min_step = 1e-12;
};

enum class Termination { Converged, MaxIterations, StepCollapse };

std::string_view termination_name(Termination t);

struct IterationRecord {
  std::size_t iteration = 0;
  CostBreakdown cost;
  double vi_residual = 0.0;  ///< normalized
  double step = 0.0;         ///< step length accepted to reach this iterate (0 for the start)
  std::size_t backtracks = 0;
};

struct OptimizationReport {
  std::vector<IterationRecord> iterations;
  ControlPair controls;
  Termination reason = Termination::MaxIterations;
  double final_vi_residual = 0.0;        ///< normalized
  double fixed_point_residual = 0.0;     ///< normalized
  std::size_t forward_solves = 0;
  std::size_t adjoint_solves = 0;
};

/// Projected gradient u <- P(u - alpha g) with Armijo backtracking on J.
OptimizationReport projected_gradient_descent(const Scenario& scenario, const ControlPair& initial,
                                              const OptimizerOptions& options = {});

/// Central difference (J(u + eps h) - J(u - eps h)) / (2 eps) from two forward
/// solves. eps is halved until both points are admissible; throws
/// PreconditionError if that fails. `used_epsilon` receives the final eps.
double fd_directional_derivative(const Scenario& scenario, const ControlPair& controls,
                                 const ControlPair& direction, double epsilon,
                                 double* used_epsilon = nullptr, unsigned max_threads = 1);

/// <g, h> from one forward and one adjoint solve.
double adjoint_directional_derivative(const Scenario& scenario, const ControlPair& controls,
                                      const ControlPair& direction);

/// J'(u)h through the tangent system: int ((e+i)(T) - lambda)^+ (eta + iota)(T) + <u, h>.
/// This is the exact derivative of the discrete cost, unlike the adjoint route.
double tangent_directional_derivative(const Scenario& scenario, const ControlPair& controls,
                                      const ControlPair& direction);

}  // namespace epictrl
