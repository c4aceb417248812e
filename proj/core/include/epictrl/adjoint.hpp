#pragma once

#include <cstddef>
#include <vector>

#include "epictrl/forward.hpp"

namespace epictrl {

/// Costates paired with (s, e, i, r). No sign constraint.
struct AdjointState {
  Field p;
  Field q;
  Field w;
  Field z;

  static AdjointState zeros(const Mesh& mesh) {
    return {Field(mesh), Field(mesh), Field(mesh), Field(mesh)};
  }
};

struct AdjointTrajectory {
  TimeGrid time;
  std::vector<AdjointState> levels;  ///< levels 0..N; level N holds the terminal data
  std::size_t kink_cells = 0;        ///< cells with (e+i)(T) within kKinkTolerance of lambda

  std::size_t size() const { return levels.size(); }
  const AdjointState& operator[](std::size_t k) const { return levels[k]; }
};

/// Cells whose terminal (e+i) lies this close to lambda sit on the kink of the
/// positive part; gradient checks there legitimately degrade.
inline constexpr double kKinkTolerance = 1e-9;

struct TerminalData {
  AdjointState state;
  std::size_t kink_cells = 0;
};

/// p(T) = z(T) = 0, q(T) = w(T) = ((e + i)(T) - lambda)^+ cellwise.
TerminalData terminal_conditions(const Field& e_final, const Field& i_final, double lambda);

/// Backward-Euler discretization of the continuous adjoint system, from level
/// N down to 0. Step n (level n+1 -> n) uses the forward factors of forward
/// step n (i_n, e_n, s_{n+1}, controls and gamma of step n) and solves
///   (I/dt + gamma_n + A_r)           z_n = z_{n+1}/dt + gamma_n p_{n+1}
///   (I/dt + phi_r + A_i)             w_n = w_{n+1}/dt + phi_r z_n - u_i s_{n+1} (p - q)_{n+1}
///   (I/dt + sigma + phi_e + A_e)     q_n = q_{n+1}/dt + sigma w_n + phi_e z_n - u_e s_{n+1} (p - q)_{n+1}
///   (I/dt + u_i i_n + u_e e_n + A_s) p_n = p_{n+1}/dt + (u_i i_n + u_e e_n) q_n
/// The diffusion matrices are symmetric and reused as their own transposes.
AdjointTrajectory solve_adjoint(const Scenario& scenario, const Trajectory& forward,
                                const ControlPair& controls);

}  // namespace epictrl
