#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>

#include "epictrl/mesh.hpp"
#include "epictrl/model.hpp"

namespace epictrl {

/// Diffusion operators A_s, A_e, A_i, A_r for a scenario.
///
/// Constant-in-time coefficients are assembled once. Time-dependent ones are
/// re-assembled when a different step is requested; the version counter of an
/// operator changes exactly when its matrix does.
class CompartmentOperators {
 public:
  struct Entry {
    const DiffusionOperator* op;
    std::uint64_t version;
  };

  explicit CompartmentOperators(const Scenario& scenario);

  Entry at(Compartment c, std::size_t step);

 private:
  struct Slot {
    std::optional<DiffusionOperator> op;
    std::size_t step = 0;
    std::uint64_t version = 0;
  };

  const Scenario* scenario_;
  std::array<Slot, 4> slots_;
  std::uint64_t next_version_ = 1;
};

/// Factorizations of (mass_scale I + diag + A) with caching of the
/// constant-absorption case, keyed by operator version and absorption value.
class ShiftedSystem {
 public:
  explicit ShiftedSystem(double mass_scale) : mass_scale_(mass_scale) {}

  const ImplicitSolver& with_constant(CompartmentOperators::Entry op, double absorption);
  const ImplicitSolver& with_diagonal(CompartmentOperators::Entry op, std::span<const double> reaction);

 private:
  double mass_scale_;
  std::map<std::pair<std::uint64_t, double>, ImplicitSolver> constant_;
  std::optional<ImplicitSolver> variable_;
  std::uint64_t variable_version_ = 0;
};

}  // namespace epictrl
