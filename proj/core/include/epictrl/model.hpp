#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "epictrl/mesh.hpp"

namespace epictrl {

enum class Compartment : std::size_t { S = 0, E = 1, I = 2, R = 3 };

inline constexpr std::array<Compartment, 4> kCompartments{Compartment::S, Compartment::E,
                                                          Compartment::I, Compartment::R};

/// Uniform partition of [0, T] into N steps. N = 0 is the degenerate horizon.
struct TimeGrid {
  double horizon = 1.0;
  std::size_t steps = 1;

  double dt() const { return steps == 0 ? 0.0 : horizon / static_cast<double>(steps); }
  double time(std::size_t level) const {
    return steps == 0 ? 0.0 : horizon * static_cast<double>(level) / static_cast<double>(steps);
  }
};

struct RateConstants {
  double sigma = 0.0;  ///< incubation rate
  double phi_e = 0.0;  ///< recovery rate of exposed
  double phi_r = 0.0;  ///< recovery rate of infected
};

/// Loss-of-immunity rate, piecewise constant with one value per time step.
class WaningRate {
 public:
  WaningRate() = default;
  explicit WaningRate(std::vector<double> per_step) : per_step_(std::move(per_step)) {}
  static WaningRate constant(double gamma, std::size_t steps) {
    return WaningRate(std::vector<double>(steps, gamma));
  }

  double at(std::size_t step) const { return per_step_[step]; }
  std::size_t steps() const { return per_step_.size(); }
  double max() const;
  std::span<const double> values() const { return per_step_; }

 private:
  std::vector<double> per_step_;
};

/// A diffusion coefficient: constant, per cell, or per cell and per step.
class Coefficient {
 public:
  static Coefficient constant(double value) { return Coefficient(value); }
  static Coefficient per_cell(Field field) { return Coefficient(std::move(field)); }
  static Coefficient per_step(std::vector<Field> fields) { return Coefficient(std::move(fields)); }

  bool time_dependent() const { return std::holds_alternative<std::vector<Field>>(data_); }
  /// Number of steps covered by a time-dependent coefficient, 0 otherwise.
  std::size_t steps() const;

  /// Coefficient field at a time step (the step index is ignored unless time-dependent).
  Field at(const Mesh& mesh, std::size_t step) const;

  double min() const;
  double max() const;

 private:
  explicit Coefficient(double v) : data_(v) {}
  explicit Coefficient(Field f) : data_(std::move(f)) {}
  explicit Coefficient(std::vector<Field> f) : data_(std::move(f)) {}

  std::variant<double, Field, std::vector<Field>> data_;
};

struct DiffusionSpec {
  std::array<Coefficient, 4> kappa{Coefficient::constant(1.0), Coefficient::constant(1.0),
                                   Coefficient::constant(1.0), Coefficient::constant(1.0)};
  double kappa_lo = 1.0;
  double kappa_hi = 1.0;

  const Coefficient& operator[](Compartment c) const { return kappa[static_cast<std::size_t>(c)]; }
};

/// Four compartment densities at one time level.
struct EpidemicState {
  Field s;
  Field e;
  Field i;
  Field r;

  const Field& operator[](Compartment c) const;
  Field& operator[](Compartment c);

  /// Zero state on a mesh.
  static EpidemicState zeros(const Mesh& mesh) {
    return {Field(mesh), Field(mesh), Field(mesh), Field(mesh)};
  }
};

using InitialData = EpidemicState;

/// Values on the (step x cell) grid; step-major storage.
class SpaceTimeField {
 public:
  SpaceTimeField() = default;
  SpaceTimeField(std::size_t steps, std::size_t cells, double value = 0.0)
      : steps_(steps), cells_(cells), values_(steps * cells, value) {}
  /// A space-only field repeated at every step.
  static SpaceTimeField repeat(const Field& field, std::size_t steps);

  std::size_t steps() const { return steps_; }
  std::size_t cells() const { return cells_; }
  std::size_t size() const { return values_.size(); }

  double operator()(std::size_t step, std::size_t cell) const { return values_[step * cells_ + cell]; }
  double& operator()(std::size_t step, std::size_t cell) { return values_[step * cells_ + cell]; }

  std::span<const double> at_step(std::size_t step) const {
    return std::span<const double>(values_).subspan(step * cells_, cells_);
  }
  std::span<double> at_step(std::size_t step) {
    return std::span<double>(values_).subspan(step * cells_, cells_);
  }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  double min() const;
  double max() const;
  bool same_shape(const SpaceTimeField& o) const { return steps_ == o.steps_ && cells_ == o.cells_; }

  friend bool operator==(const SpaceTimeField&, const SpaceTimeField&) = default;

 private:
  std::size_t steps_ = 0;
  std::size_t cells_ = 0;
  std::vector<double> values_;
};

/// Transmission-rate controls (u_i, u_e).
struct ControlPair {
  SpaceTimeField ui;
  SpaceTimeField ue;
};

/// Pointwise box [0, u_max] for each control.
struct ControlBounds {
  SpaceTimeField ui_max;
  SpaceTimeField ue_max;

  /// The global constant M bounding both controls.
  double global_bound() const;
};

struct ThresholdTarget {
  double lambda = 1.0;
};

struct Scenario {
  Mesh mesh;
  TimeGrid time;
  RateConstants rates;
  WaningRate waning;
  DiffusionSpec diffusion;
  InitialData initial;
  ControlBounds bounds;
  ThresholdTarget threshold;
};

/// Checks every structural assumption of the model and returns the scenario
/// unchanged. Throws ValidationError naming the first violated assumption.
Scenario validate_scenario(Scenario scenario);

/// Throws ValidationError(ControlAdmissible) unless 0 <= u <= u_max pointwise,
/// ConfigError if the shape does not match the scenario.
void validate_controls(const Scenario& scenario, const ControlPair& controls);

/// True if 0 <= u <= u_max pointwise and the shape matches.
bool is_admissible(const ControlBounds& bounds, const ControlPair& controls);

/// Controls u_max * fraction in both components.
ControlPair scaled_bounds(const ControlBounds& bounds, double fraction);

/// The five transfer terms between compartments, cellwise.
struct TransferFluxes {
  Field infection_by_infected;  ///< u_i s i
  Field infection_by_exposed;   ///< u_e s e
  Field incubation;             ///< sigma e
  Field recovery_exposed;       ///< phi_e e
  Field recovery_infected;      ///< phi_r i
  Field waning;                 ///< gamma r

  /// Net rate of change of each compartment due to the transfers.
  EpidemicState net() const;
};

TransferFluxes transfer_fluxes(const EpidemicState& state, std::span<const double> ui,
                               std::span<const double> ue, const RateConstants& rates, double gamma);

}  // namespace epictrl
