#pragma once

// Scenario builders and small dense-algebra oracles shared by the unit tests
// and the acceptance driver.

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

#include "epictrl/model.hpp"

namespace epictrl::testing {

inline Mesh line(int cells, double length = 1.0) {
  const int c[1] = {cells};
  const double l[1] = {length};
  return Mesh::build(1, c, l);
}

inline Mesh rect(int nx, int ny, double lx = 1.0, double ly = 1.0) {
  const int c[2] = {nx, ny};
  const double l[2] = {lx, ly};
  return Mesh::build(2, c, l);
}

/// Field from a function of the cell-center x coordinate (and y in 2D).
inline Field field_of(const Mesh& mesh, const std::function<double(double, double)>& f) {
  Field out(mesh);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    out[c] = f(mesh.center(c, 0), mesh.dimension() == 2 ? mesh.center(c, 1) : 0.0);
  }
  return out;
}

/// Space-time field from f(t, x) with t the midpoint (n + 1/2) dt of step n.
inline SpaceTimeField space_time_of(const Mesh& mesh, const TimeGrid& time,
                                    const std::function<double(double, double)>& f) {
  SpaceTimeField out(time.steps, mesh.num_cells());
  for (std::size_t n = 0; n < time.steps; ++n) {
    const double t = (static_cast<double>(n) + 0.5) * time.dt();
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) out(n, c) = f(t, mesh.center(c, 0));
  }
  return out;
}

struct ScenarioSpec {
  double horizon = 1.0;
  std::size_t steps = 100;
  RateConstants rates{0.2, 0.1, 0.4};
  double gamma = 0.05;
  double kappa = 0.01;
  double kappa_lo = 1e-3;
  double kappa_hi = 1.0;
  double ui_max = 1.0;
  double ue_max = 0.6;
  double lambda = 0.15;
};

inline Scenario make_scenario(const Mesh& mesh, const ScenarioSpec& spec, EpidemicState initial) {
  const TimeGrid time{spec.horizon, spec.steps};
  DiffusionSpec diffusion;
  for (auto& k : diffusion.kappa) k = Coefficient::constant(spec.kappa);
  diffusion.kappa_lo = spec.kappa_lo;
  diffusion.kappa_hi = spec.kappa_hi;
  ControlBounds bounds{SpaceTimeField(spec.steps, mesh.num_cells(), spec.ui_max),
                       SpaceTimeField(spec.steps, mesh.num_cells(), spec.ue_max)};
  return validate_scenario(Scenario{mesh, time, spec.rates, WaningRate::constant(spec.gamma, spec.steps),
                                    std::move(diffusion), std::move(initial), std::move(bounds),
                                    ThresholdTarget{spec.lambda}});
}

inline EpidemicState uniform_state(const Mesh& mesh, double s, double e, double i, double r) {
  return {Field(mesh, s), Field(mesh, e), Field(mesh, i), Field(mesh, r)};
}

inline ControlPair constant_controls(const Scenario& sc, double ui, double ue) {
  return {SpaceTimeField(sc.time.steps, sc.mesh.num_cells(), ui),
          SpaceTimeField(sc.time.steps, sc.mesh.num_cells(), ue)};
}

/// The 1D reference instance: 32 cells on [0,1], T = 1, a smooth outbreak
/// that ends above the threshold in every cell.
inline Scenario reference_scenario(std::size_t steps = 1000, int cells = 32) {
  const Mesh mesh = line(cells);
  constexpr double pi = std::numbers::pi;
  EpidemicState init{
      field_of(mesh, [](double x, double) { return 0.9 - 0.1 * std::cos(pi * x); }),
      field_of(mesh, [](double x, double) { return 0.05 + 0.05 * std::exp(-20.0 * (x - 0.3) * (x - 0.3)); }),
      field_of(mesh, [](double x, double) { return 0.1 + 0.1 * std::exp(-30.0 * (x - 0.6) * (x - 0.6)); }),
      Field(mesh)};
  ScenarioSpec spec;
  spec.steps = steps;
  return make_scenario(mesh, spec, std::move(init));
}

/// Smooth interior controls of the reference instance.
inline ControlPair reference_controls(const Scenario& sc) {
  constexpr double pi = std::numbers::pi;
  return {space_time_of(sc.mesh, sc.time,
                        [](double t, double x) { return 0.5 + 0.2 * std::sin(2 * pi * t) * std::cos(pi * x); }),
          space_time_of(sc.mesh, sc.time, [](double t, double x) { return 0.2 + 0.05 * std::cos(3 * t) * x; })};
}

/// Smooth direction of the reference instance; u + eps h is admissible for 0 <= eps <= 0.1.
inline ControlPair reference_direction(const Scenario& sc) {
  constexpr double pi = std::numbers::pi;
  return {space_time_of(sc.mesh, sc.time,
                        [](double t, double x) { return (1 + 0.5 * std::cos(pi * t)) * (0.5 + std::sin(pi * x)); }),
          space_time_of(sc.mesh, sc.time,
                        [](double t, double x) { return (1 + t) * (1 + 0.5 * std::cos(2 * pi * x)); })};
}

/// Delay-study instance: constant controls keep the delayed term active.
inline Scenario delay_scenario(std::size_t steps = 1024, int cells = 32) {
  const Mesh mesh = line(cells);
  constexpr double pi = std::numbers::pi;
  EpidemicState init{
      field_of(mesh, [](double x, double) { return 0.9 - 0.1 * std::cos(pi * x); }),
      field_of(mesh, [](double x, double) { return 0.05 + 0.1 * std::exp(-20.0 * (x - 0.3) * (x - 0.3)); }),
      field_of(mesh, [](double x, double) { return 0.02 + 0.05 * std::exp(-30.0 * (x - 0.6) * (x - 0.6)); }),
      Field(mesh)};
  ScenarioSpec spec;
  spec.steps = steps;
  return make_scenario(mesh, spec, std::move(init));
}

/// Dense row-major Gaussian elimination with partial pivoting.
inline std::vector<double> dense_solve(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < n; ++r) {
      if (std::abs(a[r * n + k]) > std::abs(a[piv * n + k])) piv = r;
    }
    if (piv != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[k * n + c], a[piv * n + c]);
      std::swap(b[k], b[piv]);
    }
    for (std::size_t r = k + 1; r < n; ++r) {
      const double f = a[r * n + k] / a[k * n + k];
      for (std::size_t c = k; c < n; ++c) a[r * n + c] -= f * a[k * n + c];
      b[r] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t k = n; k-- > 0;) {
    double acc = b[k];
    for (std::size_t c = k + 1; c < n; ++c) acc -= a[k * n + c] * x[c];
    x[k] = acc / a[k * n + k];
  }
  return x;
}

}  // namespace epictrl::testing
