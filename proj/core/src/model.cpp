#include "epictrl/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "epictrl/errors.hpp"

namespace epictrl {

double WaningRate::max() const {
  return per_step_.empty() ? 0.0 : *std::max_element(per_step_.begin(), per_step_.end());
}

std::size_t Coefficient::steps() const {
  if (const auto* f = std::get_if<std::vector<Field>>(&data_)) return f->size();
  return 0;
}

Field Coefficient::at(const Mesh& mesh, std::size_t step) const {
  if (const auto* v = std::get_if<double>(&data_)) return Field(mesh, *v);
  if (const auto* f = std::get_if<Field>(&data_)) {
    if (!(f->mesh() == mesh)) throw ConfigError("coefficient field does not match mesh");
    return *f;
  }
  const auto& fields = std::get<std::vector<Field>>(data_);
  if (step >= fields.size()) throw ConfigError("time-dependent coefficient has too few steps");
  if (!(fields[step].mesh() == mesh)) throw ConfigError("coefficient field does not match mesh");
  return fields[step];
}

double Coefficient::min() const {
  if (const auto* v = std::get_if<double>(&data_)) return *v;
  if (const auto* f = std::get_if<Field>(&data_)) return f->min();
  double m = INFINITY;
  for (const auto& f : std::get<std::vector<Field>>(data_)) m = std::min(m, f.min());
  return m;
}

double Coefficient::max() const {
  if (const auto* v = std::get_if<double>(&data_)) return *v;
  if (const auto* f = std::get_if<Field>(&data_)) return f->max();
  double m = -INFINITY;
  for (const auto& f : std::get<std::vector<Field>>(data_)) m = std::max(m, f.max());
  return m;
}

const Field& EpidemicState::operator[](Compartment c) const {
  switch (c) {
    case Compartment::S: return s;
    case Compartment::E: return e;
    case Compartment::I: return i;
    case Compartment::R: return r;
  }
  return s;
}

Field& EpidemicState::operator[](Compartment c) {
  return const_cast<Field&>(static_cast<const EpidemicState&>(*this)[c]);
}

SpaceTimeField SpaceTimeField::repeat(const Field& field, std::size_t steps) {
  SpaceTimeField out(steps, field.size());
  for (std::size_t n = 0; n < steps; ++n) {
    std::copy(field.values().begin(), field.values().end(), out.at_step(n).begin());
  }
  return out;
}

double SpaceTimeField::min() const {
  return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

double SpaceTimeField::max() const {
  return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

double ControlBounds::global_bound() const { return std::max(ui_max.max(), ue_max.max()); }

namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void check_kappa(const DiffusionSpec& d, const Mesh& mesh, std::size_t steps) {
  if (!(d.kappa_lo > 0.0) || !(d.kappa_lo <= d.kappa_hi) || !std::isfinite(d.kappa_hi)) {
    throw ValidationError(Assumption::KappaBounds);
  }
  static constexpr std::array<const char*, 4> names{"kappa_s", "kappa_e", "kappa_i", "kappa_r"};
  for (std::size_t c = 0; c < 4; ++c) {
    const auto& k = d.kappa[c];
    if (k.time_dependent() && k.steps() < steps) {
      throw ConfigError(std::string(names[c]) + " has fewer time steps than the grid");
    }
    // Probing step 0 validates the mesh shape of per-cell data.
    if (steps > 0 || !k.time_dependent()) (void)k.at(mesh, 0);
    if (!(k.min() >= d.kappa_lo) || !(k.max() <= d.kappa_hi)) {
      std::ostringstream os;
      os << names[c] << " spans [" << k.min() << ", " << k.max() << "], bounds [" << d.kappa_lo
         << ", " << d.kappa_hi << "]";
      throw ValidationError(Assumption::KappaRange, os.str());
    }
  }
}

}  // namespace

Scenario validate_scenario(Scenario sc) {
  const auto& r = sc.rates;
  if (!(r.sigma > 0.0) || !std::isfinite(r.sigma)) throw ValidationError(Assumption::SigmaPositive);
  if (!(r.phi_e > 0.0) || !std::isfinite(r.phi_e)) throw ValidationError(Assumption::PhiEPositive);
  if (!(r.phi_r > 0.0) || !std::isfinite(r.phi_r)) throw ValidationError(Assumption::PhiRPositive);

  if (!(sc.time.horizon > 0.0) || !std::isfinite(sc.time.horizon)) {
    throw ConfigError("time horizon must be positive");
  }
  const std::size_t steps = sc.time.steps;
  if (sc.waning.steps() != steps) {
    throw ValidationError(Assumption::GammaShape, "got " + std::to_string(sc.waning.steps()) +
                                                      " values for " + std::to_string(steps) +
                                                      " steps");
  }
  for (double g : sc.waning.values()) {
    if (!(g >= 0.0) || !std::isfinite(g)) throw ValidationError(Assumption::GammaNonnegative);
  }

  check_kappa(sc.diffusion, sc.mesh, steps);

  for (Compartment c : kCompartments) {
    const Field& f = sc.initial[c];
    if (!(f.mesh() == sc.mesh)) throw ConfigError("initial data does not match mesh");
    if (!f.all_finite() || !(f.min() >= 0.0)) throw ValidationError(Assumption::InitialNonnegative);
  }

  const auto& b = sc.bounds;
  for (const SpaceTimeField* m : {&b.ui_max, &b.ue_max}) {
    if (m->steps() != steps || m->cells() != sc.mesh.num_cells()) {
      throw ConfigError("control bounds must have shape steps x cells");
    }
    if (!all_finite(m->values()) || (m->size() > 0 && !(m->min() >= 0.0))) {
      throw ValidationError(Assumption::ControlBoundsNonnegative);
    }
  }

  if (!(sc.threshold.lambda > 0.0) || !std::isfinite(sc.threshold.lambda)) {
    throw ValidationError(Assumption::ThresholdPositive);
  }

  if (sc.time.dt() * sc.waning.max() > 1.0) {
    std::ostringstream os;
    os << "dt=" << sc.time.dt() << ", max(gamma)=" << sc.waning.max();
    throw ValidationError(Assumption::RPositivityStep, os.str());
  }
  return sc;
}

bool is_admissible(const ControlBounds& bounds, const ControlPair& u) {
  if (!u.ui.same_shape(bounds.ui_max) || !u.ue.same_shape(bounds.ue_max)) return false;
  const auto check = [](const SpaceTimeField& v, const SpaceTimeField& hi) {
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!(v.values()[k] >= 0.0 && v.values()[k] <= hi.values()[k])) return false;
    }
    return true;
  };
  return check(u.ui, bounds.ui_max) && check(u.ue, bounds.ue_max);
}

void validate_controls(const Scenario& sc, const ControlPair& u) {
  if (!u.ui.same_shape(sc.bounds.ui_max) || !u.ue.same_shape(sc.bounds.ue_max)) {
    throw ConfigError("controls must have shape steps x cells");
  }
  if (!is_admissible(sc.bounds, u)) throw ValidationError(Assumption::ControlAdmissible);
}

ControlPair scaled_bounds(const ControlBounds& bounds, double fraction) {
  ControlPair u{bounds.ui_max, bounds.ue_max};
  for (double& v : u.ui.values()) v *= fraction;
  for (double& v : u.ue.values()) v *= fraction;
  return u;
}

EpidemicState TransferFluxes::net() const {
  const Mesh& mesh = infection_by_infected.mesh();
  EpidemicState d = EpidemicState::zeros(mesh);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const double infection = infection_by_infected[c] + infection_by_exposed[c];
    d.s[c] = -infection + waning[c];
    d.e[c] = infection - incubation[c] - recovery_exposed[c];
    d.i[c] = incubation[c] - recovery_infected[c];
    d.r[c] = recovery_exposed[c] + recovery_infected[c] - waning[c];
  }
  return d;
}

TransferFluxes transfer_fluxes(const EpidemicState& x, std::span<const double> ui,
                               std::span<const double> ue, const RateConstants& rates, double gamma) {
  const Mesh& mesh = x.s.mesh();
  TransferFluxes f{Field(mesh), Field(mesh), Field(mesh), Field(mesh), Field(mesh), Field(mesh)};
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    f.infection_by_infected[c] = ui[c] * x.s[c] * x.i[c];
    f.infection_by_exposed[c] = ue[c] * x.s[c] * x.e[c];
    f.incubation[c] = rates.sigma * x.e[c];
    f.recovery_exposed[c] = rates.phi_e * x.e[c];
    f.recovery_infected[c] = rates.phi_r * x.i[c];
    f.waning[c] = gamma * x.r[c];
  }
  return f;
}

}  // namespace epictrl
