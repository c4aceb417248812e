#include "epictrl/discretization.hpp"

namespace epictrl {

CompartmentOperators::CompartmentOperators(const Scenario& scenario) : scenario_(&scenario) {}

CompartmentOperators::Entry CompartmentOperators::at(Compartment c, std::size_t step) {
  const auto idx = static_cast<std::size_t>(c);
  Slot& slot = slots_[idx];
  const Coefficient& kappa = scenario_->diffusion[c];
  const bool stale = !slot.op || (kappa.time_dependent() && slot.step != step);
  if (stale) {
    slot.op.emplace(assemble_diffusion(scenario_->mesh, kappa.at(scenario_->mesh, step),
                                       scenario_->diffusion.kappa_lo, scenario_->diffusion.kappa_hi));
    slot.step = step;
    slot.version = next_version_++;
  }
  return {&*slot.op, slot.version};
}

const ImplicitSolver& ShiftedSystem::with_constant(CompartmentOperators::Entry op, double absorption) {
  const auto key = std::make_pair(op.version, absorption);
  auto it = constant_.find(key);
  if (it == constant_.end()) {
    // Drop factorizations of operators that can no longer be requested.
    std::erase_if(constant_, [&](const auto& kv) { return kv.first.first != op.version; });
    // Per-step absorptions (e.g. a waning rate given step by step) would otherwise grow without bound.
    if (constant_.size() >= 8) constant_.clear();
    it = constant_.emplace(key, ImplicitSolver(*op.op, mass_scale_, absorption)).first;
  }
  return it->second;
}

const ImplicitSolver& ShiftedSystem::with_diagonal(CompartmentOperators::Entry op,
                                                   std::span<const double> reaction) {
  if (!variable_ || variable_version_ != op.version) {
    variable_.emplace(*op.op, mass_scale_, reaction);
    variable_version_ = op.version;
  } else {
    variable_->refactor(reaction);
  }
  return *variable_;
}

}  // namespace epictrl
