#include "epictrl/errors.hpp"

namespace epictrl {

std::string_view assumption_name(Assumption a) {
  switch (a) {
    case Assumption::SigmaPositive: return "sigma_positive";
    case Assumption::PhiEPositive: return "phi_e_positive";
    case Assumption::PhiRPositive: return "phi_r_positive";
    case Assumption::GammaNonnegative: return "gamma_nonnegative";
    case Assumption::GammaShape: return "gamma_shape";
    case Assumption::KappaBounds: return "kappa_bounds";
    case Assumption::KappaRange: return "kappa_range";
    case Assumption::InitialNonnegative: return "initial_nonnegative";
    case Assumption::ControlBoundsNonnegative: return "control_bounds_nonnegative";
    case Assumption::ControlAdmissible: return "control_admissible";
    case Assumption::ThresholdPositive: return "threshold_positive";
    case Assumption::RPositivityStep: return "r_positivity_step";
  }
  return "unknown";
}

std::string_view assumption_message(Assumption a) {
  switch (a) {
    case Assumption::SigmaPositive: return "sigma must be positive";
    case Assumption::PhiEPositive: return "phi_e must be positive";
    case Assumption::PhiRPositive: return "phi_r must be positive";
    case Assumption::GammaNonnegative: return "gamma must be finite and nonnegative";
    case Assumption::GammaShape: return "gamma must have one value per time step";
    case Assumption::KappaBounds: return "kappa bounds must satisfy 0 < kappa_lo <= kappa_hi";
    case Assumption::KappaRange: return "diffusion coefficient outside [kappa_lo, kappa_hi]";
    case Assumption::InitialNonnegative: return "initial data must be nonnegative";
    case Assumption::ControlBoundsNonnegative: return "control bounds must be nonnegative";
    case Assumption::ControlAdmissible: return "controls must satisfy 0 <= u <= u_max";
    case Assumption::ThresholdPositive: return "lambda must be positive";
    case Assumption::RPositivityStep:
      return "dt * max(gamma) must not exceed 1 (r-positivity restriction of the scheme)";
  }
  return "unknown assumption";
}

ValidationError::ValidationError(Assumption a, const std::string& detail)
    : Error(detail.empty() ? std::string(assumption_message(a))
                           : std::string(assumption_message(a)) + ": " + detail),
      assumption_(a) {}

}  // namespace epictrl
