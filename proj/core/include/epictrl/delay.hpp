#pragma once

#include <cstddef>
#include <vector>

#include "epictrl/forward.hpp"

namespace epictrl {

/// Exposed-compartment history on [-tau, T]: the constant prehistory e0 on
/// [-tau, 0] followed by the computed levels.
class DelayedHistory {
 public:
  /// Throws ConfigError unless tau is a positive integer multiple of dt.
  DelayedHistory(Field e0, const TimeGrid& time, double tau);

  /// Field at level index `level` - lag, or e0 when that falls in the prehistory.
  const Field& shifted(std::size_t level) const;

  /// Appends the next computed level (level 1, 2, ...).
  void push(Field e) { levels_.push_back(std::move(e)); }

  std::size_t lag_steps() const { return lag_; }
  std::size_t stored_levels() const { return levels_.size(); }
  const TimeGrid& time() const { return time_; }
  const Field& initial() const { return e0_; }

 private:
  Field e0_;
  TimeGrid time_;
  std::size_t lag_;
  std::vector<Field> levels_;  // levels_[k-1] holds level k
};

/// Number of dt steps in tau; throws ConfigError if tau is not an integer multiple of dt.
std::size_t delay_lag_steps(const TimeGrid& time, double tau);

/// (delta^tau e)(t) = e(t - tau). t must lie on the time grid in [0, T].
const Field& delay_lookup(const DelayedHistory& history, double t, double tau);

/// Interval-wise decoupled integrator: on each interval [k tau, (k+1) tau] the
/// four linear problems are solved in the order i, r, s, e by backward-Euler
/// substeps of size dt, with the delayed exposed field taken from the previous
/// interval (or the prehistory).
Trajectory solve_delay(const Scenario& scenario, const ControlPair& controls, double tau);

struct ConvergenceRow {
  double tau = 0.0;
  double error = 0.0;               ///< sup_k ||delay - reference||_H
  double order = 0.0;               ///< log(error ratio) / log(tau ratio) vs previous row; 0 on the first
  double conservation_defect = 0.0; ///< |int n(T) - int n(0)|
  double defect_order = 0.0;
};

/// Runs solve_delay for each tau against the forward solver at the same dt.
/// Independent tau values run concurrently, up to `max_threads`.
std::vector<ConvergenceRow> convergence_study(const Scenario& scenario, const ControlPair& controls,
                                              const std::vector<double>& tau_list,
                                              unsigned max_threads = 1);

}  // namespace epictrl
