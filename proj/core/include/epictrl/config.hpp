#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "epictrl/model.hpp"
#include "epictrl/optimizer.hpp"

namespace epictrl {

enum class InitialGuess { HalfMax, Zero, Max };

std::string_view initial_guess_name(InitialGuess g);

struct OutputOptions {
  std::filesystem::path directory = "out";
  bool snapshots = false;
  std::size_t snapshot_every = 0;  ///< 0: only first and last level
};

struct GradcheckOptions {
  std::vector<double> fd_epsilons{1e-3, 1e-4, 1e-5, 1e-6};
  std::vector<double> remainder_epsilons{1e-1, 1e-2, 1e-3, 1e-4};
};

/// A parsed and validated run description.
struct ScenarioConfig {
  Scenario scenario;
  InitialGuess initial_guess = InitialGuess::HalfMax;
  OptimizerOptions optimizer;
  OutputOptions output;
  GradcheckOptions gradcheck;
  std::vector<double> tau_list;  ///< empty: T/4, T/8, T/16
  std::uint64_t seed = 1;
  std::uint64_t hash = 0;  ///< FNV-1a of the config text and overrides
};

struct ConfigOverrides {
  std::optional<double> dt;
};

/// Parses a TOML scenario file. Relative file references are resolved against
/// the directory of `path`. Throws ConfigError (syntax, missing or mistyped
/// keys; the message names the key and position) or ValidationError.
ScenarioConfig parse_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

/// Same, from text already in memory.
ScenarioConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir,
                                 const ConfigOverrides& overrides = {}, std::string_view source = "<string>");

/// Initial controls for the configured guess mode.
ControlPair initial_controls(const ScenarioConfig& config);

/// Parses "0.25", "T/8" or "1/8" against the horizon. Throws ConfigError.
double parse_tau(std::string_view text, double horizon);

/// Comma-separated list of parse_tau items.
std::vector<double> parse_tau_list(std::string_view text, double horizon);

}  // namespace epictrl
