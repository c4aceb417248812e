#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace epictrl {

enum class CommandKind { Simulate, Optimize, Gradcheck, Convergence };

std::optional<CommandKind> parse_command_name(std::string_view name);
std::string_view command_name(CommandKind kind);

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;     ///< I/O and other unexpected errors
inline constexpr int kExitValidation = 2;  ///< config, model assumption or precondition
inline constexpr int kExitNumerical = 3;   ///< solver failure or broken runtime invariant

struct RunOptions {
  CommandKind command = CommandKind::Simulate;
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;  ///< overrides output.directory
  bool dump_adjoint = false;
  std::optional<double> dt;
  std::optional<std::string> tau_list;  ///< "T/4,T/8" style; overrides convergence.tau_list
  bool tangent = false;                 ///< gradcheck: also run the remainder test
};

struct RunResult {
  int exit_code = kExitOk;
  std::vector<std::filesystem::path> artifacts;
  std::string error_record;  ///< one-line JSON, empty on success
};

/// Parses the config, runs one workflow and writes its tables into the output
/// directory. Never throws: failures are reported through the exit code and a
/// JSON error record.
///
///   simulate     timeseries.csv, snapshots/ (if enabled)
///   optimize     iterations.csv, controls_final.csv, timeseries.csv, snapshots/
///   gradcheck    gradient.csv, remainder.csv (with `tangent`)
///   convergence  convergence.csv
///
/// Every run also writes metadata.json. With `dump_adjoint`, adjoint
/// snapshots go to adjoint/.
RunResult run_command(const RunOptions& options);

}  // namespace epictrl
