#include "epictrl/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "epictrl/adjoint.hpp"
#include "epictrl/config.hpp"
#include "epictrl/delay.hpp"
#include "epictrl/errors.hpp"
#include "epictrl/forward.hpp"
#include "epictrl/io.hpp"
#include "epictrl/norms.hpp"
#include "epictrl/optimizer.hpp"
#include "epictrl/parallel.hpp"
#include "epictrl/random.hpp"
#include "epictrl/sensitivity.hpp"

namespace epictrl {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::optional<CommandKind> parse_command_name(std::string_view name) {
  if (name == "simulate") return CommandKind::Simulate;
  if (name == "optimize") return CommandKind::Optimize;
  if (name == "gradcheck") return CommandKind::Gradcheck;
  if (name == "convergence") return CommandKind::Convergence;
  return std::nullopt;
}

std::string_view command_name(CommandKind kind) {
  switch (kind) {
    case CommandKind::Simulate: return "simulate";
    case CommandKind::Optimize: return "optimize";
    case CommandKind::Gradcheck: return "gradcheck";
    case CommandKind::Convergence: return "convergence";
  }
  return "unknown";
}

namespace {

class RunContext {
 public:
  RunContext(const RunOptions& opts, const ScenarioConfig& cfg, fs::path dir)
      : opts_(opts), cfg_(cfg), dir_(std::move(dir)) {
    fs::create_directories(dir_);
  }

  const ScenarioConfig& cfg() const { return cfg_; }
  const Scenario& sc() const { return cfg_.scenario; }

  std::vector<std::string> comments() const {
    return {"config_hash=" + hex64(cfg_.hash) + " command=" + std::string(command_name(opts_.command))};
  }

  CsvWriter table(const std::string& name, const std::vector<std::string>& columns) {
    return CsvWriter(artifact(name), comments(), columns);
  }

  fs::path artifact(const fs::path& relative) {
    const fs::path p = dir_ / relative;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    artifacts_.push_back(p);
    return p;
  }

  /// Levels written as snapshots: 0, N and every `snapshot_every`-th.
  std::vector<std::size_t> snapshot_levels(std::size_t last) const {
    std::vector<std::size_t> levels{0};
    const std::size_t every = cfg_.output.snapshot_every;
    if (every > 0) {
      for (std::size_t k = every; k < last; k += every) levels.push_back(k);
    }
    if (last > 0) levels.push_back(last);
    return levels;
  }

  ordered_json& result() { return result_; }
  std::vector<fs::path>& artifacts() { return artifacts_; }

  void write_metadata(SolverKind solver) {
    const Scenario& s = sc();
    ordered_json meta;
    meta["format"] = "epictrl-run/1";
    meta["command"] = command_name(opts_.command);
    meta["config_hash"] = hex64(cfg_.hash);
    meta["config_file"] = opts_.config.filename().string();
    meta["seed"] = cfg_.seed;
    ordered_json mesh;
    mesh["dimension"] = s.mesh.dimension();
    mesh["cells"] = ordered_json::array();
    mesh["lengths"] = ordered_json::array();
    for (int a = 0; a < s.mesh.dimension(); ++a) {
      mesh["cells"].push_back(s.mesh.cells(a));
      mesh["lengths"].push_back(s.mesh.length(a));
    }
    meta["mesh"] = mesh;
    meta["time"] = {{"horizon", s.time.horizon}, {"steps", s.time.steps}, {"dt", s.time.dt()}};
    meta["scheme"] = {
        {"space", "cell-centered finite volume, two-point flux, arithmetic-mean face conductivity, zero flux"},
        {"time", "semi-implicit backward Euler, Gauss-Seidel order s,e,i,r"},
        {"adjoint", "backward Euler on the continuous adjoint system, order z,w,q,p"},
        {"delay", "interval-wise linear solves in order i,r,s,e"},
        {"gradient_pairing", "forward i_n,e_n,s_{n+1} with adjoint p_n,q_n"},
    };
    meta["linear_solver"] = {{"kind", solver_kind_name(solver)},
                             {"tolerance", "direct factorization (roundoff only)"}};
    meta["tolerances"] = {{"negative_clamp", kNegativeTolerance},
                          {"kink", kKinkTolerance},
                          {"vi_tolerance", cfg_.optimizer.vi_tolerance},
                          {"vi_normalization", "||u_max||_L2(Q) + 1"}};
    meta["result"] = result_;
    std::ofstream out(artifact("metadata.json"));
    out << meta.dump(2) << '\n';
  }

 private:
  const RunOptions& opts_;
  const ScenarioConfig& cfg_;
  fs::path dir_;
  std::vector<fs::path> artifacts_;
  ordered_json result_ = ordered_json::object();
};

std::string level_name(std::size_t level) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "level_%06zu", level);
  return buf;
}

void write_timeseries(RunContext& ctx, const Trajectory& traj) {
  CsvWriter csv = ctx.table("timeseries.csv", {"t", "int_s", "int_e", "int_i", "int_r", "total", "min_s", "min_e",
                                               "min_i", "min_r", "max_s", "max_e", "max_i", "max_r"});
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const EpidemicState& x = traj[k];
    const double is = integrate(x.s), ie = integrate(x.e), ii = integrate(x.i), ir = integrate(x.r);
    csv.row({traj.time.time(k), is, ie, ii, ir, is + ie + ii + ir, x.s.min(), x.e.min(), x.i.min(), x.r.min(),
             x.s.max(), x.e.max(), x.i.max(), x.r.max()});
  }
}

void write_state_snapshots(RunContext& ctx, const Trajectory& traj) {
  constexpr std::array<const char*, 4> names{"s", "e", "i", "r"};
  for (std::size_t k : ctx.snapshot_levels(traj.size() - 1)) {
    for (std::size_t c = 0; c < 4; ++c) {
      const fs::path p = ctx.artifact(fs::path("snapshots") / (level_name(k) + "_" + names[c] + ".csv"));
      write_snapshot(p, traj[k][kCompartments[c]], k, names[c]);
    }
  }
}

void write_adjoint_snapshots(RunContext& ctx, const AdjointTrajectory& adj) {
  for (std::size_t k : ctx.snapshot_levels(adj.size() - 1)) {
    const AdjointState& a = adj[k];
    const std::array<std::pair<const char*, const Field*>, 4> fields{
        {{"p", &a.p}, {"q", &a.q}, {"w", &a.w}, {"z", &a.z}}};
    for (const auto& [name, f] : fields) {
      write_snapshot(ctx.artifact(fs::path("adjoint") / (level_name(k) + "_" + name + ".csv")), *f, k, name);
    }
  }
}

void write_control_snapshots(RunContext& ctx, const ControlPair& u) {
  const Mesh& mesh = ctx.sc().mesh;
  for (std::size_t n : ctx.snapshot_levels(u.ui.steps() - 1)) {
    const auto ui = u.ui.at_step(n);
    const auto ue = u.ue.at_step(n);
    char step[32];
    std::snprintf(step, sizeof(step), "step_%06zu", n);
    write_snapshot(ctx.artifact(fs::path("snapshots") / (std::string(step) + "_ui.csv")),
                   Field(mesh, std::vector<double>(ui.begin(), ui.end())), n, "ui");
    write_snapshot(ctx.artifact(fs::path("snapshots") / (std::string(step) + "_ue.csv")),
                   Field(mesh, std::vector<double>(ue.begin(), ue.end())), n, "ue");
  }
}

SolverKind solver_for(const Scenario& sc) {
  return sc.mesh.dimension() == 1 ? SolverKind::Tridiagonal : SolverKind::SparseLDLT;
}

void run_simulate(RunContext& ctx, const RunOptions& opts) {
  const Scenario& sc = ctx.sc();
  const ControlPair u = initial_controls(ctx.cfg());
  const Trajectory traj = solve_forward(sc, u);
  write_timeseries(ctx, traj);
  if (ctx.cfg().output.snapshots) write_state_snapshots(ctx, traj);
  const CostBreakdown cost = evaluate_cost(sc, traj, u);
  const auto totals = total_population(traj);
  double drift = 0.0;
  for (double t : totals) drift = std::max(drift, std::abs(t - totals.front()));
  ctx.result() = {{"cost", cost.total}, {"terminal_term", cost.terminal_term}, {"control_term", cost.control_term},
                  {"max_total_drift", drift}};
  if (opts.dump_adjoint) {
    const AdjointTrajectory adj = solve_adjoint(sc, traj, u);
    write_adjoint_snapshots(ctx, adj);
    ctx.result()["kink_cells"] = adj.kink_cells;
  }
}

void run_optimize(RunContext& ctx, const RunOptions& opts) {
  const Scenario& sc = ctx.sc();
  const OptimizationReport report = projected_gradient_descent(sc, initial_controls(ctx.cfg()), ctx.cfg().optimizer);
  {
    CsvWriter csv = ctx.table("iterations.csv", {"iteration", "cost", "terminal_term", "control_term",
                                                 "vi_residual", "step", "backtracks"});
    for (const IterationRecord& r : report.iterations) {
      csv.row({static_cast<double>(r.iteration), r.cost.total, r.cost.terminal_term, r.cost.control_term,
               r.vi_residual, r.step, static_cast<double>(r.backtracks)});
    }
  }
  {
    CsvWriter csv = ctx.table("controls_final.csv", {"step", "t", "cell", "ui", "ue"});
    const ControlPair& u = report.controls;
    for (std::size_t n = 0; n < u.ui.steps(); ++n) {
      for (std::size_t c = 0; c < u.ui.cells(); ++c) {
        csv.row({static_cast<double>(n), sc.time.time(n), static_cast<double>(c), u.ui(n, c), u.ue(n, c)});
      }
    }
  }
  const Trajectory traj = solve_forward(sc, report.controls);
  write_timeseries(ctx, traj);
  if (ctx.cfg().output.snapshots) {
    write_state_snapshots(ctx, traj);
    write_control_snapshots(ctx, report.controls);
  }
  if (opts.dump_adjoint) write_adjoint_snapshots(ctx, solve_adjoint(sc, traj, report.controls));
  ctx.result() = {{"termination", termination_name(report.reason)},
                  {"iterations", report.iterations.size() - 1},
                  {"final_cost", report.iterations.back().cost.total},
                  {"final_vi_residual", report.final_vi_residual},
                  {"fixed_point_residual", report.fixed_point_residual},
                  {"forward_solves", report.forward_solves},
                  {"adjoint_solves", report.adjoint_solves}};
}

void run_gradcheck(RunContext& ctx, const RunOptions& opts) {
  const Scenario& sc = ctx.sc();
  const ControlPair u = initial_controls(ctx.cfg());
  const ControlPair h = random_direction(sc.bounds, ctx.cfg().seed);
  const unsigned threads = thread_limit();

  const Trajectory traj = solve_forward(sc, u);
  const AdjointTrajectory adj = solve_adjoint(sc, traj, u);
  const double adjoint_dd = gradient_dot(sc.mesh, sc.time.dt(), reduced_gradient(traj, adj, u), h);
  const double tangent_dd = tangent_directional_derivative(sc, u, h);
  const auto rel = [](double a, double ref) { return std::abs(a - ref) / std::max(std::abs(ref), 1e-12); };
  {
    CsvWriter csv = ctx.table("gradient.csv", {"fd_epsilon", "used_epsilon", "fd_derivative", "adjoint_derivative",
                                               "tangent_derivative", "adjoint_rel_error", "tangent_rel_error"});
    for (double eps : ctx.cfg().gradcheck.fd_epsilons) {
      double used = 0.0;
      const double fd = fd_directional_derivative(sc, u, h, eps, &used, threads);
      csv.row({eps, used, fd, adjoint_dd, tangent_dd, rel(adjoint_dd, fd), rel(tangent_dd, fd)});
    }
  }
  ctx.result() = {{"adjoint_derivative", adjoint_dd}, {"tangent_derivative", tangent_dd},
                  {"kink_cells", adj.kink_cells}};
  if (opts.tangent) {
    const auto rows = frechet_remainder_check(sc, u, h, ctx.cfg().gradcheck.remainder_epsilons, threads);
    CsvWriter csv = ctx.table("remainder.csv", {"epsilon", "remainder", "remainder_half", "ratio",
                                                "remainder_over_eps"});
    for (const RemainderRow& r : rows) {
      csv.row({r.epsilon, r.remainder, r.remainder_half, r.ratio, r.remainder_over_eps});
    }
  }
  if (opts.dump_adjoint) write_adjoint_snapshots(ctx, adj);
}

void run_convergence(RunContext& ctx, const RunOptions& opts) {
  const Scenario& sc = ctx.sc();
  std::vector<double> taus = ctx.cfg().tau_list;
  if (opts.tau_list) taus = parse_tau_list(*opts.tau_list, sc.time.horizon);
  if (taus.empty()) {
    for (double d : {4.0, 8.0, 16.0}) taus.push_back(sc.time.horizon / d);
  }
  const auto rows = convergence_study(sc, initial_controls(ctx.cfg()), taus, thread_limit());
  CsvWriter csv = ctx.table("convergence.csv", {"tau", "error", "order", "conservation_defect", "defect_order"});
  for (const ConvergenceRow& r : rows) csv.row({r.tau, r.error, r.order, r.conservation_defect, r.defect_order});
}

std::string error_record(std::string_view kind, const std::string& message, int code,
                         std::optional<std::string_view> assumption = std::nullopt) {
  ordered_json rec;
  rec["status"] = "error";
  rec["kind"] = kind;
  if (assumption) rec["assumption"] = *assumption;
  rec["message"] = message;
  rec["exit_code"] = code;
  return rec.dump();
}

}  // namespace

RunResult run_command(const RunOptions& opts) {
  RunResult res;
  try {
    const ScenarioConfig cfg = parse_config(opts.config, ConfigOverrides{opts.dt});
    RunContext ctx(opts, cfg, opts.out ? *opts.out : cfg.output.directory);
    switch (opts.command) {
      case CommandKind::Simulate: run_simulate(ctx, opts); break;
      case CommandKind::Optimize: run_optimize(ctx, opts); break;
      case CommandKind::Gradcheck: run_gradcheck(ctx, opts); break;
      case CommandKind::Convergence: run_convergence(ctx, opts); break;
    }
    ctx.write_metadata(solver_for(cfg.scenario));
    res.artifacts = std::move(ctx.artifacts());
  } catch (const ValidationError& e) {
    res.exit_code = kExitValidation;
    res.error_record = error_record("validation", e.what(), res.exit_code, assumption_name(e.assumption()));
  } catch (const ConfigError& e) {
    res.exit_code = kExitValidation;
    res.error_record = error_record("config", e.what(), res.exit_code);
  } catch (const FormatError& e) {
    res.exit_code = kExitValidation;
    res.error_record = error_record("format", e.what(), res.exit_code);
  } catch (const PreconditionError& e) {
    res.exit_code = kExitValidation;
    res.error_record = error_record("precondition", e.what(), res.exit_code);
  } catch (const NumericalError& e) {
    res.exit_code = kExitNumerical;
    res.error_record = error_record("numerical", e.what(), res.exit_code);
  } catch (const std::exception& e) {
    res.exit_code = kExitFailure;
    res.error_record = error_record("internal", e.what(), res.exit_code);
  }
  return res;
}

}  // namespace epictrl
