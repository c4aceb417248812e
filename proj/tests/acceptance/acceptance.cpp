// Acceptance driver: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "epictrl/commands.hpp"
#include "epictrl/config.hpp"
#include "epictrl/delay.hpp"
#include "epictrl/forward.hpp"
#include "epictrl/io.hpp"
#include "epictrl/norms.hpp"
#include "epictrl/optimizer.hpp"
#include "epictrl/random.hpp"
#include "epictrl/sensitivity.hpp"
#include "support/support.hpp"

using namespace epictrl;
namespace fs = std::filesystem;
namespace t = epictrl::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<fs::path> shipped_scenarios() {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(EPICTRL_SCENARIO_DIR)) {
    if (e.path().extension() == ".toml") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

unsigned threads() { return std::max(1u, std::min(8u, std::thread::hardware_concurrency())); }

Outcome conservation() {
  Outcome o{true, {}};
  for (const fs::path& p : shipped_scenarios()) {
    const ScenarioConfig cfg = parse_config(p);
    const auto start = std::chrono::steady_clock::now();
    const auto totals = total_population(solve_forward(cfg.scenario, initial_controls(cfg)));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    double drift = 0.0;
    for (double v : totals) drift = std::max(drift, std::abs(v - totals.front()));
    const double rel = drift / totals.front();
    o.pass = o.pass && rel <= 1e-12 && secs < 5.0;
    o.detail += p.stem().string() + " drift " + fmt("%.2e", rel) + " in " + fmt("%.2fs", secs) + "; ";
  }
  return o;
}

// Nonnegativity plus conservation give x_c <= total mass / cell volume cellwise,
// a bound that does not depend on the controls.
Outcome positivity() {
  const ScenarioConfig cfg = parse_config(fs::path(EPICTRL_SCENARIO_DIR) / "reference_1d.toml");
  const Scenario& sc = cfg.scenario;
  double min_value = 0.0, sup_lo = INFINITY, sup_hi = 0.0;
  double bound = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Trajectory traj = solve_forward(sc, random_controls(sc.bounds, cfg.seed + seed));
    bound = total_population(traj).front() / sc.mesh.cell_volume();
    double sup = 0.0;
    for (const auto& x : traj.levels) {
      for (Compartment c : kCompartments) {
        min_value = std::min(min_value, x[c].min());
        sup = std::max(sup, x[c].max());
      }
    }
    sup_lo = std::min(sup_lo, sup);
    sup_hi = std::max(sup_hi, sup);
  }
  return {min_value >= -1e-12 && sup_hi <= bound,
          "min " + fmt("%.2e", min_value) + ", sup in [" + fmt("%.4f", sup_lo) + ", " + fmt("%.4f", sup_hi) +
              "], bound " + fmt("%.2f", bound)};
}

Outcome ode_limit() {
  const ScenarioConfig cfg = parse_config(fs::path(EPICTRL_SCENARIO_DIR) / "ode_limit.toml");
  const Scenario& sc = cfg.scenario;
  const Trajectory traj = solve_forward(sc, initial_controls(cfg));
  // e' = -(sigma + phi_e) e, i' = sigma e - phi_r i, by variation of constants
  const double a = sc.rates.sigma + sc.rates.phi_e;
  const double b = sc.rates.phi_r;
  const double T = sc.time.horizon;
  const double e0 = sc.initial.e[0], i0 = sc.initial.i[0];
  const double e_exact = e0 * std::exp(-a * T);
  const double i_exact = i0 * std::exp(-b * T) + sc.rates.sigma * e0 * (std::exp(-a * T) - std::exp(-b * T)) / (b - a);
  double err_e = 0.0, err_i = 0.0;
  for (std::size_t c = 0; c < sc.mesh.num_cells(); ++c) {
    err_e = std::max(err_e, std::abs(traj.back().e[c] - e_exact) / e_exact);
    err_i = std::max(err_i, std::abs(traj.back().i[c] - i_exact) / i_exact);
  }
  return {err_e <= 1e-4 && err_i <= 1e-4 && sc.time.dt() == 1e-3,
          "rel error e " + fmt("%.2e", err_e) + ", i " + fmt("%.2e", err_i)};
}

Outcome delay_convergence() {
  const Scenario sc = t::delay_scenario(1024, 32);
  const ControlPair u = t::constant_controls(sc, 0.8, 0.3);
  const auto rows = convergence_study(sc, u, {0.25, 0.125, 0.0625, 0.03125}, threads());
  bool ok = true;
  std::string d = "orders";
  for (std::size_t k = 1; k < rows.size(); ++k) {
    ok = ok && std::abs(rows[k].order - 1.0) <= 0.3 && std::abs(rows[k].defect_order - 1.0) <= 0.3;
    d += " " + fmt("%.3f", rows[k].order) + "/" + fmt("%.3f", rows[k].defect_order);
  }
  return {ok, d + " (error/defect)"};
}

Outcome frechet() {
  const Scenario sc = t::reference_scenario();
  const auto rows = frechet_remainder_check(sc, t::reference_controls(sc), t::reference_direction(sc),
                                            {1e-1, 1e-2, 1e-3, 1e-4}, threads());
  bool ok = rows.size() == 4;
  std::string d = "ratios";
  for (const auto& r : rows) {
    ok = ok && r.ratio >= 3.0 && r.ratio <= 5.0;
    d += " " + fmt("%.4f", r.ratio);
  }
  return {ok, d};
}

Outcome gradient() {
  std::vector<double> errors;
  for (std::size_t steps : {1000u, 2000u}) {
    const Scenario sc = t::reference_scenario(steps);
    const ControlPair u = t::reference_controls(sc);
    const ControlPair h = t::reference_direction(sc);
    const double fd = fd_directional_derivative(sc, u, h, 1e-5, nullptr, 2);
    errors.push_back(std::abs(adjoint_directional_derivative(sc, u, h) - fd) / std::abs(fd));
  }
  const double ratio = errors[0] / errors[1];
  return {errors[0] <= 1e-3 && std::abs(ratio - 2.0) <= 0.6,
          "rel error " + fmt("%.3e", errors[0]) + " at dt=1e-3, " + fmt("%.3e", errors[1]) + " at dt/2, ratio " +
              fmt("%.3f", ratio)};
}

Outcome stationarity() {
  const ScenarioConfig cfg = parse_config(fs::path(EPICTRL_SCENARIO_DIR) / "above_threshold_1d.toml");
  const OptimizationReport rep = projected_gradient_descent(cfg.scenario, initial_controls(cfg), cfg.optimizer);
  bool monotone = true;
  for (std::size_t k = 1; k < rep.iterations.size(); ++k) {
    monotone = monotone && rep.iterations[k].cost.total <= rep.iterations[k - 1].cost.total;
  }
  const double tol = cfg.optimizer.vi_tolerance;
  return {rep.reason == Termination::Converged && tol <= 1e-6 && rep.final_vi_residual <= tol && monotone &&
              rep.fixed_point_residual <= 10 * tol && rep.iterations.back().cost.terminal_term > 0.0,
          std::to_string(rep.iterations.size() - 1) + " iterations, VI " + fmt("%.2e", rep.final_vi_residual) +
              ", fixed point " + fmt("%.2e", rep.fixed_point_residual) + ", final cost " +
              fmt("%.6e", rep.iterations.back().cost.total)};
}

Outcome trivial_optimum() {
  const ScenarioConfig cfg = parse_config(fs::path(EPICTRL_SCENARIO_DIR) / "below_threshold_1d.toml");
  const Scenario& sc = cfg.scenario;
  const ControlPair umax = scaled_bounds(sc.bounds, 1.0);
  const OptimizationReport rep = projected_gradient_descent(sc, umax, cfg.optimizer);
  const double dt = sc.time.dt();
  const double rel = control_norm(sc.mesh, dt, rep.controls) / control_norm(sc.mesh, dt, umax);
  return {rel <= 1e-6, "||u||/||u_max|| = " + fmt("%.2e", rel) + " after " +
                           std::to_string(rep.iterations.size() - 1) + " iterations"};
}

Outcome continuous_dependence() {
  const Scenario sc = t::reference_scenario();
  const ControlPair u = t::reference_controls(sc);
  const ControlPair h = t::reference_direction(sc);
  std::vector<double> ratios;
  for (double eps : {1e-1, 1e-2, 1e-3}) ratios.push_back(continuous_dependence_probe(sc, u, perturbed(u, h, eps)).ratio);
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  const bool stable = *lo > 0.0 && *hi <= 1.25 * *lo;

  const ControlPair mid = scaled_bounds(sc.bounds, 0.5);
  double worst = 0.0;
  bool finite = true;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto rep = continuous_dependence_probe(sc, mid, perturbed(mid, random_direction(sc.bounds, seed), 0.1));
    finite = finite && std::isfinite(rep.ratio) && !rep.identical_controls;
    worst = std::max(worst, rep.ratio);
  }
  return {stable && finite && worst < 10.0, "ratio spread " + fmt("%.4f", *hi / *lo) + ", max over 20 directions " +
                                                 fmt("%.4f", worst)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "epictrl_acceptance_determinism";
  fs::remove_all(root);
  const std::string hash = hex64(parse_config(fs::path(EPICTRL_SCENARIO_DIR) / "reference_1d.toml").hash);
  bool ok = true;
  std::size_t files = 0;
  for (CommandKind k : {CommandKind::Simulate, CommandKind::Optimize, CommandKind::Gradcheck, CommandKind::Convergence}) {
    std::vector<RunResult> runs;
    for (const char* sub : {"a", "b"}) {
      RunOptions opt;
      opt.command = k;
      opt.config = fs::path(EPICTRL_SCENARIO_DIR) / "reference_1d.toml";
      opt.out = root / std::string(command_name(k)) / sub;
      opt.tangent = k == CommandKind::Gradcheck;
      runs.push_back(run_command(opt));
    }
    ok = ok && runs[0].exit_code == kExitOk && runs[1].exit_code == kExitOk &&
         runs[0].artifacts.size() == runs[1].artifacts.size();
    if (!ok) break;
    for (std::size_t n = 0; n < runs[0].artifacts.size(); ++n) {
      const std::string a = slurp(runs[0].artifacts[n]);
      ok = ok && a == slurp(runs[1].artifacts[n]);
      const fs::path& p = runs[0].artifacts[n];
      if (p.extension() == ".json") {
        ok = ok && nlohmann::json::parse(a)["config_hash"] == hash;
      } else if (p.parent_path() == runs[0].artifacts.front().parent_path()) {
        ok = ok && a.find("# config_hash=" + hash) == 0;
      }
      ++files;
    }
  }
  fs::remove_all(root);
  return {ok, std::to_string(files) + " files compared, config hash " + hash};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double limit_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"1 conservation", 5.0 * 5, conservation},
      {"2 positivity_boundedness", 60.0, positivity},
      {"3 ode_limit", 5.0, ode_limit},
      {"4 delay_convergence", 60.0, delay_convergence},
      {"5 frechet_remainder", 60.0, frechet},
      {"6 gradient_consistency", 120.0, gradient},
      {"7 optimizer_stationarity", 600.0, stationarity},
      {"8 trivial_optimum", 60.0, trivial_optimum},
      {"9 continuous_dependence", 120.0, continuous_dependence},
      {"10 determinism", 600.0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = o.pass && secs < c.limit_seconds;
    failures += pass ? 0 : 1;
    std::printf("%s criterion %s: %s [%.2fs, limit %.0fs]\n", pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs,
                c.limit_seconds);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
