#include "epictrl/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "epictrl/errors.hpp"
#include "epictrl/io.hpp"

namespace epictrl {

std::string_view initial_guess_name(InitialGuess g) {
  switch (g) {
    case InitialGuess::HalfMax: return "half_max";
    case InitialGuess::Zero: return "zero";
    case InitialGuess::Max: return "max";
  }
  return "unknown";
}

namespace {

class Reader {
 public:
  Reader(std::string_view source, std::filesystem::path base) : source_(source), base_(std::move(base)) {}

  [[noreturn]] void fail(const toml::node* node, std::string_view key, const std::string& msg) const {
    std::ostringstream os;
    os << source_;
    if (node != nullptr && node->source().begin) {
      os << ':' << node->source().begin.line << ':' << node->source().begin.column;
    }
    os << ": key '" << key << "': " << msg;
    throw ConfigError(os.str());
  }

  const toml::table* table(const toml::table& root, std::string_view name, bool required) const {
    const toml::node* n = root.get(name);
    if (n == nullptr) {
      if (required) fail(&root, name, "missing required table");
      return nullptr;
    }
    if (!n->is_table()) fail(n, name, "expected a table");
    return n->as_table();
  }

  void only_keys(const toml::table& t, std::string_view prefix, std::initializer_list<std::string_view> allowed) const {
    const std::set<std::string_view> ok(allowed);
    for (const auto& [k, v] : t) {
      if (!ok.contains(k.str())) fail(&v, join(prefix, k.str()), "unknown key");
    }
  }

  static std::string join(std::string_view prefix, std::string_view key) {
    return prefix.empty() ? std::string(key) : std::string(prefix) + "." + std::string(key);
  }

  double number(const toml::node& n, std::string_view key) const {
    if (auto v = n.value<double>(); v && n.is_number()) return *v;
    fail(&n, key, "expected a number");
  }

  double number(const toml::table& t, std::string_view prefix, std::string_view name,
                std::optional<double> fallback = std::nullopt) const {
    const toml::node* n = t.get(name);
    if (n == nullptr) {
      if (fallback) return *fallback;
      fail(&t, join(prefix, name), "missing required key");
    }
    return number(*n, join(prefix, name));
  }

  std::int64_t integer(const toml::table& t, std::string_view prefix, std::string_view name,
                       std::optional<std::int64_t> fallback = std::nullopt) const {
    const toml::node* n = t.get(name);
    if (n == nullptr) {
      if (fallback) return *fallback;
      fail(&t, join(prefix, name), "missing required key");
    }
    if (!n->is_integer()) fail(n, join(prefix, name), "expected an integer");
    return *n->value<std::int64_t>();
  }

  std::vector<double> numbers(const toml::node& n, std::string_view key) const {
    const toml::array* arr = n.as_array();
    if (arr == nullptr) fail(&n, key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& item : *arr) out.push_back(number(item, key));
    return out;
  }

  std::vector<double> numbers_or_scalar(const toml::node& n, std::string_view key) const {
    if (n.is_number()) return {number(n, key)};
    return numbers(n, key);
  }

  /// A spatial field: number, {file = "..."}, or a Gaussian bump
  /// {base, bump_amplitude, bump_center, bump_width}.
  Field field(const toml::node& n, std::string_view key, const Mesh& mesh) const {
    if (n.is_number()) return Field(mesh, number(n, key));
    const toml::table* t = n.as_table();
    if (t == nullptr) fail(&n, key, "expected a number or a table");
    if (const toml::node* file = t->get("file")) {
      only_keys(*t, key, {"file"});
      const auto name = file->value<std::string>();
      if (!name) fail(file, join(key, "file"), "expected a string");
      std::filesystem::path p(*name);
      if (p.is_relative()) p = base_ / p;
      try {
        return read_snapshot(p, mesh).field;
      } catch (const FormatError& e) {
        fail(file, join(key, "file"), e.what());
      }
    }
    only_keys(*t, key, {"base", "bump_amplitude", "bump_center", "bump_width"});
    const double base = number(*t, key, "base", 0.0);
    const double amp = number(*t, key, "bump_amplitude", 0.0);
    const double width = number(*t, key, "bump_width", 0.1);
    if (!(width > 0.0)) fail(t->get("bump_width"), join(key, "bump_width"), "must be positive");
    std::vector<double> center(static_cast<std::size_t>(mesh.dimension()));
    for (int a = 0; a < mesh.dimension(); ++a) center[a] = 0.5 * mesh.length(a);
    if (const toml::node* c = t->get("bump_center")) {
      const auto v = numbers_or_scalar(*c, join(key, "bump_center"));
      if (v.size() != center.size()) fail(c, join(key, "bump_center"), "needs one coordinate per axis");
      center = v;
    }
    Field f(mesh);
    for (std::size_t cell = 0; cell < mesh.num_cells(); ++cell) {
      double d2 = 0.0;
      for (int a = 0; a < mesh.dimension(); ++a) {
        const double d = mesh.center(cell, a) - center[a];
        d2 += d * d;
      }
      f[cell] = base + amp * std::exp(-d2 / (width * width));
    }
    return f;
  }

  Field field(const toml::table& t, std::string_view prefix, std::string_view name, const Mesh& mesh,
              std::optional<double> fallback = std::nullopt) const {
    const toml::node* n = t.get(name);
    if (n == nullptr) {
      if (fallback) return Field(mesh, *fallback);
      fail(&t, join(prefix, name), "missing required key");
    }
    return field(*n, join(prefix, name), mesh);
  }

 private:
  std::string source_;
  std::filesystem::path base_;
};

std::string_view assumption_key(Assumption a) {
  switch (a) {
    case Assumption::SigmaPositive: return "rates.sigma";
    case Assumption::PhiEPositive: return "rates.phi_e";
    case Assumption::PhiRPositive: return "rates.phi_r";
    case Assumption::GammaNonnegative:
    case Assumption::GammaShape: return "waning.gamma";
    case Assumption::KappaBounds: return "diffusion.kappa_lo";
    case Assumption::KappaRange: return "diffusion";
    case Assumption::InitialNonnegative: return "initial";
    case Assumption::ControlBoundsNonnegative:
    case Assumption::ControlAdmissible: return "control";
    case Assumption::ThresholdPositive: return "threshold.lambda";
    case Assumption::RPositivityStep: return "time.steps";
  }
  return "";
}

ScenarioConfig build(const toml::table& root, const Reader& rd, const ConfigOverrides& ov) {
  rd.only_keys(root, "", {"mesh", "time", "rates", "waning", "diffusion", "initial", "control", "threshold",
                          "optimizer", "output", "gradcheck", "convergence", "seed"});
  InitialGuess guess = InitialGuess::HalfMax;
  OptimizerOptions optim;
  OutputOptions output;
  GradcheckOptions gradcheck;
  std::vector<double> tau_list;
  std::uint64_t seed = 1;

  const toml::table& mt = *rd.table(root, "mesh", true);
  rd.only_keys(mt, "mesh", {"dimension", "cells", "lengths"});
  const auto dim = rd.integer(mt, "mesh", "dimension", 1);
  std::vector<int> cells;
  std::vector<double> lengths;
  if (const toml::node* n = mt.get("cells")) {
    for (double c : rd.numbers_or_scalar(*n, "mesh.cells")) {
      if (c != std::floor(c)) rd.fail(n, "mesh.cells", "expected integers");
      cells.push_back(static_cast<int>(c));
    }
  } else {
    rd.fail(&mt, "mesh.cells", "missing required key");
  }
  if (const toml::node* n = mt.get("lengths")) {
    lengths = rd.numbers_or_scalar(*n, "mesh.lengths");
  } else {
    lengths.assign(cells.size(), 1.0);
  }
  if (cells.size() != static_cast<std::size_t>(dim) || lengths.size() != static_cast<std::size_t>(dim)) {
    rd.fail(&mt, "mesh", "cells and lengths need one entry per dimension");
  }
  Mesh mesh = [&] {
    try {
      return Mesh::build(static_cast<int>(dim), cells, lengths);
    } catch (const ConfigError& e) {
      rd.fail(&mt, "mesh", e.what());
    }
  }();

  const toml::table& tt = *rd.table(root, "time", true);
  rd.only_keys(tt, "time", {"horizon", "steps"});
  TimeGrid time;
  time.horizon = rd.number(tt, "time", "horizon");
  if (!(time.horizon > 0.0)) rd.fail(tt.get("horizon"), "time.horizon", "must be positive");
  const auto steps = rd.integer(tt, "time", "steps");
  if (steps < 1) rd.fail(tt.get("steps"), "time.steps", "must be at least 1");
  time.steps = static_cast<std::size_t>(steps);
  if (ov.dt) {
    const double n = time.horizon / *ov.dt;
    if (!(*ov.dt > 0.0) || std::abs(n - std::round(n)) > 1e-9 * n || std::round(n) < 1) {
      throw ConfigError("--dt " + format_double(*ov.dt) + " does not divide time.horizon");
    }
    time.steps = static_cast<std::size_t>(std::round(n));
  }

  const toml::table& rt = *rd.table(root, "rates", true);
  rd.only_keys(rt, "rates", {"sigma", "phi_e", "phi_r"});
  RateConstants rates{rd.number(rt, "rates", "sigma"), rd.number(rt, "rates", "phi_e"),
                      rd.number(rt, "rates", "phi_r")};

  WaningRate waning = WaningRate::constant(0.0, time.steps);
  if (const toml::table* wt = rd.table(root, "waning", false)) {
    rd.only_keys(*wt, "waning", {"gamma"});
    if (const toml::node* g = wt->get("gamma")) {
      waning = g->is_number() ? WaningRate::constant(rd.number(*g, "waning.gamma"), time.steps)
                              : WaningRate(rd.numbers(*g, "waning.gamma"));
    }
  }

  DiffusionSpec diffusion;
  const toml::table& dt = *rd.table(root, "diffusion", true);
  rd.only_keys(dt, "diffusion", {"kappa_lo", "kappa_hi", "s", "e", "i", "r"});
  diffusion.kappa_lo = rd.number(dt, "diffusion", "kappa_lo");
  diffusion.kappa_hi = rd.number(dt, "diffusion", "kappa_hi");
  constexpr std::array<std::string_view, 4> names{"s", "e", "i", "r"};
  for (std::size_t c = 0; c < 4; ++c) {
    const toml::node* n = dt.get(names[c]);
    if (n == nullptr) rd.fail(&dt, Reader::join("diffusion", names[c]), "missing required key");
    diffusion.kappa[c] = n->is_number() ? Coefficient::constant(rd.number(*n, Reader::join("diffusion", names[c])))
                                        : Coefficient::per_cell(rd.field(*n, Reader::join("diffusion", names[c]), mesh));
  }

  const toml::table& it = *rd.table(root, "initial", true);
  rd.only_keys(it, "initial", {"s", "e", "i", "r"});
  InitialData initial{rd.field(it, "initial", "s", mesh, 0.0), rd.field(it, "initial", "e", mesh, 0.0),
                      rd.field(it, "initial", "i", mesh, 0.0), rd.field(it, "initial", "r", mesh, 0.0)};

  const toml::table& ct = *rd.table(root, "control", true);
  rd.only_keys(ct, "control", {"ui_max", "ue_max", "initial_guess"});
  ControlBounds bounds{SpaceTimeField::repeat(rd.field(ct, "control", "ui_max", mesh), time.steps),
                       SpaceTimeField::repeat(rd.field(ct, "control", "ue_max", mesh), time.steps)};
  if (const toml::node* g = ct.get("initial_guess")) {
    const auto mode = g->value<std::string>();
    if (mode == "half_max") {
      guess = InitialGuess::HalfMax;
    } else if (mode == "zero") {
      guess = InitialGuess::Zero;
    } else if (mode == "max") {
      guess = InitialGuess::Max;
    } else {
      rd.fail(g, "control.initial_guess", "expected \"half_max\", \"zero\" or \"max\"");
    }
  }

  const toml::table& th = *rd.table(root, "threshold", true);
  rd.only_keys(th, "threshold", {"lambda"});
  const ThresholdTarget threshold{rd.number(th, "threshold", "lambda")};

  if (const toml::table* ot = rd.table(root, "optimizer", false)) {
    rd.only_keys(*ot, "optimizer",
                 {"max_iters", "vi_tolerance", "armijo_c", "backtrack_factor", "initial_step", "min_step"});
    auto& o = optim;
    const auto iters = rd.integer(*ot, "optimizer", "max_iters", static_cast<std::int64_t>(o.max_iters));
    if (iters < 0) rd.fail(ot->get("max_iters"), "optimizer.max_iters", "must be nonnegative");
    o.max_iters = static_cast<std::size_t>(iters);
    o.vi_tolerance = rd.number(*ot, "optimizer", "vi_tolerance", o.vi_tolerance);
    o.armijo_c = rd.number(*ot, "optimizer", "armijo_c", o.armijo_c);
    o.backtrack_factor = rd.number(*ot, "optimizer", "backtrack_factor", o.backtrack_factor);
    o.initial_step = rd.number(*ot, "optimizer", "initial_step", o.initial_step);
    o.min_step = rd.number(*ot, "optimizer", "min_step", o.min_step);
    if (!(o.backtrack_factor > 0.0 && o.backtrack_factor < 1.0)) {
      rd.fail(ot->get("backtrack_factor"), "optimizer.backtrack_factor", "must lie in (0, 1)");
    }
    if (!(o.initial_step > 0.0)) rd.fail(ot->get("initial_step"), "optimizer.initial_step", "must be positive");
  }

  if (const toml::table* out = rd.table(root, "output", false)) {
    rd.only_keys(*out, "output", {"directory", "snapshots", "snapshot_every"});
    if (const toml::node* d = out->get("directory")) {
      const auto s = d->value<std::string>();
      if (!s) rd.fail(d, "output.directory", "expected a string");
      output.directory = *s;
    }
    if (const toml::node* s = out->get("snapshots")) {
      if (!s->is_boolean()) rd.fail(s, "output.snapshots", "expected true or false");
      output.snapshots = *s->value<bool>();
    }
    const auto every = rd.integer(*out, "output", "snapshot_every", 0);
    if (every < 0) rd.fail(out->get("snapshot_every"), "output.snapshot_every", "must be nonnegative");
    output.snapshot_every = static_cast<std::size_t>(every);
  }

  if (const toml::table* gt = rd.table(root, "gradcheck", false)) {
    rd.only_keys(*gt, "gradcheck", {"fd_epsilons", "remainder_epsilons"});
    if (const toml::node* n = gt->get("fd_epsilons")) gradcheck.fd_epsilons = rd.numbers(*n, "gradcheck.fd_epsilons");
    if (const toml::node* n = gt->get("remainder_epsilons")) {
      gradcheck.remainder_epsilons = rd.numbers(*n, "gradcheck.remainder_epsilons");
    }
  }

  if (const toml::table* cv = rd.table(root, "convergence", false)) {
    rd.only_keys(*cv, "convergence", {"tau_list"});
    if (const toml::node* n = cv->get("tau_list")) {
      const toml::array* arr = n->as_array();
      if (arr == nullptr) rd.fail(n, "convergence.tau_list", "expected an array");
      for (const auto& item : *arr) {
        if (item.is_number()) {
          tau_list.push_back(rd.number(item, "convergence.tau_list"));
        } else if (const auto s = item.value<std::string>()) {
          try {
            tau_list.push_back(parse_tau(*s, time.horizon));
          } catch (const ConfigError& e) {
            rd.fail(&item, "convergence.tau_list", e.what());
          }
        } else {
          rd.fail(&item, "convergence.tau_list", "expected numbers or strings like \"T/8\"");
        }
      }
    }
  }

  if (const toml::node* s = root.get("seed")) {
    if (!s->is_integer() || *s->value<std::int64_t>() < 0) rd.fail(s, "seed", "expected a nonnegative integer");
    seed = static_cast<std::uint64_t>(*s->value<std::int64_t>());
  }

  Scenario sc{mesh, time, rates, std::move(waning), std::move(diffusion), std::move(initial), std::move(bounds),
              threshold};
  try {
    return ScenarioConfig{validate_scenario(std::move(sc)), guess, optim, std::move(output),
                          std::move(gradcheck), std::move(tau_list), seed, 0};
  } catch (const ValidationError& e) {
    // Keep the original detail (text after the assumption message) and name the config key.
    std::string detail = e.what();
    detail.erase(0, std::min(detail.size(), assumption_message(e.assumption()).size()));
    if (detail.rfind(": ", 0) == 0) detail.erase(0, 2);
    std::string where = "key '" + std::string(assumption_key(e.assumption())) + "'";
    if (!detail.empty()) where += ", " + detail;
    throw ValidationError(e.assumption(), where);
  }
}

}  // namespace

ScenarioConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir,
                                 const ConfigOverrides& overrides, std::string_view source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source << ':' << e.source().begin.line << ':' << e.source().begin.column << ": " << e.description();
    throw ConfigError(os.str());
  }
  ScenarioConfig cfg = build(root, Reader(source, base_dir), overrides);
  std::string keyed(text);
  if (overrides.dt) keyed += "\n#dt-override=" + format_double(*overrides.dt);
  cfg.hash = fnv1a64(keyed);
  return cfg;
}

ScenarioConfig parse_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.parent_path(), overrides, path.string());
}

ControlPair initial_controls(const ScenarioConfig& cfg) {
  switch (cfg.initial_guess) {
    case InitialGuess::Zero: return scaled_bounds(cfg.scenario.bounds, 0.0);
    case InitialGuess::Max: return scaled_bounds(cfg.scenario.bounds, 1.0);
    case InitialGuess::HalfMax: break;
  }
  return scaled_bounds(cfg.scenario.bounds, 0.5);
}

double parse_tau(std::string_view text, double horizon) {
  const auto bad = [&] { return ConfigError("cannot parse tau '" + std::string(text) + "'"); };
  const auto to_double = [&](std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw bad();
    return v;
  };
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.empty()) throw bad();
  const auto slash = text.find('/');
  double tau = 0.0;
  if (slash == std::string_view::npos) {
    tau = to_double(text);
  } else {
    const std::string_view num = text.substr(0, slash);
    const double numerator = (num == "T") ? horizon : to_double(num);
    tau = numerator / to_double(text.substr(slash + 1));
  }
  if (!(tau > 0.0) || !std::isfinite(tau)) throw bad();
  return tau;
}

std::vector<double> parse_tau_list(std::string_view text, double horizon) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string_view::npos ? text.size() : comma;
    out.push_back(parse_tau(text.substr(start, end - start), horizon));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace epictrl
