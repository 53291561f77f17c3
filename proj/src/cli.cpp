#include "qlmm/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>

#include "qlmm/error.hpp"
#include "qlmm/io.hpp"

namespace qlmm {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kCommonKeys = {"case",  "mesh",      "cfl",        "m_tvb",   "g",
                                              "final_time", "epsilon", "level",  "full_scale",
                                              "max_steps",  "output",  "timing", "reference_n"};

const std::vector<std::string> kSweepKeys = [] {
  auto k = kCommonKeys;
  k.insert(k.end(), {"degrees", "ns", "workers"});
  return k;
}();

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  char* end = nullptr;
  errno = 0;
  const double d = std::strtod(t.c_str(), &end);
  if (t.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(d))
    fail(ErrorKind::InvalidConfig, "key '" + key + "': '" + v + "' is not a number");
  return d;
}

long parse_long(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  char* end = nullptr;
  errno = 0;
  const long n = std::strtol(t.c_str(), &end, 10);
  if (t.empty() || *end != '\0' || errno == ERANGE)
    fail(ErrorKind::InvalidConfig, "key '" + key + "': '" + v + "' is not an integer");
  return n;
}

int parse_int(const std::string& key, const std::string& v) {
  const long n = parse_long(key, v);
  if (n < -2147483647L || n > 2147483647L) fail(ErrorKind::InvalidConfig, "key '" + key + "': out of range");
  return static_cast<int>(n);
}

bool parse_bool(const std::string& key, const std::string& v) {
  std::string t = trim(v);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  fail(ErrorKind::InvalidConfig, "key '" + key + "': '" + v + "' is not a boolean");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  for (std::string item; std::getline(ss, item, ',');)
    if (!trim(item).empty()) out.push_back(trim(item));
  return out;
}

MeshMode parse_mode(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "fixed") return MeshMode::Fixed;
  if (t == "moving") return MeshMode::Moving;
  fail(ErrorKind::InvalidConfig, "key '" + key + "': expected 'fixed' or 'moving', got '" + v + "'");
}

std::string catalog_list() {
  std::string s;
  for (const auto& n : case_names()) s += (s.empty() ? "" : ", ") + n;
  return s;
}

void reject_unknown(const Settings& s, const std::vector<std::string>& allowed) {
  for (const auto& [k, v] : s)
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      fail(ErrorKind::InvalidConfig, "unknown key '" + k + "'");
}

// Keys shared by run and sweep. Returns the case (for dimension checks).
CaseSpec apply_common(const Settings& s, RunSpec& r, fs::path& output, bool& timing, int& reference_n) {
  const auto get = [&](const std::string& k) -> std::optional<std::string> {
    auto it = s.find(k);
    if (it == s.end()) return std::nullopt;
    return it->second;
  };
  const auto name = get("case");
  if (!name || trim(*name).empty())
    fail(ErrorKind::InvalidConfig, "missing key 'case'; available cases: " + catalog_list());
  r.case_name = trim(*name);
  if (auto v = get("epsilon")) r.params.epsilon = parse_double("epsilon", *v);
  if (auto v = get("level")) r.params.level = parse_double("level", *v);
  if (auto v = get("full_scale")) r.params.full_scale = parse_bool("full_scale", *v);
  CaseSpec c = make_case(r.case_name, r.params);
  if (auto v = get("cfl")) {
    r.cfl = parse_double("cfl", *v);
    if (!(*r.cfl > 0.0)) fail(ErrorKind::InvalidConfig, "key 'cfl': must be positive");
  }
  if (auto v = get("m_tvb")) {
    r.m_tvb = parse_double("m_tvb", *v);
    if (*r.m_tvb < 0.0) fail(ErrorKind::InvalidConfig, "key 'm_tvb': must be non-negative");
  }
  if (auto v = get("g")) {
    r.g = parse_double("g", *v);
    if (!(r.g > 0.0)) fail(ErrorKind::InvalidConfig, "key 'g': must be positive");
  }
  if (auto v = get("final_time")) {
    r.final_time = parse_double("final_time", *v);
    if (*r.final_time < 0.0) fail(ErrorKind::InvalidConfig, "key 'final_time': must be non-negative");
  }
  if (auto v = get("max_steps")) {
    r.max_steps = parse_long("max_steps", *v);
    if (r.max_steps < 1) fail(ErrorKind::InvalidConfig, "key 'max_steps': must be at least 1");
  }
  if (auto v = get("output")) output = trim(*v);
  if (auto v = get("timing")) timing = parse_bool("timing", *v);
  if (auto v = get("reference_n")) {
    reference_n = parse_int("reference_n", *v);
    if (reference_n < 0) fail(ErrorKind::InvalidConfig, "key 'reference_n': must be non-negative");
  }
  return c;
}

void ensure_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path probe = dir / ".write_probe";
  std::ofstream f(probe);
  if (ec || !f) fail(ErrorKind::InvalidConfig, "key 'output': directory '" + dir.string() + "' is not writable");
  f.close();
  fs::remove(probe, ec);
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

nlohmann::json summary_json(const RunSummary& s, bool timing) {
  nlohmann::json j{{"steps", s.steps},
                   {"max_gcl_error", s.max_gcl_error},
                   {"max_area_drift", s.max_area_drift},
                   {"min_stage_area", std::isfinite(s.min_stage_area) ? nlohmann::json(s.min_stage_area) : nlohmann::json()},
                   {"min_check_h", s.min_check_h},
                   {"mass_initial", s.mass_initial},
                   {"max_mass_drift", s.max_mass_drift},
                   {"tvb_count", s.tvb_count},
                   {"pp_count", s.pp_count},
                   {"dt_shrinks", s.dt_shrinks},
                   {"mover_retries", s.mover_retries}};
  if (timing) j["seconds"] = s.seconds;
  return j;
}

struct SweepConfig {
  RunSpec base;
  std::vector<int> degrees{1, 2};
  std::vector<int> ns{50, 100, 200, 400};
  std::vector<MeshMode> modes{MeshMode::Fixed};
  int workers = 1;
  fs::path output_dir = "out";
  bool timing = false;
  int reference_n = 0;
};

SweepConfig parse_sweep_config(const Settings& s) {
  reject_unknown(s, kSweepKeys);
  SweepConfig c;
  apply_common(s, c.base, c.output_dir, c.timing, c.reference_n);
  if (auto it = s.find("degrees"); it != s.end()) {
    c.degrees.clear();
    for (const auto& d : split_list(it->second)) c.degrees.push_back(parse_int("degrees", d));
  }
  for (int d : c.degrees)
    if (d != 1 && d != 2) fail(ErrorKind::InvalidConfig, "key 'degrees': entries must be 1 or 2");
  if (auto it = s.find("ns"); it != s.end()) {
    c.ns.clear();
    for (const auto& n : split_list(it->second)) c.ns.push_back(parse_int("ns", n));
  }
  if (c.degrees.empty() || c.ns.empty()) fail(ErrorKind::InvalidConfig, "keys 'degrees' and 'ns' must not be empty");
  for (int n : c.ns)
    if (n < 4) fail(ErrorKind::InvalidConfig, "key 'ns': entries must be at least 4");
  if (auto it = s.find("mesh"); it != s.end()) {
    c.modes.clear();
    for (const auto& m : split_list(it->second)) c.modes.push_back(parse_mode("mesh", m));
    if (c.modes.empty()) fail(ErrorKind::InvalidConfig, "key 'mesh' must not be empty");
  }
  if (auto it = s.find("workers"); it != s.end()) {
    c.workers = parse_int("workers", it->second);
    if (c.workers < 1) fail(ErrorKind::InvalidConfig, "key 'workers': must be at least 1");
  }
  return c;
}

// CLI11 options mirroring settings keys; underscores also accepted as hyphens.
const std::map<std::string, std::string> kKeyHelp = {
    {"case", "Case name (see list-cases)"},
    {"mesh", "fixed or moving"},
    {"cfl", "CFL number (case default if omitted)"},
    {"m_tvb", "TVB constant M"},
    {"g", "Gravitational acceleration"},
    {"final_time", "Final time T"},
    {"epsilon", "Perturbation amplitude for perturbation cases"},
    {"level", "Water level override for lake-at-rest cases"},
    {"full_scale", "Use the full-size mesh of the case (true/false)"},
    {"max_steps", "Abort with a nonconvergence error after this many steps"},
    {"output", "Output directory"},
    {"timing", "Write wall-clock seconds to the outputs (true/false)"},
    {"reference_n", "Resolution of the fixed-mesh P2 reference run"},
    {"degree", "Polynomial degree, 1 or 2"},
    {"n", "Number of elements (1D)"},
    {"nx", "Cells in x (2D)"},
    {"ny", "Cells in y (2D)"},
    {"output_times", "Comma-separated snapshot times"},
    {"diagnostics", "Write diagnostics.csv (true/false)"},
    {"errors", "Write errors.csv against the case reference (true/false)"},
    {"degrees", "Comma-separated degrees"},
    {"ns", "Comma-separated resolutions"},
    {"workers", "Parallel runs"},
};

std::map<std::string, CLI::Option*> add_key_options(CLI::App* app, const std::vector<std::string>& keys,
                                                    Settings& values) {
  std::map<std::string, CLI::Option*> opts;
  for (const auto& k : keys) {
    std::string name = "--" + k;
    std::string hyphen = k;
    std::replace(hyphen.begin(), hyphen.end(), '_', '-');
    if (hyphen != k) name += ",--" + hyphen;
    const auto help = kKeyHelp.find(k);
    opts[k] = app->add_option(name, values[k], help != kKeyHelp.end() ? help->second : std::string());
  }
  return opts;
}

Settings merge_settings(const std::string& config_path, const std::map<std::string, CLI::Option*>& opts,
                        const Settings& values) {
  Settings s;
  if (!config_path.empty()) s = read_settings_file(config_path);
  for (const auto& [k, o] : opts)
    if (o->count() > 0) s[k] = values.at(k);
  return s;
}

int solver_failure(const fs::path& dir, const std::string& kind, const std::string& what, std::ostream& err) {
  err << "error (" << kind << "): " << what << '\n';
  try {
    std::error_code ec;
    fs::create_directories(dir, ec);
    write_error_json(dir / "error.json", kind, what);
  } catch (const std::exception& e) {
    err << "could not write error record: " << e.what() << '\n';
  }
  return 1;
}

int run_sweep(const SweepConfig& c, std::ostream& out) {
  const Reference ref = make_reference(c.base, c.reference_n);
  std::vector<ErrorRow> rows;
  for (MeshMode m : c.modes) {
    RunSpec base = c.base;
    base.mode = m;
    auto r = convergence_study(base, c.degrees, c.ns, ref.eval, c.workers);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  write_errors_csv(c.output_dir / "errors.csv", rows, c.timing);
  nlohmann::json info{{"case", c.base.case_name}, {"reference", ref.note}, {"degrees", c.degrees}, {"ns", c.ns}};
  write_json(c.output_dir / "run_info.json", info);
  for (const auto& r : rows) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-8s P%d N=%-6d %-4s L1=%.3e Linf=%.3e order=%s", r.mode.c_str(), r.degree, r.n,
                  r.component.c_str(), r.l1, r.linf, r.order ? std::to_string(*r.order).c_str() : "-");
    out << buf << '\n';
  }
  out << "reference: " << ref.note << '\n';
  return 0;
}

}  // namespace

const std::vector<std::string>& run_keys() {
  static const std::vector<std::string> keys = [] {
    auto k = kCommonKeys;
    k.insert(k.end(), {"degree", "n", "nx", "ny", "output_times", "diagnostics", "errors"});
    return k;
  }();
  return keys;
}

Settings read_settings_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::InvalidConfig, "cannot read config file '" + path.string() + "'");
  Settings s;
  int lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (auto p = line.find('#'); p != std::string::npos) line.resize(p);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::InvalidConfig, path.string() + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) fail(ErrorKind::InvalidConfig, path.string() + ":" + std::to_string(lineno) + ": empty key");
    s[key] = trim(line.substr(eq + 1));
  }
  return s;
}

RunConfig parse_run_config(const Settings& s) {
  reject_unknown(s, run_keys());
  RunConfig cfg;
  RunSpec& r = cfg.run;
  const CaseSpec c = apply_common(s, r, cfg.output_dir, cfg.timing, cfg.reference_n);
  const auto has = [&](const char* k) { return s.count(k) > 0; };
  if (has("degree")) {
    r.degree = parse_int("degree", s.at("degree"));
    if (r.degree != 1 && r.degree != 2) fail(ErrorKind::InvalidConfig, "key 'degree': must be 1 or 2");
  }
  if (c.dim == 1) {
    if (has("nx") || has("ny"))
      fail(ErrorKind::InvalidConfig, "keys 'nx'/'ny' conflict with 1D case '" + c.name + "'; use 'n'");
    if (has("n")) {
      r.n = parse_int("n", s.at("n"));
      if (r.n < 4) fail(ErrorKind::InvalidConfig, "key 'n': must be at least 4");
    }
  } else {
    if (has("n")) fail(ErrorKind::InvalidConfig, "key 'n' conflicts with 2D case '" + c.name + "'; use 'nx'/'ny'");
    if (has("nx")) {
      r.nx = parse_int("nx", s.at("nx"));
      if (r.nx < 1) fail(ErrorKind::InvalidConfig, "key 'nx': must be positive");
    }
    if (has("ny")) {
      r.ny = parse_int("ny", s.at("ny"));
      if (r.ny < 1) fail(ErrorKind::InvalidConfig, "key 'ny': must be positive");
    }
  }
  if (has("mesh")) r.mode = parse_mode("mesh", s.at("mesh"));
  if (has("output_times")) {
    std::vector<double> times;
    for (const auto& t : split_list(s.at("output_times"))) times.push_back(parse_double("output_times", t));
    for (size_t i = 0; i < times.size(); ++i)
      if (times[i] < 0.0 || (i > 0 && times[i] <= times[i - 1]))
        fail(ErrorKind::InvalidConfig, "key 'output_times': must be non-negative and increasing");
    r.output_times = times;
  }
  if (has("diagnostics")) cfg.diagnostics = parse_bool("diagnostics", s.at("diagnostics"));
  if (has("errors")) cfg.errors = parse_bool("errors", s.at("errors"));
  return cfg;
}

void execute(const RunConfig& cfg, std::ostream& log) {
  const fs::path& dir = cfg.output_dir;
  fs::create_directories(dir);
  std::optional<DiagnosticsWriter> diag;
  std::optional<TrajectoryWriter> traj;
  if (cfg.diagnostics) diag.emplace(dir / "diagnostics.csv");
  int snap = 0;
  RunHooks hooks;
  hooks.on_output = [&](const RunResult& res, const SolverState& s) {
    char name[32];
    std::snprintf(name, sizeof name, "snapshot_%03d.csv", snap);
    write_snapshot_csv(dir / name, *res.disc, s);
    std::snprintf(name, sizeof name, "mesh_%03d.csv", snap);
    write_mesh_csv(dir / name, s.mesh);
    if (snap == 0 && cfg.diagnostics && res.spec.dim == 1) {
      traj.emplace(dir / "trajectory.csv");
      traj->write(s.step, s.t, s.mesh);
    }
    ++snap;
  };
  hooks.on_step = [&](const SolverState& s, const StepDiagnostics& d) {
    if (diag) diag->write(s.step, d);
    if (traj) traj->write(s.step, s.t, s.mesh);
  };
  const RunResult res = run_case(cfg.run, hooks);

  nlohmann::json info{{"case", res.spec.name},
                      {"description", res.spec.description},
                      {"degree", cfg.run.degree},
                      {"resolution", res.resolution},
                      {"elements", res.state.mesh.num_elements()},
                      {"mode", to_string(cfg.run.mode)},
                      {"final_time", res.final_time},
                      {"snapshots", snap},
                      {"summary", summary_json(res.summary, cfg.timing)}};
  const CaseSpec& c = res.spec;
  if (cfg.errors && !c.error_components.empty() && (c.exact || cfg.reference_n > 0 || c.reference_n > 0)) {
    const Reference ref = make_reference(cfg.run, cfg.reference_n);
    const auto rows = error_rows(res, ref.eval);
    write_errors_csv(dir / "errors.csv", rows, cfg.timing);
    info["reference"] = ref.note;
    for (const auto& r : rows) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "  %-4s L1=%.6e Linf=%.6e", r.component.c_str(), r.l1, r.linf);
      log << buf << '\n';
    }
  }
  write_json(dir / "run_info.json", info);
  log << res.spec.name << ": P" << cfg.run.degree << ' ' << to_string(cfg.run.mode) << ", " << res.summary.steps
      << " steps to t=" << res.final_time << ", min h " << res.summary.min_check_h << '\n';
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quasi-Lagrange moving-mesh DG solver for the shallow water equations", "qlmm"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run one case");
  std::string run_config;
  Settings run_values;
  run->add_option("--config", run_config, "Config file (key = value per line)");
  const auto run_opts = add_key_options(run, run_keys(), run_values);

  auto* sweep = app.add_subcommand("sweep", "Convergence study over degrees, resolutions and mesh modes");
  std::string sweep_config;
  Settings sweep_values;
  sweep->add_option("--config", sweep_config, "Config file (key = value per line)");
  const auto sweep_opts = add_key_options(sweep, kSweepKeys, sweep_values);

  app.add_subcommand("list-cases", "List the case catalog");
  app.add_subcommand("check", "Run the invariant suite on tiny meshes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  }

  const auto* sub = app.get_subcommands().front();
  if (sub->get_name() == "list-cases") {
    for (const auto& n : case_names()) {
      const CaseSpec c = make_case(n);
      out << n << "\t" << c.dim << "D\t" << c.description << '\n';
    }
    return 0;
  }
  if (sub->get_name() == "check") return run_checks(out) == 0 ? 0 : 1;

  fs::path dir = "out";
  try {
    if (sub == run) {
      const RunConfig cfg = parse_run_config(merge_settings(run_config, run_opts, run_values));
      dir = cfg.output_dir;
      ensure_output_dir(dir);
      execute(cfg, out);
      return 0;
    }
    const SweepConfig cfg = parse_sweep_config(merge_settings(sweep_config, sweep_opts, sweep_values));
    dir = cfg.output_dir;
    ensure_output_dir(dir);
    return run_sweep(cfg, out);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidConfig) {
      err << "config error: " << e.what() << '\n';
      return 2;
    }
    return solver_failure(dir, to_string(e.kind()), e.what(), err);
  } catch (const std::exception& e) {
    return solver_failure(dir, "internal", e.what(), err);
  }
}

}  // namespace qlmm
