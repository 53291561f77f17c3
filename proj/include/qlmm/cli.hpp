#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "qlmm/convergence.hpp"

namespace qlmm {

// Flat key/value settings. Config files hold one `key = value` per line;
// `#` starts a comment.
using Settings = std::map<std::string, std::string>;

struct RunConfig {
  RunSpec run;
  std::filesystem::path output_dir = "out";
  bool diagnostics = true;
  bool timing = false;    // wall-clock seconds in errors.csv
  bool errors = true;     // compute errors.csv against the case reference
  int reference_n = 0;    // 0: case default
};

// Keys accepted by `run` (and in config files).
const std::vector<std::string>& run_keys();

Settings read_settings_file(const std::filesystem::path& path);
// Throws Error(InvalidConfig) naming the offending key.
RunConfig parse_run_config(const Settings& s);

// Runs the case and writes artifacts. Solver errors propagate.
void execute(const RunConfig& cfg, std::ostream& log);

// Exit codes: 0 success, 1 solver failure, 2 configuration error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Invariant suite on tiny meshes; returns the number of failed checks.
int run_checks(std::ostream& out);

}  // namespace qlmm
