#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qlmm/cases.hpp"
#include "qlmm/error_norms.hpp"
#include "qlmm/time_integration.hpp"

namespace qlmm {

struct RunSpec {
  std::string case_name;
  CaseParams params;
  int degree = 1;
  int n = 0;   // 1D elements (0: case default)
  int nx = 0;  // 2D cells (0: case default)
  int ny = 0;
  MeshMode mode = MeshMode::Fixed;
  std::optional<double> cfl;
  std::optional<double> m_tvb;
  std::optional<double> final_time;
  std::optional<std::vector<double>> output_times;  // overrides the case's
  double g = 9.812;
  long max_steps = 100000000;
};

// Aggregates over all steps of a run.
struct RunSummary {
  long steps = 0;
  double max_gcl_error = 0.0;
  double max_area_drift = 0.0;  // relative |sum |K| - domain measure|
  double min_stage_area = INFINITY;
  double min_check_h = INFINITY;
  double mass_initial = 0.0;
  double max_mass_drift = 0.0;  // relative
  long tvb_count = 0;
  long pp_count = 0;
  long dt_shrinks = 0;
  long mover_retries = 0;
  double seconds = 0.0;
};

struct RunResult {
  CaseSpec spec;
  RunSpec run;
  std::shared_ptr<const Discretization> disc;
  SolverState state;
  RunSummary summary;
  double final_time = 0.0;
  int resolution = 0;  // n in 1D, nx in 2D
};

struct RunHooks {
  Solver::Observer on_step;
  // Called with the initial state and at every output time (final time included).
  std::function<void(const RunResult&, const SolverState&)> on_output;
};

SolverConfig make_solver_config(const CaseSpec& c, const RunSpec& r);
RunResult run_case(const RunSpec& r, const RunHooks& hooks = {});

// Exact steady state when the case has one; otherwise a fine fixed-mesh P2
// run at `reference_n` elements (0: case default).
struct Reference {
  Evaluator eval;
  std::string note;
};
Reference make_reference(const RunSpec& base, int reference_n = 0);

struct ErrorRow {
  std::string case_name;
  int degree = 1;
  int n = 0;
  std::string mode;
  std::string component;
  double l1 = 0.0;
  double linf = 0.0;
  std::optional<double> order;  // L1 order against the previous N
  double seconds = 0.0;
};

std::vector<ErrorRow> error_rows(const RunResult& res, const Evaluator& reference);

// Runs each N in sequence for every degree; orders log(e_prev/e)/log(N/N_prev).
std::vector<ErrorRow> convergence_study(const RunSpec& base, const std::vector<int>& degrees,
                                        const std::vector<int>& ns, const Evaluator& reference,
                                        int workers = 1);

// Runs independent jobs on `workers` threads. Results keep job order; a
// failing job rethrows its exception after all jobs have finished.
void parallel_for_jobs(int n_jobs, int workers, const std::function<void(int)>& job);

}  // namespace qlmm
