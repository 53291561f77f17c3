#include "qlmm/convergence.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "qlmm/error.hpp"

namespace qlmm {

SolverConfig make_solver_config(const CaseSpec& c, const RunSpec& r) {
  SolverConfig cfg;
  cfg.cfl = r.cfl.value_or(c.cfl(r.degree));
  cfg.tvb.m_tvb = r.m_tvb.value_or(c.m_tvb);
  cfg.physics.g = r.g;
  cfg.mode = r.mode;
  cfg.max_steps = r.max_steps;
  if (!(cfg.cfl > 0.0)) fail(ErrorKind::InvalidConfig, "cfl must be positive");
  if (!(cfg.tvb.m_tvb >= 0.0)) fail(ErrorKind::InvalidConfig, "m_tvb must be non-negative");
  if (!(cfg.physics.g > 0.0)) fail(ErrorKind::InvalidConfig, "g must be positive");
  if (cfg.max_steps < 1) fail(ErrorKind::InvalidConfig, "max_steps must be at least 1");
  return cfg;
}

RunResult run_case(const RunSpec& r, const RunHooks& hooks) {
  const auto start = std::chrono::steady_clock::now();
  RunResult res;
  res.run = r;
  res.spec = make_case(r.case_name, r.params);
  const CaseSpec& c = res.spec;
  if (r.degree != 1 && r.degree != 2) fail(ErrorKind::InvalidConfig, "degree must be 1 or 2");
  const int n = r.n > 0 ? r.n : c.default_n;
  const int nx = r.nx > 0 ? r.nx : c.default_nx;
  // ny follows the case aspect ratio when only nx is given
  const int ny = r.ny > 0 ? r.ny : r.nx > 0 ? std::max(1, nx * c.default_ny / c.default_nx) : c.default_ny;
  if (c.dim == 1 && n < 4) fail(ErrorKind::InvalidConfig, "n must be at least 4");
  if (c.dim == 2 && (nx < 1 || ny < 1)) fail(ErrorKind::InvalidConfig, "nx and ny must be positive");
  res.resolution = c.dim == 1 ? n : nx;
  res.final_time = r.final_time.value_or(c.final_time);
  if (!(res.final_time >= 0.0)) fail(ErrorKind::InvalidConfig, "final_time must be non-negative");

  const SimplicialMesh mesh = c.build_mesh(n, nx, ny);
  res.disc = std::make_shared<const Discretization>(c.dim, r.degree);
  const Discretization& disc = *res.disc;
  const SolverConfig cfg = make_solver_config(c, r);
  const auto verts = mesh.vertices();
  Solver solver(disc, cfg, c.bottom, std::vector<Vec2>(verts.begin(), verts.end()));

  SolverState s = solver.initialize(mesh, c.initial);
  RunSummary& sum = res.summary;
  const double domain = mesh.total_measure();
  {
    const DGField h = depth_field(s.u, s.b);
    sum.mass_initial = integral(disc, mesh, h, 0);
    sum.min_check_h = min_checkpoint_value(disc, h);
  }
  const Solver::Observer observer = [&](const SolverState& st, const StepDiagnostics& d) {
    ++sum.steps;
    sum.max_gcl_error = std::max(sum.max_gcl_error, d.gcl_error);
    sum.max_area_drift = std::max(sum.max_area_drift, std::abs(d.total_area - domain) / domain);
    sum.min_stage_area = std::min(sum.min_stage_area, d.min_stage_area);
    sum.min_check_h = std::min({sum.min_check_h, d.min_h, d.min_stage_check_h});
    if (sum.mass_initial != 0.0)
      sum.max_mass_drift = std::max(sum.max_mass_drift, std::abs(d.mass - sum.mass_initial) / std::abs(sum.mass_initial));
    sum.tvb_count += d.tvb_count;
    sum.pp_count += d.pp_count;
    sum.dt_shrinks += d.dt_shrinks;
    sum.mover_retries += d.mover.retries;
    if (hooks.on_step) hooks.on_step(st, d);
  };

  if (hooks.on_output) hooks.on_output(res, s);
  for (double t : r.output_times ? *r.output_times : c.output_times) {
    if (t <= 0.0 || t >= res.final_time) continue;
    solver.advance_to(s, t, observer);
    if (hooks.on_output) hooks.on_output(res, s);
  }
  if (res.final_time > 0.0) {
    solver.advance_to(s, res.final_time, observer);
    if (hooks.on_output) hooks.on_output(res, s);
  }
  res.state = std::move(s);
  sum.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

Reference make_reference(const RunSpec& base, int reference_n) {
  const CaseSpec c = make_case(base.case_name, base.params);
  if (c.exact) return {exact_evaluator(*c.exact, c.bottom), "exact steady state"};
  const int n = reference_n > 0 ? reference_n : c.reference_n;
  if (n <= 0) fail(ErrorKind::InvalidConfig, "case '" + c.name + "' has no reference solution");
  RunSpec r = base;
  r.degree = 2;
  r.mode = MeshMode::Fixed;
  r.cfl.reset();
  if (c.dim == 1) {
    r.n = n;
  } else {
    r.nx = n;
    r.ny = 0;
  }
  const RunResult rr = run_case(r);
  auto sol = std::make_shared<const DiscreteSolution>(rr.disc, rr.state.mesh, rr.state.u, rr.state.b);
  std::string note = "P2 fixed-mesh run with N=" + std::to_string(n);
  if (c.dim == 1 && n == c.reference_n && !c.reference_note.empty()) note = c.reference_note;
  return {[sol](const Vec2& x) { return (*sol)(x); }, note};
}

std::vector<ErrorRow> error_rows(const RunResult& res, const Evaluator& reference) {
  const ErrorReport rep = error_norms(*res.disc, res.state.mesh, res.state.u, res.state.b, reference,
                                      res.spec.error_components);
  std::vector<ErrorRow> rows;
  for (const auto& ce : rep.components)
    rows.push_back({res.spec.name, res.run.degree, res.resolution, to_string(res.run.mode), ce.component,
                    ce.l1, ce.linf, std::nullopt, res.summary.seconds});
  return rows;
}

void parallel_for_jobs(int n_jobs, int workers, const std::function<void(int)>& job) {
  workers = std::max(1, std::min(workers, n_jobs));
  std::atomic<int> next{0};
  std::exception_ptr first;
  std::mutex mu;
  auto worker = [&] {
    for (int i; (i = next.fetch_add(1)) < n_jobs;) {
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first) first = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first) std::rethrow_exception(first);
}

std::vector<ErrorRow> convergence_study(const RunSpec& base, const std::vector<int>& degrees,
                                        const std::vector<int>& ns, const Evaluator& reference,
                                        int workers) {
  const int nd = static_cast<int>(degrees.size());
  const int nn = static_cast<int>(ns.size());
  std::vector<std::vector<ErrorRow>> per(nd * nn);
  parallel_for_jobs(nd * nn, workers, [&](int job) {
    RunSpec r = base;
    r.degree = degrees[job / nn];
    r.n = r.nx = ns[job % nn];
    r.ny = 0;
    per[job] = error_rows(run_case(r), reference);
  });
  std::vector<ErrorRow> out;
  for (int d = 0; d < nd; ++d) {
    for (int i = 0; i < nn; ++i) {
      auto rows = per[d * nn + i];
      if (i > 0) {
        const auto& prev = per[d * nn + i - 1];
        for (size_t c = 0; c < rows.size(); ++c) {
          const double e0 = prev[c].l1;
          const double e1 = rows[c].l1;
          if (e0 > 0.0 && e1 > 0.0)
            rows[c].order = std::log(e0 / e1) / std::log(static_cast<double>(ns[i]) / ns[i - 1]);
        }
      }
      out.insert(out.end(), rows.begin(), rows.end());
    }
  }
  return out;
}

}  // namespace qlmm
