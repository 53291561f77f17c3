#include <cmath>
#include <ostream>
#include <sstream>

#include "qlmm/cli.hpp"
#include "qlmm/error.hpp"

namespace qlmm {

namespace {

struct Tally {
  std::ostream& out;
  int failed = 0;

  void report(const std::string& name, bool ok, const std::string& detail) {
    out << (ok ? "PASS  " : "FAIL  ") << name << "  " << detail << '\n';
    if (!ok) ++failed;
  }
};

std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

void check_run(Tally& t, const RunSpec& r, bool well_balanced) {
  std::string label = r.case_name + " P" + std::to_string(r.degree) + " " + to_string(r.mode);
  try {
    const RunResult res = run_case(r);
    const RunSummary& s = res.summary;
    t.report(label + " mesh", s.max_area_drift <= 1e-12 && s.max_gcl_error <= 1e-12 && s.min_stage_area > 0.0,
             "area drift " + sci(s.max_area_drift) + ", gcl " + sci(s.max_gcl_error));
    t.report(label + " depth", s.min_check_h >= -1e-14, "min h " + sci(s.min_check_h));
    if (well_balanced) {
      const Reference ref = make_reference(r);
      double worst = 0.0;
      for (const auto& row : error_rows(res, ref.eval)) worst = std::max({worst, row.l1, row.linf});
      t.report(label + " well-balance", worst <= 1e-12, "max error " + sci(worst));
    }
  } catch (const std::exception& e) {
    t.report(label, false, e.what());
  }
}

}  // namespace

int run_checks(std::ostream& out) {
  Tally t{out};
  for (const char* name : {"lake-at-rest-1d-smooth", "lake-at-rest-1d-discontinuous", "lake-at-rest-1d-dry"})
    for (int k : {1, 2})
      for (MeshMode m : {MeshMode::Fixed, MeshMode::Moving}) {
        RunSpec r;
        r.case_name = name;
        r.degree = k;
        r.mode = m;
        r.n = 12;
        r.final_time = 0.05;
        check_run(t, r, true);
      }
  for (const char* name : {"lake-at-rest-2d", "lake-at-rest-2d-dry"}) {
    RunSpec r;
    r.case_name = name;
    r.degree = 1;
    r.mode = MeshMode::Moving;
    r.nx = r.ny = 3;
    r.final_time = 0.01;
    check_run(t, r, true);
  }

  // periodic run: the integral of h is conserved
  {
    RunSpec r;
    r.case_name = "accuracy-1d";
    r.degree = 2;
    r.n = 20;
    r.final_time = 0.002;
    check_run(t, r, false);
    try {
      const RunResult res = run_case(r);
      t.report("accuracy-1d mass", res.summary.max_mass_drift <= 1e-12, "drift " + sci(res.summary.max_mass_drift));
    } catch (const std::exception& e) {
      t.report("accuracy-1d mass", false, e.what());
    }
  }

  // limiters keep cell averages
  for (int dim : {1, 2}) {
    const std::string label = "limiters " + std::to_string(dim) + "D";
    try {
      const Discretization disc(dim, 2);
      const SimplicialMesh mesh = dim == 1 ? build_uniform_mesh_1d(0.0, 1.0, 16, BoundaryKind::Periodic)
                                           : build_uniform_mesh_2d({{0.0, 0.0}, {1.0, 1.0}}, 3, 3,
                                                                   {BoundaryKind::Periodic, BoundaryKind::Periodic});
      const auto f = [](const Vec2& x) {
        const double s = x.x + 0.7 * x.y;
        return std::array<double, 3>{s < 0.5 ? 2.0 : 0.3 + 0.1 * std::sin(9.0 * s), std::cos(7.0 * s),
                                     std::sin(5.0 * x.y)};
      };
      const DGField b0 = l2_project(disc, mesh, [](const Vec2& x) { return std::array<double, 3>{0.1 * x.x, 0, 0}; }, 1);
      DGField u = l2_project(disc, mesh, f, dim + 1);
      const DGField before = u;
      tvb_limit(disc, mesh, u, b0, TvbOptions{}, PhysicsParams{});
      DGField h = depth_field(u, b0);
      const DGField h0 = h;
      pp_limit(disc, h);
      double worst = 0.0;
      for (int k = 0; k < mesh.num_elements(); ++k) {
        for (int c = 0; c <= dim; ++c) worst = std::max(worst, std::abs(u(k, c, 0) - before(k, c, 0)));
        worst = std::max(worst, std::abs(h(k, 0, 0) - h0(k, 0, 0)));
      }
      t.report(label, worst <= 1e-14, "max average change " + sci(worst));
    } catch (const std::exception& e) {
      t.report(label, false, e.what());
    }
  }

  out << (t.failed == 0 ? "all checks passed" : std::to_string(t.failed) + " check(s) failed") << '\n';
  return t.failed;
}

}  // namespace qlmm
