#include <cmath>

#include "qlmm/cases.hpp"
#include "qlmm/convergence.hpp"
#include "qlmm/error.hpp"
#include "qlmm/time_integration.hpp"
#include "test_util.hpp"

using namespace qlmm;

namespace {

const BoundarySpec kPeriodic{BoundaryKind::Periodic, BoundaryKind::Periodic};

// Smooth velocity vanishing on the domain boundary, oscillating in time.
std::vector<Vec2> prescribed_velocity(const SimplicialMesh& m, double t, double amp) {
  const Box& d = m.topology().domain;
  std::vector<Vec2> v(m.num_vertices());
  for (int i = 0; i < m.num_vertices(); ++i) {
    const Vec2 x = m.vertex(i);
    const double sx = std::sin(M_PI * (x.x - d.lo.x) / (d.hi.x - d.lo.x));
    if (m.dim() == 1) {
      v[i] = {amp * std::cos(3 * t) * sx, 0.0};
    } else {
      const double sy = std::sin(M_PI * (x.y - d.lo.y) / (d.hi.y - d.lo.y));
      v[i] = {amp * std::cos(3 * t) * sx * sy, 0.5 * amp * std::sin(2 * t + 1) * sx * sy};
    }
  }
  return v;
}

struct PrescribedRun {
  SolverState s;
  double max_gcl = 0.0;
  double max_mass_drift = 0.0;
};

PrescribedRun run_prescribed(const Solver& solver, const SimplicialMesh& m0, const PointFunction& init, int steps,
                             double amp) {
  PrescribedRun r;
  r.s = solver.initialize(m0, init);
  const Discretization& disc = solver.discretization();
  const double mass0 = integral(disc, r.s.mesh, depth_field(r.s.u, r.s.b), 0);
  for (int n = 0; n < steps; ++n) {
    const auto vel = prescribed_velocity(r.s.mesh, r.s.t, amp);
    const double dt = 0.5 * fixed_mesh_dt(solver.op(), r.s.mesh, r.s.u, r.s.b, solver.config().cfl, 1.0);
    const StepDiagnostics d = solver.rk3_step(r.s, MeshMotion::from_velocity(r.s.mesh, vel, r.s.t, dt));
    r.max_gcl = std::max(r.max_gcl, d.gcl_error);
    r.max_mass_drift = std::max(r.max_mass_drift, std::abs(d.mass - mass0) / mass0);
  }
  return r;
}

}  // namespace

TEST_CASE("GCL area update") {
  const auto a = gcl_area_update(1.0, 0.1, {1.0, 1.0, 1.0});
  CHECK(a[0] == doctest::Approx(1.1).epsilon(1e-15));
  CHECK(a[1] == doctest::Approx(1.0525).epsilon(1e-15));
  CHECK(a[2] == doctest::Approx(1.1051666666666666).epsilon(1e-15));
  const auto z = gcl_area_update(0.3, 0.7, {0.0, 0.0, 0.0});
  CHECK(z[0] == 0.3);
  CHECK(z[1] == 0.3);
  CHECK(z[2] == 0.3);
}

TEST_CASE("GCL stage areas reproduce the vertex-defined areas") {
  // uniform stretching x -> x (1 + c t)
  const auto m = build_uniform_mesh_1d(0, 1, 8, BoundaryKind::Transmissive);
  std::vector<Vec2> vel(m.num_vertices());
  for (int i = 0; i < m.num_vertices(); ++i) vel[i] = {0.4 * m.vertex(i).x, 0.0};
  const auto motion = MeshMotion::from_velocity(m, vel, 0.0, 0.05);
  const auto a = gcl_stage_areas(motion);
  for (int k = 0; k < m.num_elements(); ++k)
    CHECK(a[k][2] == doctest::Approx(motion.end.signed_measure(k)).epsilon(1e-14));

  test::Rng g(3);
  for (int t = 0; t < 5; ++t) {
    const auto m2 = test::jittered_2d({{0, 0}, {1, 1}}, 5, 5, kPeriodic, 0.15, g);
    const auto v2 = test::interior_velocity(m2, 1.0, g);
    const auto mo = MeshMotion::from_velocity(m2, v2, 0.0, 0.01);
    const auto a2 = gcl_stage_areas(mo);
    for (int k = 0; k < m2.num_elements(); ++k)
      CHECK(std::abs(a2[k][2] - mo.end.signed_measure(k)) <= 1e-13 * mo.end.signed_measure(k));
  }
}

TEST_CASE("CFL time step") {
  const Discretization disc(1, 2);
  const auto m = build_uniform_mesh_1d(0, 1, 100, BoundaryKind::Periodic);
  CHECK(m.min_height() == doctest::Approx(0.01));
  const SpatialOperator op(disc, PhysicsParams{});
  const DGField u = l2_project(disc, m, [](const Vec2&) { return std::array<double, 3>{1.0, 0.0, 0.0}; }, 2);
  const DGField b(m.num_elements(), 1, disc.nb);
  CHECK(fixed_mesh_dt(op, m, u, b, 0.18, 1.0) == doctest::Approx(5.7465e-4).epsilon(1e-4));
  CHECK(fixed_mesh_dt(op, m, u, b, 0.18, 1.0) == doctest::Approx(0.18 * 0.01 / std::sqrt(9.812)));
  CHECK(fixed_mesh_dt(op, m, u, b, 0.18, 1e-6) == 1e-6);
  CHECK(moving_mesh_dt(op, MeshMotion::fixed(m, 0, 1e-3), u, b, 0.18, 1e-6) == 1e-6);
}

TEST_CASE("lake at rest under prescribed mesh motion") {
  for (const char* name : {"lake-at-rest-1d-discontinuous", "lake-at-rest-1d-dry", "lake-at-rest-2d"})
    for (int k : {1, 2}) {
      const CaseSpec cs = make_case(name);
      const Discretization disc(cs.dim, k);
      SolverConfig cfg;
      cfg.cfl = cs.cfl(k);
      cfg.tvb.m_tvb = cs.m_tvb;
      const Solver solver(disc, cfg, cs.bottom, {});
      const auto m0 = cs.build_mesh(30, 6, 6);
      const double len = cs.domain.hi.x - cs.domain.lo.x;
      const PrescribedRun r = run_prescribed(solver, m0, cs.initial, 20, 0.3 * len);
      double moved = 0.0;
      for (int i = 0; i < m0.num_vertices(); ++i) moved = std::max(moved, norm(r.s.mesh.vertex(i) - m0.vertex(i)));
      CHECK(moved > 1e-3 * len);
      const auto err = error_norms(disc, r.s.mesh, r.s.u, r.s.b, exact_evaluator(*cs.exact, cs.bottom),
                                   cs.dim == 1 ? std::vector<std::string>{"eta", "hu"}
                                               : std::vector<std::string>{"eta", "hu", "hv"});
      for (const auto& c : err.components) {
        INFO(name, " k=", k, " ", c.component);
        CHECK(c.l1 <= 1e-12);
        CHECK(c.linf <= 1e-12);
      }
      CHECK(r.max_gcl <= 1e-13);
    }
}

TEST_CASE("free stream and mass under prescribed motion") {
  const Discretization disc(2, 2);
  SolverConfig cfg;
  cfg.cfl = 0.18;
  const Solver solver(disc, cfg, [](const Vec2&) { return 0.0; }, {});
  const auto m0 = build_uniform_mesh_2d({{0, 0}, {1, 1}}, 5, 5, kPeriodic);
  const PrescribedRun r =
      run_prescribed(solver, m0, [](const Vec2&) { return std::array<double, 3>{1.5, 0.3, -0.2}; }, 15, 0.3);
  const auto err = error_norms(disc, r.s.mesh, r.s.u, r.s.b, [](const Vec2&) {
    return SolutionValues{1.5, 0.3, -0.2, 1.5};
  }, {"eta", "hu", "hv"});
  for (const auto& c : err.components) CHECK(c.linf <= 1e-12);

  const CaseSpec acc = make_case("accuracy-1d");
  const Discretization d1(1, 2);
  SolverConfig c1;
  c1.cfl = acc.cfl(2);
  c1.tvb.m_tvb = acc.m_tvb;
  const Solver s1(d1, c1, acc.bottom, {});
  const PrescribedRun r1 = run_prescribed(s1, acc.build_mesh(40, 0, 0), acc.initial, 30, 0.3);
  CHECK(r1.max_mass_drift <= 1e-13);
  CHECK(r1.max_gcl <= 1e-13);
}

TEST_CASE("fixed motion equals a zero-velocity motion") {
  const CaseSpec cs = make_case("accuracy-1d");
  const Discretization disc(1, 2);
  SolverConfig cfg;
  cfg.cfl = cs.cfl(2);
  cfg.tvb.m_tvb = cs.m_tvb;
  const Solver solver(disc, cfg, cs.bottom, {});
  const auto m = cs.build_mesh(50, 0, 0);
  SolverState a = solver.initialize(m, cs.initial);
  SolverState b = a;
  for (int n = 0; n < 5; ++n) {
    solver.rk3_step(a, MeshMotion::fixed(a.mesh, a.t, 1e-3));
    solver.rk3_step(b, MeshMotion::from_velocity(b.mesh, std::vector<Vec2>(m.num_vertices()), b.t, 1e-3));
  }
  CHECK(test::max_abs_diff(a.u, b.u) == 0.0);
  CHECK(a.t == b.t);
}

TEST_CASE("advancing to the current time takes no step") {
  RunSpec r;
  r.case_name = "accuracy-1d";
  r.degree = 2;
  r.n = 20;
  r.final_time = 0.0;
  const RunResult res = run_case(r);
  CHECK(res.summary.steps == 0);
  const Discretization& disc = *res.disc;
  const DGField u = l2_project(disc, res.state.mesh, res.spec.initial, 2);
  CHECK(test::max_abs_diff(res.state.u, u) == 0.0);
}

TEST_CASE("smooth lake at rest on a moving mesh") {
  RunSpec r;
  r.case_name = "lake-at-rest-1d-smooth";
  r.degree = 1;
  r.n = 25;
  r.mode = MeshMode::Moving;
  const RunResult res = run_case(r);
  CHECK(res.final_time == doctest::Approx(res.spec.final_time));
  CHECK(res.state.t == res.final_time);
  const auto err = error_norms(*res.disc, res.state.mesh, res.state.u, res.state.b,
                               exact_evaluator(*res.spec.exact, res.spec.bottom), {"eta", "hu"});
  CHECK(err.get("eta").l1 <= 1e-12);
  CHECK(err.get("hu").l1 <= 1e-12);
  CHECK(res.summary.max_gcl_error <= 1e-12);
}

TEST_CASE("step limit") {
  RunSpec r;
  r.case_name = "accuracy-1d";
  r.n = 20;
  r.max_steps = 3;
  try {
    run_case(r);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Nonconvergence);
  }
}
