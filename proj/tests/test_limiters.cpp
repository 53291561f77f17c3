#include <cmath>

#include "qlmm/cases.hpp"
#include "qlmm/error.hpp"
#include "qlmm/limiters.hpp"
#include "test_util.hpp"

using namespace qlmm;

namespace {

const BoundarySpec kPeriodic{BoundaryKind::Periodic, BoundaryKind::Periodic};
const PhysicsParams kP{};

DGField random_field(const Discretization& disc, int ne, int nc, test::Rng& g, double avg_lo, double avg_hi,
                     double amp) {
  DGField f(ne, nc, disc.nb);
  for (int k = 0; k < ne; ++k)
    for (int c = 0; c < nc; ++c) {
      f(k, c, 0) = test::uniform(g, avg_lo, avg_hi) / disc.phi0;
      for (int j = 1; j < disc.nb; ++j) f(k, c, j) = amp * test::uniform(g, -1, 1);
    }
  return f;
}

}  // namespace

TEST_CASE("minmod") {
  CHECK(minmod(1, 2, 3) == 1);
  CHECK(minmod(-1, -2, -0.5) == -0.5);
  CHECK(minmod(1, -2, 3) == 0);
  CHECK(minmod(0, 1, 1) == 0);
  CHECK(modified_minmod(0.5, -1, 1, 0.5) == 0.5);
  CHECK(modified_minmod(0.6, 0.1, 1, 0.5) == 0.1);
}

TEST_CASE("1D TVB limits a steep slope to the neighbor jump") {
  const Discretization disc(1, 1);
  const auto m = build_uniform_mesh_1d(0, 3, 3, BoundaryKind::Periodic);
  DGField u(3, 2, 2), b(3, 1, 2);
  u(0, 0, 0) = 1.0;
  u(1, 0, 0) = 2.0;
  u(2, 0, 0) = 3.0;
  u(1, 0, 1) = 10.0 / std::sqrt(3.0);
  for (int k = 0; k < 3; ++k) u(k, 1, 0) = 0.5;
  TvbOptions opt;
  opt.characteristic = false;
  DGField v = u;
  const int n = tvb_limit(disc, m, v, b, opt, kP);
  CHECK(n >= 1);
  CHECK(v(1, 0, 1) == doctest::Approx(1.0 / std::sqrt(3.0)));
  for (int k = 0; k < 3; ++k) {
    CHECK(v(k, 0, 0) == u(k, 0, 0));
    CHECK(v(k, 1, 0) == u(k, 1, 0));
  }
  // a large TVB constant keeps the slope
  opt.m_tvb = 1e3;
  DGField w = u;
  tvb_limit(disc, m, w, b, opt, kP);
  CHECK(w(1, 0, 1) == u(1, 0, 1));
}

TEST_CASE("TVB leaves smooth fields alone for large M and keeps averages") {
  test::Rng g(3);
  for (int dim : {1, 2})
    for (int k : {1, 2}) {
      const Discretization disc(dim, k);
      const auto m = dim == 1 ? test::jittered_1d(0, 1, 16, BoundaryKind::Periodic, 0.2, g)
                              : test::jittered_2d({{0, 0}, {1, 1}}, 4, 4, kPeriodic, 0.2, g);
      const DGField s = l2_project(disc, m, [](const Vec2& x) {
        return std::array<double, 3>{2.0 + 0.1 * std::sin(2 * M_PI * x.x), 0.1 * std::cos(2 * M_PI * x.y), 0.05};
      }, dim + 1);
      const DGField b(m.num_elements(), 1, disc.nb);
      DGField v = s;
      TvbOptions big;
      big.m_tvb = 1e4;
      CHECK(tvb_limit(disc, m, v, b, big, kP) == 0);
      CHECK(test::max_abs_diff(v, s) == 0.0);

      for (int rep = 0; rep < 5; ++rep) {
        const DGField r = random_field(disc, m.num_elements(), dim + 1, g, 1.0, 3.0, 0.5);
        DGField l = r;
        TvbOptions opt;
        opt.characteristic = rep % 2 == 0;
        tvb_limit(disc, m, l, b, opt, kP);
        for (int e = 0; e < m.num_elements(); ++e)
          for (int c = 0; c <= dim; ++c) CHECK(l(e, c, 0) == r(e, c, 0));
      }
    }
}

TEST_CASE("TVB keeps the lake at rest") {
  for (const char* name : {"lake-at-rest-1d-discontinuous", "lake-at-rest-2d"}) {
    const CaseSpec cs = make_case(name);
    const Discretization disc(cs.dim, 2);
    const auto m = cs.build_mesh(30, 6, 6);
    const DGField u = l2_project(disc, m, cs.initial, cs.dim + 1);
    const DGField b = l2_project(disc, m, [&](const Vec2& x) { return std::array<double, 3>{cs.bottom(x), 0, 0}; }, 1);
    DGField v = u;
    tvb_limit(disc, m, v, b, TvbOptions{}, kP);
    CHECK(test::max_abs_diff(u, v) <= 1e-13);
  }
}

TEST_CASE("positivity limiter") {
  const Discretization disc(1, 1);
  DGField h(1, 1, 2);
  h(0, 0, 0) = 0.5;
  h(0, 0, 1) = 0.6 / std::sqrt(3.0);
  DGField l = h;
  CHECK(pp_limit(disc, l) == 1);
  CHECK(l(0, 0, 1) == doctest::Approx(5.0 / 6.0 * 0.6 / std::sqrt(3.0)));
  CHECK(l(0, 0, 0) == 0.5);
  CHECK(min_checkpoint_value(disc, l) == doctest::Approx(0.0).scale(1.0));

  DGField z(1, 1, 2);
  z(0, 0, 1) = 0.2;
  CHECK(pp_limit(disc, z) == 1);
  CHECK(z(0, 0, 1) == 0.0);

  DGField neg(2, 1, 2);
  neg(1, 0, 0) = -1e-6;
  try {
    pp_limit(disc, neg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PositivityViolation);
  }
}

TEST_CASE("positivity limiter properties") {
  test::Rng g(5);
  for (int dim : {1, 2})
    for (int k : {1, 2}) {
      const Discretization disc(dim, k);
      for (int rep = 0; rep < 20; ++rep) {
        const DGField h = random_field(disc, 30, 1, g, 0.0, 1.0, 0.8);
        DGField l = h;
        pp_limit(disc, l);
        CHECK(min_checkpoint_value(disc, l) >= -1e-14);
        for (int e = 0; e < 30; ++e) {
          CHECK(l(e, 0, 0) == h(e, 0, 0));
          // deviations only shrink, by a common factor
          const double t = h(e, 0, 1) != 0.0 ? l(e, 0, 1) / h(e, 0, 1) : 1.0;
          CHECK(t >= -1e-15);
          CHECK(t <= 1.0 + 1e-15);
          for (int j = 1; j < disc.nb; ++j) CHECK(l(e, 0, j) == doctest::Approx(t * h(e, 0, j)).scale(1e-14));
        }

        DGField b = random_field(disc, 30, 1, g, -1.0, 0.0, 0.3);
        const DGField b0 = b;
        bottom_correct(b, h, l);
        for (size_t i = 0; i < b.data().size(); ++i)
          CHECK(l.data()[i] + b.data()[i] == doctest::Approx(h.data()[i] + b0.data()[i]).epsilon(1e-14));
        for (int e = 0; e < 30; ++e) CHECK(b(e, 0, 0) == b0(e, 0, 0));
      }
    }
}

TEST_CASE("dry lake at rest survives stage post-processing") {
  for (const char* name : {"lake-at-rest-1d-dry", "lake-at-rest-2d-dry"}) {
    const CaseSpec cs = make_case(name);
    const Discretization disc(cs.dim, 2);
    const auto m = cs.build_mesh(40, 8, 8);
    SolverConfig cfg;
    cfg.tvb.m_tvb = cs.m_tvb;
    const Solver solver(disc, cfg, cs.bottom, {});
    SolverState s = solver.initialize(m, cs.initial);
    CHECK(min_checkpoint_value(disc, depth_field(s.u, s.b)) >= -1e-14);
    DGField u = s.u, b = s.b;
    StepDiagnostics d;
    d.min_stage_check_h = INFINITY;
    solver.postprocess_stage(m, u, b, d);
    CHECK(test::max_abs_diff(u, s.u) <= 1e-13);
    CHECK(d.min_stage_check_h >= -1e-14);
  }
}
