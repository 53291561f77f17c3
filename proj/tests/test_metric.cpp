#include <cmath>

#include "qlmm/cases.hpp"
#include "qlmm/error.hpp"
#include "qlmm/metric.hpp"
#include "test_util.hpp"

using namespace qlmm;

namespace {

const BoundarySpec kTrans{BoundaryKind::Transmissive, BoundaryKind::Transmissive};

std::vector<double> sample(const SimplicialMesh& m, const std::function<double(const Vec2&)>& f) {
  std::vector<double> q(m.num_vertices());
  for (int i = 0; i < m.num_vertices(); ++i) q[i] = f(m.vertex(i));
  return q;
}

bool is_psd(const Mat2& a, double tol) {
  Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (a + a.transpose()));
  return es.eigenvalues().minCoeff() >= -tol;
}

}  // namespace

TEST_CASE("Hessian recovery is exact for quadratics") {
  test::Rng g(1);
  const auto m = test::jittered_2d({{0, 0}, {1, 1}}, 5, 5, kTrans, 0.2, g);
  const auto h = recover_vertex_hessians(m, sample(m, [](const Vec2& x) { return x.x * x.x + x.y * x.y; }));
  for (const auto& a : h) CHECK((a - 2.0 * Mat2::Identity()).cwiseAbs().maxCoeff() < 1e-9);
  const auto mixed = recover_hessian(m, sample(m, [](const Vec2& x) { return 3.0 * x.x * x.y - x.y * x.y; }));
  for (const auto& a : mixed) {
    CHECK(a(0, 1) == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(a(1, 1) == doctest::Approx(-2.0).epsilon(1e-9));
  }
  const auto lin = recover_hessian(m, sample(m, [](const Vec2& x) { return 1.0 + 2.0 * x.x - x.y; }));
  for (const auto& a : lin) CHECK(a.cwiseAbs().maxCoeff() < 1e-9);

  const auto m1 = test::jittered_1d(0, 2, 20, BoundaryKind::Transmissive, 0.2, g);
  const auto h1 = recover_vertex_hessians(m1, sample(m1, [](const Vec2& x) { return 1.5 * x.x * x.x; }));
  for (const auto& a : h1) CHECK(a(0, 0) == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("Hessian recovery of a cubic is consistent") {
  for (int n : {10, 20}) {
    const auto m = build_uniform_mesh_2d({{0, 0}, {1, 1}}, n, n, kTrans);
    const auto h = recover_vertex_hessians(m, sample(m, [](const Vec2& x) { return x.x * x.x * x.x; }));
    double err = 0.0;
    for (int i = 0; i < m.num_vertices(); ++i) {
      const Vec2 x = m.vertex(i);
      if (x.x < 0.2 || x.x > 0.8 || x.y < 0.2 || x.y > 0.8) continue;
      err = std::max(err, std::abs(h[i](0, 0) - 6.0 * x.x) + std::abs(h[i](0, 1)) + std::abs(h[i](1, 1)));
    }
    CHECK(err < 6.0 / n);
  }
}

TEST_CASE("regularization parameter for a uniform Hessian") {
  for (double c : {0.5, 3.0, 40.0}) {
    const auto m2 = build_uniform_mesh_2d({{0, 0}, {2, 1}}, 3, 2, kTrans);
    const std::vector<Mat2> h2(m2.num_elements(), c * Mat2::Identity());
    CHECK(metric_alpha(m2, h2) == doctest::Approx((std::pow(2.0, 1.5) - 1.0) * c).epsilon(1e-10));

    const auto m1 = build_uniform_mesh_1d(0, 1, 7, BoundaryKind::Transmissive);
    Mat2 a = Mat2::Zero();
    a(0, 0) = c;
    const std::vector<Mat2> h1(m1.num_elements(), a);
    CHECK(metric_alpha(m1, h1) == doctest::Approx((std::pow(2.0, 2.5) - 1.0) * c).epsilon(1e-10));
  }
}

TEST_CASE("metric from Hessians") {
  const auto m = build_uniform_mesh_2d({{0, 0}, {1, 1}}, 3, 3, kTrans);
  const auto id = metric_from_hessian(m, std::vector<Mat2>(m.num_elements(), Mat2::Zero()));
  for (const auto& a : id) CHECK(a.isIdentity());

  test::Rng g(3);
  std::vector<Mat2> h(m.num_elements());
  for (auto& a : h) {
    const double off = test::uniform(g, -5, 5);
    a << test::uniform(g, -5, 5), off, off, test::uniform(g, -5, 5);
  }
  for (const auto& a : metric_from_hessian(m, h)) {
    CHECK((a - a.transpose()).cwiseAbs().maxCoeff() < 1e-14);
    Eigen::SelfAdjointEigenSolver<Mat2> es(a);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
  h[2](0, 0) = NAN;
  try {
    metric_from_hessian(m, h);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AdaptationInput);
  }
}

TEST_CASE("metric intersection and cap") {
  CHECK(intersect_metrics(Mat2::Identity(), 0.1 * Mat2::Identity(), 2).isApprox(Mat2::Identity(), 1e-14));
  test::Rng g(7);
  for (int t = 0; t < 100; ++t) {
    Mat2 a, b;
    const double o1 = test::uniform(g, -1, 1), o2 = test::uniform(g, -1, 1);
    a << test::uniform(g, 1.1, 3), o1, o1, test::uniform(g, 1.1, 3);
    b << test::uniform(g, 1.1, 5), o2, o2, test::uniform(g, 1.1, 5);
    const Mat2 r = intersect_metrics(a, b, 2);
    const double s = r.norm();
    CHECK(is_psd(r - a, 1e-12 * s));
    CHECK(is_psd(r - b, 1e-12 * s));
    // in each common principal direction the result matches one of the inputs
    CHECK(std::abs((r - a).determinant() * (r - b).determinant()) <= 1e-10 * std::pow(s, 4));
  }
  const Mat2 c = cap_metric(Mat2::Identity(), 1000.0, 2);
  CHECK(c(0, 0) == doctest::Approx(1.0 / std::sqrt(1.000004)).epsilon(1e-15));
  CHECK(c(0, 0) == doctest::Approx(0.999998).epsilon(1e-6));
  for (double big : {1e3, 1e5, 1e9}) {
    Eigen::SelfAdjointEigenSolver<Mat2> es(cap_metric(big * Mat2::Identity() + Mat2::Ones(), 1000.0, 2));
    CHECK(es.eigenvalues().maxCoeff() <= 1000.0);
  }
}

TEST_CASE("adaptation metric is SPD and capped") {
  const PhysicsParams p;
  for (const char* name : {"dam-break-wavy-1d", "perturbation-2d"}) {
    const CaseSpec cs = make_case(name);
    const Discretization disc(cs.dim, 2);
    const auto m = cs.build_mesh(60, 12, 4);
    const DGField u = l2_project(disc, m, cs.initial, cs.dim + 1);
    const DGField b = l2_project(disc, m, [&](const Vec2& x) { return std::array<double, 3>{cs.bottom(x), 0, 0}; }, 1);
    const MetricField mf = build_adaptation_metric(disc, m, u, b, p);
    REQUIRE(static_cast<int>(mf.element.size()) == m.num_elements());
    REQUIRE(static_cast<int>(mf.vertex.size()) == m.num_vertices());
    for (const auto& a : mf.element) {
      if (cs.dim == 1) {
        CHECK(a(0, 0) > 0.0);
        CHECK(a(0, 0) <= 1000.0);
      } else {
        Eigen::SelfAdjointEigenSolver<Mat2> es(a);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
        CHECK(es.eigenvalues().maxCoeff() <= 1000.0);
      }
    }
  }
  // a flat state gives a uniform metric
  const CaseSpec lake = make_case("lake-at-rest-2d");
  const Discretization disc(2, 1);
  const auto m = build_uniform_mesh_2d(lake.domain, 4, 4, lake.bc);
  const DGField u = l2_project(disc, m, [](const Vec2&) { return std::array<double, 3>{1, 0, 0}; }, 3);
  const DGField b(m.num_elements(), 1, disc.nb);
  const MetricField mf = build_adaptation_metric(disc, m, u, b, p);
  for (const auto& a : mf.element) CHECK(a.isApprox(mf.element[0], 1e-14));
}

TEST_CASE("non-finite nodal values are rejected") {
  const auto m = build_uniform_mesh_2d({{0, 0}, {1, 1}}, 3, 3, kTrans);
  auto q = sample(m, [](const Vec2& x) { return x.x; });
  q[5] = INFINITY;
  try {
    recover_hessian(m, q);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AdaptationInput);
  }
}
