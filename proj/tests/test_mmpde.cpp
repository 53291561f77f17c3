#include <cmath>

#include "qlmm/error.hpp"
#include "qlmm/mmpde.hpp"
#include "test_util.hpp"

using namespace qlmm;

namespace {

const BoundarySpec kTrans{BoundaryKind::Transmissive, BoundaryKind::Transmissive};
const BoundarySpec kPeriodicX{BoundaryKind::Periodic, BoundaryKind::Reflective};

std::vector<Mat2> random_metric(int ne, int dim, test::Rng& g) {
  std::vector<Mat2> m(ne);
  for (auto& a : m) {
    if (dim == 1) {
      a = Mat2::Identity();
      a(0, 0) = test::uniform(g, 0.5, 4.0);
    } else {
      const double o = test::uniform(g, -0.5, 0.5);
      a << test::uniform(g, 0.8, 3.0), o, o, test::uniform(g, 0.8, 3.0);
    }
  }
  return m;
}

std::vector<Vec2> coords(const SimplicialMesh& m) { return {m.vertices().begin(), m.vertices().end()}; }

MetricField identity_field(const SimplicialMesh& m) {
  return {std::vector<Mat2>(m.num_elements(), Mat2::Identity()), std::vector<Mat2>(m.num_vertices(), Mat2::Identity())};
}

}  // namespace

TEST_CASE("mesh energy for scaled computational meshes") {
  // xi = s x with M = I gives J = s I, so G = 2/3 d^{3d/4} s^{3d/2}
  for (int dim : {1, 2}) {
    const auto m = dim == 1 ? build_uniform_mesh_1d(0, 2, 5, BoundaryKind::Transmissive)
                            : build_uniform_mesh_2d({{0, 0}, {2, 1}}, 3, 2, kTrans);
    const std::vector<Mat2> id(m.num_elements(), Mat2::Identity());
    for (double s : {1.0, 0.5, 3.0}) {
      auto xi = coords(m);
      for (auto& x : xi) x = s * x;
      const double d = dim;
      const double expected = 2.0 / 3.0 * std::pow(d, 0.75 * d) * std::pow(s, 1.5 * d) * m.total_measure();
      CHECK(mesh_energy(m, xi, id) == doctest::Approx(expected).epsilon(1e-13));
    }
  }
}

TEST_CASE("mesh energy matches a direct 1D sum") {
  test::Rng g(2);
  const auto m = test::jittered_1d(0, 1, 9, BoundaryKind::Transmissive, 0.3, g);
  const auto xi = coords(test::jittered_1d(0, 1, 9, BoundaryKind::Transmissive, 0.3, g));
  const auto metric = random_metric(m.num_elements(), 1, g);
  double e = 0.0;
  for (int k = 0; k < m.num_elements(); ++k) {
    const auto& el = m.topology().elements[k];
    const double dx = m.vertex(el[1]).x - m.vertex(el[0]).x;
    const double j = (xi[el[1]].x - xi[el[0]].x) / dx;
    const double mk = metric[k](0, 0);
    e += dx * (std::sqrt(mk) * std::pow(j * j / mk, 0.75) + std::pow(mk, -0.25) * std::pow(j, 1.5)) / 3.0;
  }
  CHECK(e > 0.0);
  CHECK(mesh_energy(m, xi, metric) == doctest::Approx(e).epsilon(1e-13));
}

TEST_CASE("energy gradient matches finite differences") {
  test::Rng g(4);
  for (int t = 0; t < 6; ++t) {
    const int dim = 1 + t % 2;
    const auto m = dim == 1 ? test::jittered_1d(0, 1, 12, BoundaryKind::Transmissive, 0.3, g)
                            : test::jittered_2d({{0, 0}, {1, 1}}, 2, 2, kTrans, 0.2, g);
    REQUIRE(m.num_elements() <= 20);
    auto xi = coords(dim == 1 ? test::jittered_1d(0, 1, 12, BoundaryKind::Transmissive, 0.2, g)
                              : test::jittered_2d({{0, 0}, {1, 1}}, 2, 2, kTrans, 0.15, g));
    const auto metric = random_metric(m.num_elements(), dim, g);
    const auto grad = energy_gradient(m, xi, metric);
    const double h = 1e-6;
    double scale = 0.0;
    for (const auto& v : grad) scale = std::max(scale, norm(v));
    for (int i = 0; i < m.num_vertices(); ++i)
      for (int c = 0; c < dim; ++c) {
        auto xp = xi, xm = xi;
        (c == 0 ? xp[i].x : xp[i].y) += h;
        (c == 0 ? xm[i].x : xm[i].y) -= h;
        const double fd = (mesh_energy(m, xp, metric) - mesh_energy(m, xm, metric)) / (2 * h);
        const double an = c == 0 ? grad[i].x : grad[i].y;
        CHECK(std::abs(fd - an) <= 1e-5 * scale);
      }
  }
}

TEST_CASE("nodal velocities") {
  const auto m = build_uniform_mesh_2d({{0, 0}, {1, 1}}, 4, 4, kTrans);
  const double tau = default_tau(m);
  CHECK(tau == doctest::Approx(0.1 / std::sqrt(64.0)));
  for (const auto& v : nodal_mesh_velocities(m, coords(m), identity_field(m), tau)) CHECK(norm(v) < 1e-11);

  test::Rng g(6);
  const auto metric = random_metric(m.num_elements(), 2, g);
  const MetricField mf = smooth_metric(m, metric, 0);
  const auto xi = coords(m);
  const auto vel = nodal_mesh_velocities(m, xi, mf, tau);
  const auto& topo = m.topology();
  for (int v = 0; v < m.num_vertices(); ++v) {
    const auto f = topo.vertex_flags[v];
    if ((f & (kOnXLo | kOnXHi)) && (f & (kOnYLo | kOnYHi))) CHECK(norm(vel[v]) == 0.0);
    if (f & (kOnXLo | kOnXHi)) CHECK(vel[v].x == 0.0);
    if (f & (kOnYLo | kOnYHi)) CHECK(vel[v].y == 0.0);
  }
  // one small Euler substep lowers the energy
  const double e0 = mesh_energy(m, xi, mf.element);
  double vmax = 0.0;
  for (const auto& v : vel) vmax = std::max(vmax, norm(v));
  REQUIRE(vmax > 0.0);
  auto x1 = xi;
  for (size_t i = 0; i < x1.size(); ++i) x1[i] += (1e-3 / vmax) * vel[i];
  CHECK(mesh_energy(m, x1, mf.element) < e0);
}

TEST_CASE("periodic partners move together") {
  const auto m = build_uniform_mesh_2d({{0, 0}, {1, 1}}, 4, 4, kPeriodicX);
  test::Rng g(8);
  const MetricField mf = smooth_metric(m, random_metric(m.num_elements(), 2, g), 1);
  const auto vel = nodal_mesh_velocities(m, coords(m), mf, default_tau(m));
  const auto& topo = m.topology();
  for (int v = 0; v < m.num_vertices(); ++v)
    if (topo.periodic_partner_x[v] >= 0) CHECK(vel[v].y == vel[topo.periodic_partner_x[v]].y);
}

TEST_CASE("mesh movement") {
  for (int dim : {1, 2}) {
    const auto m = dim == 1 ? build_uniform_mesh_1d(0, 1, 20, BoundaryKind::Transmissive)
                            : build_uniform_mesh_2d({{0, 0}, {2, 1}}, 6, 3, kTrans);
    const auto xi = coords(m);
    const MoveResult id = move_mesh(m, identity_field(m), xi, 0.01);
    CHECK(id.diag.max_displacement < 1e-6 * 2.0);

    test::Rng g(10);
    const MetricField mf = smooth_metric(m, random_metric(m.num_elements(), dim, g), 2);
    const MoveResult r = move_mesh(m, mf, xi, 0.01);
    CHECK(r.diag.moved);
    CHECK(r.diag.energy_end <= r.diag.energy_start);
    CHECK(r.diag.min_area > 0.0);
    const auto& topo = m.topology();
    for (int v = 0; v < m.num_vertices(); ++v) {
      const auto f = topo.vertex_flags[v];
      const Vec2 a = m.vertex(v), b = r.mesh.vertex(v);
      if (f & (kOnXLo | kOnXHi)) CHECK(b.x == a.x);
      if (f & (kOnYLo | kOnYHi)) CHECK(b.y == a.y);
      if (dim == 1) CHECK(b.y == 0.0);
    }
    for (int k = 0; k < m.num_elements(); ++k) CHECK(r.mesh.signed_measure(k) > 0.0);
    CHECK(r.mesh.total_measure() == doctest::Approx(m.total_measure()).epsilon(1e-13));
  }
}

TEST_CASE("mover input errors") {
  const auto m = build_uniform_mesh_1d(0, 1, 4, BoundaryKind::Transmissive);
  CHECK_THROWS_AS(nodal_mesh_velocities(m, coords(m), identity_field(m), 0.0), Error);
  CHECK_THROWS_AS(move_mesh(m, identity_field(m), std::vector<Vec2>(3), 0.1), Error);
  auto xi = coords(m);
  std::swap(xi[1], xi[2]);
  try {
    mesh_energy(m, xi, std::vector<Mat2>(4, Mat2::Identity()));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MeshSingular);
  }
}
