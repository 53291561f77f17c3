#include <cmath>
#include <set>

#include "qlmm/error.hpp"
#include "test_util.hpp"

using namespace qlmm;

namespace {

const BoundarySpec kTrans{BoundaryKind::Transmissive, BoundaryKind::Transmissive};
const BoundarySpec kPeriodic{BoundaryKind::Periodic, BoundaryKind::Periodic};

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("uniform 1D mesh has equal segments") {
  const auto m = build_uniform_mesh_1d(0.0, 1.0, 4, BoundaryKind::Transmissive);
  CHECK(m.num_elements() == 4);
  for (int k = 0; k < 4; ++k) CHECK(m.signed_measure(k) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("four-triangle pattern element counts and areas") {
  CHECK(build_uniform_mesh_2d({{0, 0}, {1, 1}}, 10, 10, kTrans).num_elements() == 400);
  const auto m = build_uniform_mesh_2d({{0, 0}, {1, 1}}, 1, 1, kTrans);
  REQUIRE(m.num_elements() == 4);
  for (int k = 0; k < 4; ++k) CHECK(m.signed_measure(k) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("non-positive resolution is a config error") {
  CHECK(kind_of([] { build_uniform_mesh_1d(0, 1, 0, BoundaryKind::Periodic); }) == ErrorKind::InvalidConfig);
  CHECK(kind_of([] { build_uniform_mesh_2d({{0, 0}, {1, 1}}, 0, 3, kTrans); }) == ErrorKind::InvalidConfig);
  CHECK(kind_of([] { build_uniform_mesh_2d({{0, 0}, {1, 1}}, 3, -1, kTrans); }) == ErrorKind::InvalidConfig);
}

TEST_CASE("clockwise element is rejected as singular") {
  CHECK(kind_of([] {
          make_mesh(2, {{0, 0}, {1, 1}}, kTrans, {{0, 0}, {1, 0}, {0, 1}, {1, 1}}, {{{0, 2, 1}}, {{1, 2, 3}}});
        }) == ErrorKind::MeshSingular);
}

TEST_CASE("mesh at time interpolates linearly and is exact at the endpoints") {
  const auto m0 = build_uniform_mesh_1d(0.0, 1.0, 2, BoundaryKind::Transmissive);
  std::vector<Vec2> x1{{0.0, 0.0}, {0.7, 0.0}, {1.0, 0.0}};
  const auto m1 = m0.with_vertices(x1);
  std::vector<Vec2> v{{0, 0}, {0.2 / 0.3, 0}, {0, 0}};
  const MeshMotion mot{m0, m1, v, 2.0, 0.3};
  CHECK(mot.at(2.0).vertex(1).x == 0.5);
  CHECK(mot.at(2.3).vertex(1).x == 0.7);
  CHECK(mot.at(2.15).vertex(1).x == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(kind_of([&] { mot.at(2.31); }) == ErrorKind::OutOfRange);
  CHECK(kind_of([&] { mot.at(1.99); }) == ErrorKind::OutOfRange);

  // x^n = 0, x^{n+1} = 1 at the midpoint
  const auto seg = make_mesh(1, {{-1, 0}, {2, 0}}, kTrans, {{-1, 0}, {0, 0}, {2, 0}}, {{{0, 1, -1}}, {{1, 2, -1}}});
  const MeshMotion mv = MeshMotion::from_velocity(seg, {{0, 0}, {1, 0}, {0, 0}}, 0.0, 1.0);
  CHECK(mv.at(0.5).vertex(1).x == doctest::Approx(0.5).epsilon(1e-15));

  const MeshMotion still = MeshMotion::fixed(m0, 0.0, 1.0);
  for (double t : {0.0, 0.3, 1.0}) CHECK(still.at(t).vertex(1).x == 0.5);
}

TEST_CASE("mesh velocity is the hat-function interpolant") {
  const auto m = build_uniform_mesh_1d(0.0, 1.0, 1, BoundaryKind::Transmissive);
  const std::vector<Vec2> v{{0, 0}, {1, 0}};
  CHECK(mesh_velocity(m, v, 0, {0.25, 0}).x == doctest::Approx(0.25));
  CHECK(velocity_divergence(m, v, 0) == doctest::Approx(1.0));
  CHECK(mesh_velocity(m, {}, 0, {0.5, 0}).x == 0.0);
  CHECK(velocity_divergence(m, {}, 0) == 0.0);

  test::Rng g(7);
  const auto m2 = test::jittered_2d({{0, 0}, {1, 1}}, 3, 3, kTrans, 0.2, g);
  const std::vector<Vec2> tr(m2.num_vertices(), Vec2{1, 2});
  for (int k = 0; k < m2.num_elements(); ++k) {
    const Vec2 x = mesh_velocity(m2, tr, k, {0.3, 0.2});
    CHECK(x.x == doctest::Approx(1.0));
    CHECK(x.y == doctest::Approx(2.0));
    CHECK(std::abs(velocity_divergence(m2, tr, k)) < 1e-12);
  }
  // vertex reproduction
  const auto rv = test::interior_velocity(m2, 1.0, g);
  const auto refs = Discretization::reference_vertices();
  for (int k = 0; k < m2.num_elements(); ++k)
    for (int i = 0; i < 3; ++i) {
      const Vec2 x = mesh_velocity(m2, rv, k, refs[i]);
      const Vec2 e = rv[m2.topology().elements[k][i]];
      CHECK(x.x == doctest::Approx(e.x).epsilon(1e-14));
      CHECK(x.y == doctest::Approx(e.y).epsilon(1e-14));
    }
}

TEST_CASE("element geometry of simple elements") {
  const auto tri = make_mesh(2, {{0, 0}, {1, 1}}, kTrans, {{0, 0}, {1, 0}, {0, 1}, {1, 1}}, {{{0, 1, 2}}, {{1, 3, 2}}});
  const ElementGeometry g = tri.geometry(0);
  CHECK(g.measure == doctest::Approx(0.5));
  // face 0 is opposite vertex 0: the hypotenuse
  CHECK(g.normals[0].x == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(g.normals[0].y == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(g.face_lengths[0] == doctest::Approx(std::sqrt(2.0)));
  for (int f = 0; f < 3; ++f) CHECK(norm(g.normals[f]) == doctest::Approx(1.0));

  const auto seg = make_mesh(1, {{2, 0}, {2.5, 0}}, kTrans, {{2, 0}, {2.5, 0}}, {{{0, 1, -1}}});
  const ElementGeometry s = seg.geometry(0);
  CHECK(s.measure == doctest::Approx(0.5));
  CHECK(s.min_height == doctest::Approx(0.5));
  CHECK(s.normals[0].x == -1.0);
  CHECK(s.normals[1].x == 1.0);

  const double side = 0.8;
  const double ht = side * std::sqrt(3.0) / 2;
  const auto em = tri.with_vertices({{0, 0}, {side, 0}, {side / 2, ht}, {1.5 * side, ht}}).geometry(0);
  CHECK(em.min_height == doctest::Approx(side * std::sqrt(3.0) / 2).epsilon(1e-14));
}

TEST_CASE("outward normals point away from the barycenter") {
  test::Rng g(3);
  const auto m = test::jittered_2d({{0, 0}, {2, 1}}, 4, 3, kTrans, 0.25, g);
  for (int k = 0; k < m.num_elements(); ++k) {
    const ElementGeometry geo = m.geometry(k);
    const auto v = m.element_vertices(k);
    for (int f = 0; f < 3; ++f) {
      const Vec2 mid = 0.5 * (v[(f + 1) % 3] + v[(f + 2) % 3]);
      CHECK(dot(geo.normals[f], mid - geo.barycenter) > 0.0);
    }
  }
}

TEST_CASE("vertex patches") {
  const auto m1 = build_uniform_mesh_1d(0, 1, 4, BoundaryKind::Transmissive);
  CHECK(m1.patch(0).size() == 1);
  CHECK(m1.patch(2).size() == 2);
  CHECK(m1.patch(4).size() == 1);

  const int nx = 3, ny = 2;
  const auto m2 = build_uniform_mesh_2d({{0, 0}, {1, 1}}, nx, ny, kTrans);
  const int centers = (nx + 1) * (ny + 1);
  for (int c = centers; c < m2.num_vertices(); ++c) CHECK(m2.patch(c).size() == 4);

  // every (element, vertex) incidence appears exactly once, with the right local index
  const auto& t = m2.topology();
  std::set<std::pair<int, int>> seen;
  for (int v = 0; v < m2.num_vertices(); ++v)
    for (int i = t.patch_offsets[v]; i < t.patch_offsets[v + 1]; ++i) {
      CHECK(t.elements[t.patch_elements[i]][t.patch_local[i]] == v);
      CHECK(seen.insert({t.patch_elements[i], t.patch_local[i]}).second);
    }
  CHECK(seen.size() == static_cast<size_t>(3 * m2.num_elements()));
}

TEST_CASE("face adjacency") {
  const auto m = build_uniform_mesh_2d({{0, 0}, {1, 1}}, 3, 3, kTrans);
  int boundary = 0;
  for (const Face& f : m.topology().faces) {
    if (!f.has_neighbor()) ++boundary;
    else CHECK(f.elem[0] != f.elem[1]);
  }
  CHECK(boundary == 4 * 3);
  const auto p = build_uniform_mesh_2d({{0, 0}, {1, 1}}, 3, 3, kPeriodic);
  for (const Face& f : p.topology().faces) CHECK(f.has_neighbor());
}

TEST_CASE("corner flags") {
  const auto m = build_uniform_mesh_2d({{0, 0}, {1, 1}}, 2, 2, kTrans);
  int corners = 0;
  for (auto fl : m.topology().vertex_flags)
    if ((fl & (kOnXLo | kOnXHi)) && (fl & (kOnYLo | kOnYHi))) ++corners;
  CHECK(corners == 4);
}

TEST_CASE("property: total measure equals the domain measure") {
  test::Rng g(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int nx = 1 + static_cast<int>(g() % 6), ny = 1 + static_cast<int>(g() % 6);
    const Box box{{-1, 0}, {2, 1.5}};
    const auto m = test::jittered_2d(box, nx, ny, trial % 2 ? kPeriodic : kTrans, 0.3, g);
    CHECK(std::abs(m.total_measure() - 4.5) / 4.5 < 1e-12);
    const auto m1 = test::jittered_1d(-1, 2, 2 + trial, BoundaryKind::Transmissive, 0.4, g);
    CHECK(std::abs(m1.total_measure() - 3.0) / 3.0 < 1e-12);
  }
}

TEST_CASE("property: path minimum bounds the sampled areas") {
  test::Rng g(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m0 = test::jittered_2d({{0, 0}, {1, 1}}, 3, 3, kTrans, 0.2, g);
    const auto vel = test::interior_velocity(m0, 0.15, g);
    const MeshMotion mot = MeshMotion::from_velocity(m0, vel, 0.0, 1.0);
    for (int k = 0; k < m0.num_elements(); ++k) {
      const double lo = min_measure_along_path(mot.start, mot.end, k);
      for (int s = 0; s <= 20; ++s) CHECK(mot.at(s / 20.0).signed_measure(k) >= lo - 1e-15);
    }
  }
}

TEST_CASE("affine map round trip") {
  test::Rng g(9);
  const auto m = test::jittered_2d({{0, 0}, {1, 1}}, 2, 2, kTrans, 0.3, g);
  for (int k = 0; k < m.num_elements(); ++k) {
    const AffineMap map = m.affine_map(k);
    CHECK(map.det == doctest::Approx(2.0 * m.signed_measure(k)));
    const Vec2 r{test::uniform(g, 0, 0.5), test::uniform(g, 0, 0.5)};
    const Vec2 back = map.to_reference(map.to_physical(r));
    CHECK(back.x == doctest::Approx(r.x).epsilon(1e-12));
    CHECK(back.y == doctest::Approx(r.y).epsilon(1e-12));
  }
}

TEST_CASE("point location") {
  test::Rng g(13);
  const auto m = test::jittered_2d({{0, 0}, {1, 1}}, 4, 4, kTrans, 0.25, g);
  for (int i = 0; i < 200; ++i) {
    const Vec2 x{test::uniform(g, 0, 1), test::uniform(g, 0, 1)};
    Vec2 r;
    const int k = locate_point(m, x, &r, static_cast<int>(g() % m.num_elements()));
    REQUIRE(k >= 0);
    const Vec2 y = m.affine_map(k).to_physical(r);
    CHECK(y.x == doctest::Approx(x.x).epsilon(1e-12));
    CHECK(y.y == doctest::Approx(x.y).epsilon(1e-12));
  }
  Vec2 r;
  CHECK(locate_point(m, {1.5, 0.5}, &r) == -1);
}
