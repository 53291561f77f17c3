#include "qlmm/discretization.hpp"

#include "qlmm/error.hpp"

namespace qlmm {

std::array<Vec2, 3> Discretization::reference_vertices() {
  return {Vec2{0.0, 0.0}, Vec2{1.0, 0.0}, Vec2{0.0, 1.0}};
}

Vec2 Discretization::face_reference_point(int lf, bool reversed, double s) const {
  if (dim == 1) return {lf == 0 ? 0.0 : 1.0, 0.0};
  const auto r = reference_vertices();
  Vec2 a = r[(lf + 1) % 3], b = r[(lf + 2) % 3];
  if (reversed) std::swap(a, b);
  return a + s * (b - a);
}

std::vector<double> Discretization::phi_at(const Vec2& ref) const {
  std::vector<double> v(nb);
  basis.values(ref, v);
  return v;
}

Discretization::Discretization(int d, int k)
    : dim(d),
      degree(k),
      nb(0),
      ref_measure(d == 1 ? 1.0 : 0.5),
      phi0(0.0),
      basis(d, k) {
  if (k < 1 || k > 2) fail(ErrorKind::InvalidArgument, "degree must be 1 or 2");
  nb = basis.size();
  volume = dim == 1 ? gauss_legendre(k + 2) : triangle_rule(k + 2);
  verify_exactness(dim, volume);
  if (dim == 1) {
    face.points = {Vec2{0.0, 0.0}};
    face.weights = {1.0};
  } else {
    face = gauss_legendre(k + 2);
    verify_exactness(1, face);
  }

  auto append_phi = [&](std::vector<double>& table, const Vec2& p) {
    const auto v = phi_at(p);
    table.insert(table.end(), v.begin(), v.end());
  };

  for (const auto& p : volume.points) {
    append_phi(vol_phi, p);
    std::vector<Vec2> g(nb);
    basis.gradients(p, g);
    vol_dphi.insert(vol_dphi.end(), g.begin(), g.end());
  }
  phi0 = vol_phi[0];

  for (int lf = 0; lf < num_faces(); ++lf)
    for (int rev = 0; rev < 2; ++rev)
      for (const auto& q : face.points) {
        const Vec2 p = face_reference_point(lf, rev == 1, q.x);
        face_points[lf][rev].push_back(p);
        append_phi(face_phi[lf][rev], p);
      }

  // Positivity check points: Gauss-Lobatto in 1D; in 2D three families of
  // segments from each vertex to Gauss points on the opposite edge, sampled
  // at Gauss-Lobatto nodes. The face quadrature points are included.
  const QuadratureRule gl = gauss_lobatto(k + 2);
  if (dim == 1) {
    pp_points = gl.points;
  } else {
    const auto r = reference_vertices();
    for (int c = 0; c < 3; ++c) {
      const Vec2 a = r[(c + 1) % 3], b = r[(c + 2) % 3];
      for (const auto& t : face.points)
        for (const auto& s : gl.points) pp_points.push_back((1.0 - s.x) * r[c] + s.x * (a + t.x * (b - a)));
    }
  }
  for (const auto& p : pp_points) append_phi(pp_phi, p);

  if (dim == 1) {
    for (int s = 0; s <= 20; ++s) sample_points.push_back({s / 20.0, 0.0});
  } else {
    for (int j = 0; j <= 5; ++j)
      for (int i = 0; i + j <= 5; ++i) sample_points.push_back({i / 5.0, j / 5.0});
  }
  for (const auto& p : sample_points) append_phi(sample_phi, p);

  const auto rv = reference_vertices();
  for (int v = 0; v <= dim; ++v) vertex_phi[v] = phi_at(dim == 1 ? Vec2{double(v), 0.0} : rv[v]);
  for (int lf = 0; lf < num_faces(); ++lf) midpoint_phi[lf] = phi_at(face_reference_point(lf, false, 0.5));
}

}  // namespace qlmm
