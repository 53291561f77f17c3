#include "qlmm/dg_field.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "qlmm/error.hpp"

namespace qlmm {

DGField l2_project(const Discretization& disc, const SimplicialMesh& mesh, const PointFunction& f,
                   int nc) {
  if (mesh.dim() != disc.dim) fail(ErrorKind::InvalidArgument, "mesh and discretization dimensions differ");
  if (nc < 1 || nc > 3) fail(ErrorKind::InvalidArgument, "component count must be 1..3");
  DGField u(mesh.num_elements(), nc, disc.nb);
  const int nq = disc.volume.size();
  std::vector<std::array<double, 3>> val(nq);
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const AffineMap map = mesh.affine_map(k);
    for (int q = 0; q < nq; ++q) val[q] = f(map.to_physical(disc.volume.points[q]));
    // project the deviation from the first sample so constants come out exact
    const auto ref = val[0];
    for (int q = 0; q < nq; ++q) {
      const double w = disc.volume.weights[q];
      const double* phi = &disc.vol_phi[q * disc.nb];
      for (int c = 0; c < nc; ++c)
        for (int j = 0; j < disc.nb; ++j) u(k, c, j) += w * (val[q][c] - ref[c]) * phi[j];
    }
    for (int c = 0; c < nc; ++c) u(k, c, 0) += ref[c] * disc.ref_measure * disc.phi0;
  }
  return u;
}

std::array<double, 3> evaluate(const DGField& u, int k, const double* phi) {
  std::array<double, 3> out{0.0, 0.0, 0.0};
  const int nb = u.num_basis();
  const double* c = u.element(k);
  for (int comp = 0; comp < u.num_components(); ++comp) {
    double s = 0.0;
    for (int j = 0; j < nb; ++j) s += c[comp * nb + j] * phi[j];
    out[comp] = s;
  }
  return out;
}

double evaluate(const DGField& u, int k, int comp, const double* phi) {
  const int nb = u.num_basis();
  const double* c = u.element(k) + comp * nb;
  double s = 0.0;
  for (int j = 0; j < nb; ++j) s += c[j] * phi[j];
  return s;
}

std::array<double, 3> evaluate(const Discretization& disc, const DGField& u, int k, const Vec2& ref) {
  const auto phi = disc.phi_at(ref);
  return evaluate(u, k, phi.data());
}

double cell_average(const Discretization& disc, const DGField& u, int k, int c) {
  return u(k, c, 0) * disc.phi0;
}

double integral(const Discretization& disc, const SimplicialMesh& mesh, const DGField& u, int c) {
  double s = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) s += mesh.signed_measure(k) * cell_average(disc, u, k, c);
  return s;
}

void check_compatible(const DGField& u, const SimplicialMesh& mesh, const Discretization& disc) {
  if (u.num_elements() != mesh.num_elements() || u.num_basis() != disc.nb)
    fail(ErrorKind::InvalidArgument, "field does not match mesh or discretization");
}

namespace {

bool inside(const Vec2& r, int dim, double tol) {
  if (dim == 1) return r.x >= -tol && r.x <= 1.0 + tol;
  return r.x >= -tol && r.y >= -tol && r.x + r.y <= 1.0 + tol;
}

}  // namespace

int locate_point(const SimplicialMesh& mesh, const Vec2& x, Vec2* ref, int hint) {
  const int ne = mesh.num_elements();
  const int dim = mesh.dim();
  const double tol = 1e-12;
  if (dim == 1) {
    // bisection on sorted element intervals is not guaranteed for general
    // meshes; walk from the hint, then scan
    int k = (hint >= 0 && hint < ne) ? hint : 0;
    for (int step = 0; step < ne; ++step) {
      const Vec2 r = mesh.affine_map(k).to_reference(x);
      if (inside(r, dim, tol)) {
        if (ref) *ref = {std::clamp(r.x, 0.0, 1.0), 0.0};
        return k;
      }
      const int lf = r.x < 0.0 ? 0 : 1;
      const int f = mesh.topology().element_faces[k][lf];
      const Face& face = mesh.topology().faces[f];
      const int side = mesh.topology().element_face_side[k][lf];
      if (face.kind == BoundaryKind::Periodic || face.elem[1 - side] < 0) break;
      k = face.elem[1 - side];
    }
  } else {
    int k = (hint >= 0 && hint < ne) ? hint : 0;
    for (int step = 0; step < ne; ++step) {
      const Vec2 r = mesh.affine_map(k).to_reference(x);
      if (inside(r, dim, tol)) {
        if (ref) *ref = r;
        return k;
      }
      // barycentric coordinates: l0 = 1 - r.x - r.y, l1 = r.x, l2 = r.y;
      // leave through the face opposite the most negative one
      const double l[3] = {1.0 - r.x - r.y, r.x, r.y};
      const int lf = static_cast<int>(std::min_element(l, l + 3) - l);
      const int f = mesh.topology().element_faces[k][lf];
      const Face& face = mesh.topology().faces[f];
      const int side = mesh.topology().element_face_side[k][lf];
      if (face.kind == BoundaryKind::Periodic || face.elem[1 - side] < 0) break;
      k = face.elem[1 - side];
    }
  }
  // exhaustive fallback, picking the element with the least violation
  int best = -1;
  double best_violation = INFINITY;
  Vec2 best_ref;
  for (int k = 0; k < ne; ++k) {
    const Vec2 r = mesh.affine_map(k).to_reference(x);
    double v;
    if (dim == 1) {
      v = std::max({0.0, -r.x, r.x - 1.0});
    } else {
      v = std::max({0.0, -r.x, -r.y, r.x + r.y - 1.0});
    }
    if (v < best_violation) {
      best_violation = v;
      best = k;
      best_ref = r;
    }
    if (v == 0.0) break;
  }
  if (best_violation > 1e-9) return -1;
  if (ref) {
    if (dim == 1) {
      *ref = {std::clamp(best_ref.x, 0.0, 1.0), 0.0};
    } else {
      Vec2 r{std::max(0.0, best_ref.x), std::max(0.0, best_ref.y)};
      const double s = r.x + r.y;
      if (s > 1.0) r = (1.0 / s) * r;
      *ref = r;
    }
  }
  return best;
}

}  // namespace qlmm
