#include "qlmm/dg_operator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qlmm/error.hpp"

namespace qlmm {

namespace {

State state_at(const DGField& u, int k, const double* phi, int dim) {
  const auto v = evaluate(u, k, phi);
  return {v[0], v[1], dim == 2 ? v[2] : 0.0};
}

}  // namespace

State ghost_state(const State& s, BoundaryKind kind, const Vec2& n, int dim) {
  switch (kind) {
    case BoundaryKind::Transmissive:
      return s;
    case BoundaryKind::Reflective: {
      if (dim == 1) return {s.eta, -s.m, 0.0};
      const double mn = s.m * n.x + s.w * n.y;
      return {s.eta, s.m - 2.0 * mn * n.x, s.w - 2.0 * mn * n.y};
    }
    case BoundaryKind::Periodic:
    case BoundaryKind::Interior:
      break;
  }
  fail(ErrorKind::InvalidArgument, "ghost state requested for a non-boundary face");
}

void check_finite(const DGField& f, const char* what) {
  const auto d = f.data();
  const size_t per = static_cast<size_t>(f.num_components()) * f.num_basis();
  for (size_t i = 0; i < d.size(); ++i)
    if (!std::isfinite(d[i]))
      fail(ErrorKind::NumericalBlowup,
           std::string(what) + ": non-finite value in element " + std::to_string(i / per));
}

SpatialOperator::SpatialOperator(const Discretization& disc, PhysicsParams params)
    : disc_(disc), params_(params) {}

void SpatialOperator::check_inputs(const SimplicialMesh& mesh, const DGField& u, const DGField& b,
                                   std::span<const Vec2> velocity) const {
  if (mesh.dim() != disc_.dim) fail(ErrorKind::InvalidArgument, "mesh dimension mismatch");
  check_compatible(u, mesh, disc_);
  check_compatible(b, mesh, disc_);
  if (u.num_components() != disc_.dim + 1 || b.num_components() != 1)
    fail(ErrorKind::InvalidArgument, "unexpected component count");
  if (!velocity.empty() && static_cast<int>(velocity.size()) != mesh.num_vertices())
    fail(ErrorKind::InvalidArgument, "velocity size does not match the mesh");
}

void SpatialOperator::face_traces(const SimplicialMesh& mesh, const DGField& u, const DGField& b,
                                  std::span<const Vec2> vel, int f, PointTrace* out) const {
  const Face& face = mesh.topology().faces[f];
  const int dim = disc_.dim;
  const int nq = disc_.face.size();
  const int k0 = face.elem[0];
  const auto& tab0 = disc_.face_phi[face.local[0]][face.reversed[0] ? 1 : 0];
  const Vec2 n = mesh.face_normal(f);
  for (int q = 0; q < nq; ++q) {
    PointTrace& t = out[q];
    const double* phi0 = &tab0[q * disc_.nb];
    t.ui = state_at(u, k0, phi0, dim);
    t.bi = evaluate(b, k0, 0, phi0);
    if (face.has_neighbor()) {
      const int k1 = face.elem[1];
      const double* phi1 = &disc_.face_phi[face.local[1]][face.reversed[1] ? 1 : 0][q * disc_.nb];
      t.ue = state_at(u, k1, phi1, dim);
      t.be = evaluate(b, k1, 0, phi1);
    } else {
      t.ue = ghost_state(t.ui, face.kind, n, dim);
      t.be = t.bi;
    }
    if (vel.empty()) {
      t.xdot = {};
    } else if (dim == 1) {
      t.xdot = vel[face.va[0]];
    } else {
      const double s = disc_.face.points[q].x;
      t.xdot = (1.0 - s) * vel[face.va[0]] + s * vel[face.vb[0]];
    }
  }
}

void SpatialOperator::volume_terms(const SimplicialMesh& mesh, const DGField& u, const DGField& b,
                                   std::span<const Vec2> vel, int k, double* out) const {
  const int dim = disc_.dim;
  const int nb = disc_.nb;
  const int nc = dim + 1;
  const AffineMap map = mesh.affine_map(k);
  const auto& el = mesh.topology().elements[k];
  // inverse transpose of the Jacobian maps reference to physical gradients
  double it[2][2];
  if (dim == 1) {
    it[0][0] = 1.0 / map.det;
    it[0][1] = it[1][0] = it[1][1] = 0.0;
  } else {
    it[0][0] = map.e[1][1] / map.det;
    it[0][1] = -map.e[1][0] / map.det;
    it[1][0] = -map.e[0][1] / map.det;
    it[1][1] = map.e[0][0] / map.det;
  }
  const double* bc = b.element(k);
  const PhysicsParams p = element_params(u, b, k);
  Vec2 grad[16];
  for (int q = 0; q < disc_.volume.size(); ++q) {
    const double wq = disc_.volume.weights[q] * map.det;
    const double* phi = &disc_.vol_phi[q * nb];
    const Vec2* dphi = &disc_.vol_dphi[q * nb];
    for (int j = 0; j < nb; ++j)
      grad[j] = {it[0][0] * dphi[j].x + it[0][1] * dphi[j].y, it[1][0] * dphi[j].x + it[1][1] * dphi[j].y};
    const State s = state_at(u, k, phi, dim);
    double bq = 0.0;
    Vec2 db;
    for (int j = 0; j < nb; ++j) {
      bq += bc[j] * phi[j];
      db += bc[j] * grad[j];
    }
    const double h = s.eta - bq;
    const Vec2 xdot = interpolate_vertex_field(vel, el, disc_.volume.points[q], dim);
    const FluxTensor f = moving_flux(s, h, xdot, p, dim);
    const double src[3] = {0.0, -p.g * s.eta * db.x, -p.g * s.eta * db.y};
    for (int c = 0; c < nc; ++c)
      for (int j = 0; j < nb; ++j) out[c * nb + j] += wq * (dot(grad[j], f[c]) + phi[j] * src[c]);
  }
}

PhysicsParams SpatialOperator::element_params(const DGField& u, const DGField& b, int k) const {
  PhysicsParams p = params_;
  p.eta_ref = u(k, 0, 0) * disc_.phi0;
  p.b_ref = b(k, 0, 0) * disc_.phi0;
  return p;
}

double SpatialOperator::max_wave_speed(const SimplicialMesh& mesh, const DGField& u, const DGField& b,
                                       std::span<const Vec2> vel) const {
  check_inputs(mesh, u, b, vel);
  const int nf = static_cast<int>(mesh.topology().faces.size());
  const int nq = disc_.face.size();
  const int dim = disc_.dim;
  double amax = 0.0;
#pragma omp parallel for reduction(max : amax)
  for (int f = 0; f < nf; ++f) {
    PointTrace tr[16];
    face_traces(mesh, u, b, vel, f, tr);
    const Vec2 n = mesh.face_normal(f);
    for (int q = 0; q < nq; ++q) {
      amax = std::max(amax, max_abs_eigenvalue(tr[q].ui, tr[q].ui.eta - tr[q].bi, tr[q].xdot, n, params_, dim));
      amax = std::max(amax, max_abs_eigenvalue(tr[q].ue, tr[q].ue.eta - tr[q].be, tr[q].xdot, n, params_, dim));
    }
  }
  return amax;
}

void SpatialOperator::rhs(const SimplicialMesh& mesh, const DGField& u, const DGField& b,
                          std::span<const Vec2> vel, DGField& out) const {
  check_inputs(mesh, u, b, vel);
  const auto& topo = mesh.topology();
  const int nf = static_cast<int>(topo.faces.size());
  const int ne = mesh.num_elements();
  const int nq = disc_.face.size();
  const int nb = disc_.nb;
  const int dim = disc_.dim;
  const int nc = dim + 1;
  if (!out.same_shape(u)) out = DGField(ne, nc, nb);

  const double alpha = max_wave_speed(mesh, u, b, vel);

  // Face pass: weighted numerical fluxes per side and quadrature point.
  std::vector<Vec3> flux(static_cast<size_t>(nf) * 2 * nq);
#pragma omp parallel for
  for (int f = 0; f < nf; ++f) {
    PointTrace tr[16];
    face_traces(mesh, u, b, vel, f, tr);
    double len = 1.0;
    const Vec2 n = mesh.face_normal(f, &len);
    const Vec2 mn{-n.x, -n.y};
    const bool two = topo.faces[f].has_neighbor();
    const PhysicsParams p0 = element_params(u, b, topo.faces[f].elem[0]);
    const PhysicsParams p1 = two ? element_params(u, b, topo.faces[f].elem[1]) : p0;
    for (int q = 0; q < nq; ++q) {
      const double w = disc_.face.weights[q] * len;
      Vec3 f0 = corrected_flux(tr[q].ui, tr[q].bi, tr[q].ue, tr[q].be, tr[q].xdot, n, alpha, p0, dim);
      for (auto& x : f0) x *= w;
      flux[(static_cast<size_t>(f) * 2 + 0) * nq + q] = f0;
      if (two) {
        Vec3 f1 = corrected_flux(tr[q].ue, tr[q].be, tr[q].ui, tr[q].bi, tr[q].xdot, mn, alpha, p1, dim);
        for (auto& x : f1) x *= w;
        flux[(static_cast<size_t>(f) * 2 + 1) * nq + q] = f1;
      }
    }
  }

  // Element pass: volume terms, then gather the face fluxes.
#pragma omp parallel for
  for (int k = 0; k < ne; ++k) {
    double* o = out.element(k);
    std::fill(o, o + nc * nb, 0.0);
    volume_terms(mesh, u, b, vel, k, o);
    for (int lf = 0; lf <= dim; ++lf) {
      const int f = topo.element_faces[k][lf];
      const int s = topo.element_face_side[k][lf];
      const Face& face = topo.faces[f];
      const auto& tab = disc_.face_phi[lf][face.reversed[s] ? 1 : 0];
      for (int q = 0; q < nq; ++q) {
        const Vec3& fl = flux[(static_cast<size_t>(f) * 2 + s) * nq + q];
        const double* phi = &tab[q * nb];
        for (int c = 0; c < nc; ++c)
          for (int j = 0; j < nb; ++j) o[c * nb + j] -= phi[j] * fl[c];
      }
    }
  }
  check_finite(out, "rhs");
}

void SpatialOperator::rhs_serial(const SimplicialMesh& mesh, const DGField& u, const DGField& b,
                                 std::span<const Vec2> vel, DGField& out) const {
  check_inputs(mesh, u, b, vel);
  const auto& topo = mesh.topology();
  const int nf = static_cast<int>(topo.faces.size());
  const int ne = mesh.num_elements();
  const int nq = disc_.face.size();
  const int nb = disc_.nb;
  const int dim = disc_.dim;
  const int nc = dim + 1;
  out = DGField(ne, nc, nb);

  double alpha = 0.0;
  for (int f = 0; f < nf; ++f) {
    PointTrace tr[16];
    face_traces(mesh, u, b, vel, f, tr);
    const Vec2 n = mesh.face_normal(f);
    for (int q = 0; q < nq; ++q) {
      alpha = std::max(alpha, max_abs_eigenvalue(tr[q].ui, tr[q].ui.eta - tr[q].bi, tr[q].xdot, n, params_, dim));
      alpha = std::max(alpha, max_abs_eigenvalue(tr[q].ue, tr[q].ue.eta - tr[q].be, tr[q].xdot, n, params_, dim));
    }
  }

  for (int k = 0; k < ne; ++k) volume_terms(mesh, u, b, vel, k, out.element(k));

  for (int f = 0; f < nf; ++f) {
    const Face& face = topo.faces[f];
    PointTrace tr[16];
    face_traces(mesh, u, b, vel, f, tr);
    double len = 1.0;
    const Vec2 n = mesh.face_normal(f, &len);
    const PhysicsParams p0 = element_params(u, b, face.elem[0]);
    const PhysicsParams p1 = face.has_neighbor() ? element_params(u, b, face.elem[1]) : p0;
    for (int q = 0; q < nq; ++q) {
      const double w = disc_.face.weights[q] * len;
      const Vec3 f0 = corrected_flux(tr[q].ui, tr[q].bi, tr[q].ue, tr[q].be, tr[q].xdot, n, alpha, p0, dim);
      const double* phi0 = &disc_.face_phi[face.local[0]][face.reversed[0] ? 1 : 0][q * nb];
      for (int c = 0; c < nc; ++c)
        for (int j = 0; j < nb; ++j) out(face.elem[0], c, j) -= w * phi0[j] * f0[c];
      if (!face.has_neighbor()) continue;
      const Vec3 f1 = corrected_flux(tr[q].ue, tr[q].be, tr[q].ui, tr[q].bi, tr[q].xdot,
                                     Vec2{-n.x, -n.y}, alpha, p1, dim);
      const double* phi1 = &disc_.face_phi[face.local[1]][face.reversed[1] ? 1 : 0][q * nb];
      for (int c = 0; c < nc; ++c)
        for (int j = 0; j < nb; ++j) out(face.elem[1], c, j) -= w * phi1[j] * f1[c];
    }
  }
  check_finite(out, "rhs");
}

DGField motion_term(const Discretization& disc, const SimplicialMesh& mesh, const DGField& u,
                    std::span<const Vec2> velocity) {
  check_compatible(u, mesh, disc);
  const int nb = disc.nb;
  const int nc = u.num_components();
  DGField out(mesh.num_elements(), nc, nb);
  if (velocity.empty()) return out;
  std::vector<Vec2> grad(nb);
#pragma omp parallel for firstprivate(grad)
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const AffineMap map = mesh.affine_map(k);
    const auto& el = mesh.topology().elements[k];
    const double div = velocity_divergence(mesh, velocity, k);
    double* o = out.element(k);
    for (int q = 0; q < disc.volume.size(); ++q) {
      const double wq = disc.volume.weights[q] * map.det;
      const double* phi = &disc.vol_phi[q * nb];
      const Vec2* dphi = &disc.vol_dphi[q * nb];
      for (int j = 0; j < nb; ++j) {
        if (disc.dim == 1) {
          grad[j] = {dphi[j].x / map.det, 0.0};
        } else {
          grad[j] = {(map.e[1][1] * dphi[j].x - map.e[1][0] * dphi[j].y) / map.det,
                     (-map.e[0][1] * dphi[j].x + map.e[0][0] * dphi[j].y) / map.det};
        }
      }
      const Vec2 xdot = interpolate_vertex_field(velocity, el, disc.volume.points[q], disc.dim);
      for (int c = 0; c < nc; ++c) {
        double val = 0.0;
        Vec2 g;
        for (int j = 0; j < nb; ++j) {
          val += u(k, c, j) * phi[j];
          g += u(k, c, j) * grad[j];
        }
        const double integrand = dot(xdot, g) + val * div;
        for (int j = 0; j < nb; ++j) o[c * nb + j] += wq * phi[j] * integrand;
      }
    }
  }
  return out;
}

double wellbalance_residual(const SpatialOperator& op, const SimplicialMesh& mesh, const DGField& u,
                            const DGField& b, std::span<const Vec2> velocity) {
  DGField r;
  op.rhs(mesh, u, b, velocity, r);
  const auto span = r.data();
  if (!velocity.empty()) {
    const DGField mt = motion_term(op.discretization(), mesh, u, velocity);
    const auto ms = mt.data();
    for (size_t i = 0; i < span.size(); ++i) span[i] -= ms[i];
  }
  double m = 0.0;
  for (double x : span) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace qlmm
