#include "qlmm/swe_physics.hpp"

#include <cmath>

#include "qlmm/error.hpp"

namespace qlmm {

FluxTensor physical_flux(const State& s, double h, const PhysicsParams& p, int dim) {
  const double u = desingularized_velocity(s.m, h, p.h_dry);
  // 1/2 g (2 h eta - eta^2) minus its reference value, with B = eta - h
  const double de = s.eta - p.eta_ref;
  const double pressure =
      0.5 * p.g * (de * (s.eta + p.eta_ref) - 2.0 * de * p.b_ref - 2.0 * s.eta * ((s.eta - h) - p.b_ref));
  FluxTensor f{};
  if (dim == 1) {
    f[0] = {s.m, 0.0};
    f[1] = {s.m * u + pressure, 0.0};
    return f;
  }
  const double v = desingularized_velocity(s.w, h, p.h_dry);
  f[0] = {s.m, s.w};
  f[1] = {s.m * u + pressure, s.m * v};
  f[2] = {s.w * u, s.w * v + pressure};
  return f;
}

FluxTensor moving_flux(const State& s, double h, const Vec2& xdot, const PhysicsParams& p, int dim) {
  FluxTensor f = physical_flux(s, h, p, dim);
  const double c[3] = {s.eta, s.m, s.w};
  for (int i = 0; i <= dim; ++i) {
    f[i].x -= c[i] * xdot.x;
    if (dim == 2) f[i].y -= c[i] * xdot.y;
  }
  return f;
}

Vec3 normal_flux(const FluxTensor& f, const Vec2& n) {
  return {dot(f[0], n), dot(f[1], n), dot(f[2], n)};
}

Vec3 eigenvalues_moving(const State& s, double h, const Vec2& xdot, const Vec2& n,
                        const PhysicsParams& p, int dim) {
  if (h < 0.0) fail(ErrorKind::PhysicsDomain, "negative water depth in eigenvalues");
  const double u = desingularized_velocity(s.m, h, p.h_dry);
  const double v = dim == 2 ? desingularized_velocity(s.w, h, p.h_dry) : 0.0;
  const double un = u * n.x + v * n.y - dot(xdot, n);
  const double c = std::sqrt(p.g * h);
  return {un - c, un, un + c};
}

double max_abs_eigenvalue(const State& s, double h, const Vec2& xdot, const Vec2& n,
                          const PhysicsParams& p, int dim) {
  const double hc = std::max(h, 0.0);
  const double u = desingularized_velocity(s.m, hc, p.h_dry);
  const double v = dim == 2 ? desingularized_velocity(s.w, hc, p.h_dry) : 0.0;
  const double un = u * n.x + v * n.y - dot(xdot, n);
  return std::abs(un) + std::sqrt(p.g * hc);
}

Vec3 lax_friedrichs_flux(const State& ui, double hi, const State& ue, double he, const Vec2& xdot,
                         const Vec2& n, double alpha, const PhysicsParams& p, int dim) {
  const Vec3 fi = normal_flux(moving_flux(ui, hi, xdot, p, dim), n);
  const Vec3 fe = normal_flux(moving_flux(ue, he, xdot, p, dim), n);
  const double di[3] = {ui.eta, ui.m, ui.w};
  const double de[3] = {ue.eta, ue.m, ue.w};
  Vec3 out{0.0, 0.0, 0.0};
  for (int c = 0; c <= dim; ++c) out[c] = 0.5 * (fi[c] + fe[c] - alpha * (de[c] - di[c]));
  return out;
}

ReconstructedPair hydrostatic_reconstruct(const State& ui, double bi, const State& ue, double be,
                                          const PhysicsParams& p, int dim) {
  const double bmax = std::max(bi, be);
  const double hi = ui.eta - bi;
  const double he = ue.eta - be;
  ReconstructedPair r;
  r.hi = std::max(0.0, ui.eta - bmax);
  r.he = std::max(0.0, ue.eta - bmax);
  const double d2 = p.h_dry * p.h_dry;
  const double ri = r.hi * hi / std::max(hi * hi, d2);
  const double re = r.he * he / std::max(he * he, d2);
  r.ui = {ui.eta, ri * ui.m, dim == 2 ? ri * ui.w : 0.0};
  r.ue = {ue.eta, re * ue.m, dim == 2 ? re * ue.w : 0.0};
  return r;
}

Vec3 corrected_flux(const State& ui, double bi, const State& ue, double be, const Vec2& xdot,
                    const Vec2& n, double alpha, const PhysicsParams& p, int dim) {
  const ReconstructedPair r = hydrostatic_reconstruct(ui, bi, ue, be, p, dim);
  Vec3 f = lax_friedrichs_flux(r.ui, r.hi, r.ue, r.he, xdot, n, alpha, p, dim);
  const double corr = p.g * ui.eta * ((ui.eta - bi) - r.hi);
  f[1] += corr * n.x;
  if (dim == 2) f[2] += corr * n.y;
  return f;
}

CharacteristicBasis characteristic_basis(const State& s, double h, const Vec2& n,
                                         const PhysicsParams& p, int dim) {
  CharacteristicBasis b;
  if (!(h > p.h_dry)) return b;
  const double c = std::sqrt(p.g * h);
  if (c < 1e-8) return b;
  const double u = desingularized_velocity(s.m, h, p.h_dry);
  if (dim == 1) {
    b.r(0, 0) = 1.0;
    b.r(0, 1) = 1.0;
    b.r(1, 0) = u - c;
    b.r(1, 1) = u + c;
    const double inv = 1.0 / (2.0 * c);
    b.l(0, 0) = (u + c) * inv;
    b.l(0, 1) = -inv;
    b.l(1, 0) = -(u - c) * inv;
    b.l(1, 1) = inv;
    return b;
  }
  const double v = desingularized_velocity(s.w, h, p.h_dry);
  b.r << 1.0, 0.0, 1.0,
         u - c * n.x, -n.y, u + c * n.x,
         v - c * n.y, n.x, v + c * n.y;
  b.l = b.r.inverse();
  return b;
}

}  // namespace qlmm
