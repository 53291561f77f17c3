#include "qlmm/mmpde.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <random>
#include <string>

#include "qlmm/dg_field.hpp"
#include "qlmm/error.hpp"

namespace qlmm {

namespace {

template <int D>
using MatD = Eigen::Matrix<double, D, D>;

template <int D>
MatD<D> edge_matrix(std::span<const Vec2> x, const std::array<int, 3>& el) {
  MatD<D> e;
  for (int l = 1; l <= D; ++l) {
    const Vec2 d = x[el[l]] - x[el[0]];
    e(0, l - 1) = d.x;
    if constexpr (D == 2) e(1, l - 1) = d.y;
  }
  return e;
}

constexpr double factorial_d(int d) { return d == 1 ? 1.0 : 2.0; }

template <int D>
struct ElementTerms {
  double g = 0.0;
  MatD<D> dg_dj;
  double dg_ddet = 0.0;
  double det_j = 0.0;
};

template <int D>
ElementTerms<D> element_terms(const MatD<D>& ek, const MatD<D>& ekc, const MatD<D>& m) {
  constexpr double d = D;
  ElementTerms<D> t;
  const MatD<D> j = ekc * ek.inverse();
  const MatD<D> minv = m.inverse();
  const double det_m = m.determinant();
  const double sq = std::sqrt(det_m);
  const double tr = (j * minv * j.transpose()).trace();
  t.det_j = ekc.determinant() / ek.determinant();
  const double dd = std::pow(d, 0.75 * d);
  t.g = sq * std::pow(tr, 0.75 * d) / 3.0 + dd * std::pow(det_m, -0.25) * std::pow(t.det_j, 1.5) / 3.0;
  t.dg_dj = 0.5 * d * sq * std::pow(tr, 0.75 * d - 1.0) * minv * j.transpose();
  t.dg_ddet = 0.5 * dd * std::pow(det_m, -0.25) * std::sqrt(t.det_j);
  return t;
}

template <int D>
void check_element(const MatD<D>& ek, const MatD<D>& ekc, int k) {
  if (!(ek.determinant() > 0.0))
    fail(ErrorKind::MeshSingular, "physical element " + std::to_string(k) + " is degenerate or inverted");
  if (!(ekc.determinant() > 0.0))
    fail(ErrorKind::MeshSingular, "computational element " + std::to_string(k) + " is degenerate or inverted");
}

template <int D>
double energy_impl(const SimplicialMesh& phys, std::span<const Vec2> xi, const std::vector<Mat2>& metric) {
  const auto& topo = phys.topology();
  const int ne = phys.num_elements();
  double e = 0.0;
  for (int k = 0; k < ne; ++k) {
    const MatD<D> ek = edge_matrix<D>(phys.vertices(), topo.elements[k]);
    const MatD<D> ekc = edge_matrix<D>(xi, topo.elements[k]);
    check_element<D>(ek, ekc, k);
    const MatD<D> m = metric[k].topLeftCorner<D, D>();
    e += ek.determinant() / factorial_d(D) * element_terms<D>(ek, ekc, m).g;
  }
  return e;
}

// Per-element |K| v^K_l for l = 0..D.
template <int D>
void weighted_local_velocities(const SimplicialMesh& phys, std::span<const Vec2> xi,
                               const std::vector<Mat2>& metric, std::vector<std::array<Vec2, 3>>& out) {
  const auto& topo = phys.topology();
  const int ne = phys.num_elements();
  out.assign(ne, {});
  bool bad = false;
#pragma omp parallel for
  for (int k = 0; k < ne; ++k) {
    const MatD<D> ek = edge_matrix<D>(phys.vertices(), topo.elements[k]);
    const MatD<D> ekc = edge_matrix<D>(xi, topo.elements[k]);
    if (!(ek.determinant() > 0.0) || !(ekc.determinant() > 0.0)) {
#pragma omp atomic write
      bad = true;
      continue;
    }
    const MatD<D> m = metric[k].topLeftCorner<D, D>();
    const auto t = element_terms<D>(ek, ekc, m);
    const MatD<D> v = -ek.inverse() * t.dg_dj - t.dg_ddet * t.det_j * ekc.inverse();
    const double area = ek.determinant() / factorial_d(D);
    Vec2 v0;
    for (int l = 1; l <= D; ++l) {
      Vec2 vl{v(l - 1, 0), D == 2 ? v(l - 1, D - 1) : 0.0};
      out[k][l] = area * vl;
      v0 -= out[k][l];
    }
    out[k][0] = v0;
  }
  if (bad) fail(ErrorKind::MeshSingular, "degenerate element in mesh velocity assembly");
}

std::vector<std::array<Vec2, 3>> local_velocities(const SimplicialMesh& phys, std::span<const Vec2> xi,
                                                  const std::vector<Mat2>& metric) {
  if (static_cast<int>(xi.size()) != phys.num_vertices() ||
      static_cast<int>(metric.size()) != phys.num_elements())
    fail(ErrorKind::InvalidArgument, "mesh pair or metric size mismatch");
  std::vector<std::array<Vec2, 3>> lv;
  if (phys.dim() == 1)
    weighted_local_velocities<1>(phys, xi, metric, lv);
  else
    weighted_local_velocities<2>(phys, xi, metric, lv);
  return lv;
}

std::vector<Vec2> assemble(const MeshTopology& topo, const std::vector<std::array<Vec2, 3>>& lv) {
  const int nv = topo.num_vertices();
  std::vector<Vec2> s(nv);
  for (int v = 0; v < nv; ++v)
    for (int e = topo.patch_offsets[v]; e < topo.patch_offsets[v + 1]; ++e)
      s[v] += lv[topo.patch_elements[e]][topo.patch_local[e]];
  return s;
}

bool any_inverted(const SimplicialMesh& phys, std::span<const Vec2> xi) {
  const auto& topo = phys.topology();
  for (int k = 0; k < phys.num_elements(); ++k) {
    const auto& el = topo.elements[k];
    const double a = phys.dim() == 1 ? xi[el[1]].x - xi[el[0]].x
                                     : 0.5 * cross(xi[el[1]] - xi[el[0]], xi[el[2]] - xi[el[0]]);
    if (!(a > 0.0)) return true;
  }
  return false;
}

// Smallest incident element height at every vertex of the mesh with
// coordinates x.
std::vector<double> vertex_heights(const SimplicialMesh& like, std::span<const Vec2> x) {
  const SimplicialMesh m = like.with_vertices(std::vector<Vec2>(x.begin(), x.end()));
  std::vector<double> hk(m.num_elements());
  for (int k = 0; k < m.num_elements(); ++k) hk[k] = m.geometry(k).min_height;
  std::vector<double> hv(m.num_vertices(), INFINITY);
  for (int v = 0; v < m.num_vertices(); ++v)
    for (int k : m.patch(v)) hv[v] = std::min(hv[v], hk[k]);
  return hv;
}

// Largest eigenvalue magnitude of the Jacobian of the nodal velocity field
// at xi, by power iteration on finite-difference Jacobian-vector products.
// Used to keep explicit substeps inside the stability region: the mesh
// equation is stiff (the bound scales like N^2 / tau).
double velocity_stiffness(const SimplicialMesh& phys, std::span<const Vec2> xi, const MetricField& metric,
                          double tau, std::span<const Vec2> v0, double hmin, int iterations) {
  const int d = phys.dim();
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<Vec2> w(xi.size());
  for (auto& v : w) v = {unif(rng), d == 2 ? unif(rng) : 0.0};
  constrain_boundary_velocities(phys.topology(), w);
  std::vector<Vec2> xp(xi.size());
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    double nw = 0.0;
    for (const auto& v : w) nw = std::max(nw, norm(v));
    if (!(nw > 0.0)) return lambda;
    const double eps = 1e-6 * hmin / nw;
    for (size_t i = 0; i < xi.size(); ++i) xp[i] = xi[i] + eps * w[i];
    const auto v1 = nodal_mesh_velocities(phys, xp, metric, tau);
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < xi.size(); ++i) {
      const Vec2 jw = (1.0 / eps) * (v1[i] - v0[i]);
      num += dot(jw, jw);
      den += dot(w[i], w[i]);
      w[i] = jw;
    }
    lambda = std::sqrt(num / den);
  }
  return lambda;
}

struct Integration {
  std::vector<Vec2> xi;
  int substeps = 0;
  double energy_start = 0.0;
  double energy_end = 0.0;
};

Integration integrate(const SimplicialMesh& phys, const MetricField& metric, std::span<const Vec2> xi_ref,
                      double dt, double tau, const MoverOptions& opt) {
  Integration r;
  r.xi.assign(xi_ref.begin(), xi_ref.end());
  r.energy_start = mesh_energy(phys, r.xi, metric.element);
  double e = r.energy_start;
  double elapsed = 0.0;
  double last = INFINITY;  // last accepted substep; seeds the next trial
  double stable = INFINITY;
  while (elapsed < dt && r.substeps < opt.max_substeps) {
    const auto vel = nodal_mesh_velocities(phys, r.xi, metric, tau);
    const auto hv = vertex_heights(phys, r.xi);
    if (r.substeps == 0) {
      const double lambda = velocity_stiffness(phys, r.xi, metric, tau, vel,
                                               *std::min_element(hv.begin(), hv.end()), opt.stiffness_iterations);
      if (lambda > 0.0) stable = opt.stability_fraction / lambda;
    }
    double step = std::min({dt - elapsed, 2.0 * last, stable});
    for (size_t i = 0; i < vel.size(); ++i) {
      const double s = norm(vel[i]);
      if (s > 0.0) step = std::min(step, opt.max_move_fraction * hv[i] / s);
    }
    if (!(step > 0.0)) break;
    // accept only steps that keep K_c valid and do not raise the energy
    bool accepted = false;
    std::vector<Vec2> trial(r.xi.size());
    for (int halving = 0; halving < 40; ++halving) {
      for (size_t i = 0; i < trial.size(); ++i) trial[i] = r.xi[i] + step * vel[i];
      if (!any_inverted(phys, trial)) {
        const double et = mesh_energy(phys, trial, metric.element);
        if (et <= e + 1e-12 * std::abs(e)) {
          e = et;
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) break;
    r.xi.swap(trial);
    elapsed += step;
    last = step;
    ++r.substeps;
  }
  r.energy_end = e;
  return r;
}

// x_i^{n+1} = Phi_h(xi_ref_i): locate xi_ref_i in the computational mesh and
// interpolate the current physical vertex positions.
std::vector<Vec2> interpolate_positions(const SimplicialMesh& phys, std::span<const Vec2> xi,
                                        std::span<const Vec2> xi_ref) {
  const SimplicialMesh comp = phys.with_vertices(std::vector<Vec2>(xi.begin(), xi.end()));
  const auto& topo = phys.topology();
  std::vector<Vec2> x(xi_ref.size());
  int hint = 0;
  for (int i = 0; i < static_cast<int>(xi_ref.size()); ++i) {
    // start the walk from an element incident to the vertex
    const auto p = comp.patch(i);
    if (!p.empty()) hint = p[0];
    Vec2 r;
    const int k = locate_point(comp, xi_ref[i], &r, hint);
    if (k < 0) fail(ErrorKind::MeshSingular, "reference vertex outside the computational mesh");
    const auto& el = topo.elements[k];
    if (phys.dim() == 1) {
      x[i] = (1.0 - r.x) * phys.vertex(el[0]) + r.x * phys.vertex(el[1]);
    } else {
      x[i] = (1.0 - r.x - r.y) * phys.vertex(el[0]) + r.x * phys.vertex(el[1]) + r.y * phys.vertex(el[2]);
    }
  }
  return x;
}

}  // namespace

double mesh_energy(const SimplicialMesh& phys, std::span<const Vec2> xi, const std::vector<Mat2>& metric) {
  if (static_cast<int>(xi.size()) != phys.num_vertices() ||
      static_cast<int>(metric.size()) != phys.num_elements())
    fail(ErrorKind::InvalidArgument, "mesh pair or metric size mismatch");
  return phys.dim() == 1 ? energy_impl<1>(phys, xi, metric) : energy_impl<2>(phys, xi, metric);
}

std::vector<Vec2> energy_gradient(const SimplicialMesh& phys, std::span<const Vec2> xi,
                                  const std::vector<Mat2>& metric) {
  auto s = assemble(phys.topology(), local_velocities(phys, xi, metric));
  for (auto& v : s) v = -1.0 * v;
  return s;
}

double default_tau(const SimplicialMesh& mesh, double factor) {
  return factor * std::pow(static_cast<double>(mesh.num_elements()), -1.0 / mesh.dim());
}

void constrain_boundary_velocities(const MeshTopology& topo, std::vector<Vec2>& vel) {
  const int nv = topo.num_vertices();
  if (topo.dim == 1) {
    for (int v = 0; v < nv; ++v)
      if (topo.vertex_flags[v]) vel[v] = {};
    return;
  }
  for (int v = 0; v < nv; ++v) {
    const auto f = topo.vertex_flags[v];
    if (f & (kOnXLo | kOnXHi)) vel[v].x = 0.0;
    if (f & (kOnYLo | kOnYHi)) vel[v].y = 0.0;
  }
  // periodic partners slide together
  for (int v = 0; v < nv; ++v) {
    const int px = topo.periodic_partner_x[v];
    if (px > v) {
      const double t = 0.5 * (vel[v].y + vel[px].y);
      vel[v].y = vel[px].y = t;
    }
    const int py = topo.periodic_partner_y[v];
    if (py > v) {
      const double t = 0.5 * (vel[v].x + vel[py].x);
      vel[v].x = vel[py].x = t;
    }
  }
}

std::vector<Vec2> nodal_mesh_velocities(const SimplicialMesh& phys, std::span<const Vec2> xi,
                                        const MetricField& metric, double tau) {
  if (!(tau > 0.0)) fail(ErrorKind::InvalidArgument, "relaxation time must be positive");
  auto s = assemble(phys.topology(), local_velocities(phys, xi, metric.element));
  const int d = phys.dim();
  for (int v = 0; v < phys.num_vertices(); ++v)
    s[v] *= std::sqrt(det_d(metric.vertex[v], d)) / tau;
  constrain_boundary_velocities(phys.topology(), s);
  return s;
}

void snap_to_boundary(const MeshTopology& topo, std::vector<Vec2>& x) {
  const Box& d = topo.domain;
  for (int v = 0; v < topo.num_vertices(); ++v) {
    const auto f = topo.vertex_flags[v];
    if (f & kOnXLo) x[v].x = d.lo.x;
    if (f & kOnXHi) x[v].x = d.hi.x;
    if (topo.dim == 1) {
      x[v].y = 0.0;
      continue;
    }
    if (f & kOnYLo) x[v].y = d.lo.y;
    if (f & kOnYHi) x[v].y = d.hi.y;
  }
  for (int v = 0; v < topo.num_vertices(); ++v) {
    const int px = topo.periodic_partner_x[v];
    if (px > v && topo.dim == 2) x[v].y = x[px].y = 0.5 * (x[v].y + x[px].y);
    const int py = topo.periodic_partner_y[v];
    if (py > v) x[v].x = x[py].x = 0.5 * (x[v].x + x[py].x);
  }
}

MoveResult move_mesh(const SimplicialMesh& current, const MetricField& metric, std::span<const Vec2> xi_ref,
                     double dt, const MoverOptions& opt) {
  if (static_cast<int>(xi_ref.size()) != current.num_vertices())
    fail(ErrorKind::InvalidArgument, "reference computational mesh does not match");
  if (!(dt >= 0.0)) fail(ErrorKind::InvalidArgument, "negative pseudo-time step");
  const double tau = default_tau(current, opt.tau_factor);
  MoveDiagnostics diag;
  double span = dt;
  for (int attempt = 0; attempt <= opt.max_retries; ++attempt) {
    const Integration in = integrate(current, metric, xi_ref, span, tau, opt);
    auto x = interpolate_positions(current, in.xi, xi_ref);
    snap_to_boundary(current.topology(), x);
    SimplicialMesh next = current.with_vertices(std::move(x));
    bool ok = true;
    double min_area = INFINITY;
    for (int k = 0; k < current.num_elements(); ++k) {
      const double a = min_measure_along_path(current, next, k);
      min_area = std::min(min_area, a);
      if (!(a > 0.0)) ok = false;
    }
    if (ok) {
      diag.energy_start = in.energy_start;
      diag.energy_end = in.energy_end;
      diag.substeps = in.substeps;
      diag.retries = attempt;
      diag.min_area = min_area;
      for (int v = 0; v < current.num_vertices(); ++v)
        diag.max_displacement = std::max(diag.max_displacement, norm(next.vertex(v) - current.vertex(v)));
      return {std::move(next), diag};
    }
    span *= 0.5;
  }
  std::cerr << "warning: mesh movement rejected after " << opt.max_retries
            << " halvings; keeping the current mesh\n";
  diag.moved = false;
  diag.retries = opt.max_retries;
  diag.min_area = current.min_measure();
  return {current, diag};
}

}  // namespace qlmm
