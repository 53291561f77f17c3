#include "qlmm/limiters.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qlmm/dg_operator.hpp"
#include "qlmm/error.hpp"

namespace qlmm {

double minmod(double a, double b, double c) {
  if (a > 0.0 && b > 0.0 && c > 0.0) return std::min({a, b, c});
  if (a < 0.0 && b < 0.0 && c < 0.0) return std::max({a, b, c});
  return 0.0;
}

double modified_minmod(double a, double b, double c, double threshold) {
  if (std::abs(a) <= threshold) return a;
  return minmod(a, b, c);
}

namespace {

struct NeighborRef {
  int elem = -1;
  Vec2 offset;
  BoundaryKind kind = BoundaryKind::Interior;
};

NeighborRef neighbor_of(const MeshTopology& t, int k, int lf) {
  const int f = t.element_faces[k][lf];
  const int s = t.element_face_side[k][lf];
  const Face& face = t.faces[f];
  NeighborRef r;
  r.kind = face.kind;
  if (!face.has_neighbor()) return r;
  r.elem = face.elem[1 - s];
  if (face.kind == BoundaryKind::Periodic) r.offset = s == 0 ? Vec2{-face.shift.x, -face.shift.y} : face.shift;
  return r;
}

State average_state(const Discretization& disc, const DGField& u, int k) {
  return {u(k, 0, 0) * disc.phi0, u(k, 1, 0) * disc.phi0, disc.dim == 2 ? u(k, 2, 0) * disc.phi0 : 0.0};
}

Eigen::Vector3d as_vec(const State& s) { return {s.eta, s.m, s.w}; }

int tvb_limit_1d(const Discretization& disc, const SimplicialMesh& mesh, DGField& u, const DGField& b,
                 const TvbOptions& opt, const PhysicsParams& p) {
  const auto& topo = mesh.topology();
  const int ne = mesh.num_elements();
  const int nb = disc.nb;
  const double phi1r = disc.vertex_phi[1][1];
  // averages are read from a snapshot so the result does not depend on order
  std::vector<State> avg(ne);
  for (int k = 0; k < ne; ++k) avg[k] = average_state(disc, u, k);
  int count = 0;
#pragma omp parallel for reduction(+ : count)
  for (int k = 0; k < ne; ++k) {
    const State a0 = avg[k];
    State side[2];
    for (int lf = 0; lf < 2; ++lf) {
      const NeighborRef nr = neighbor_of(topo, k, lf);
      side[lf] = nr.elem >= 0 ? avg[nr.elem]
                              : ghost_state(a0, nr.kind, Vec2{lf == 0 ? -1.0 : 1.0, 0.0}, 1);
    }
    const auto ur = evaluate(u, k, disc.vertex_phi[1].data());
    const auto ul = evaluate(u, k, disc.vertex_phi[0].data());
    const double hbar = a0.eta - b(k, 0, 0) * disc.phi0;
    CharacteristicBasis cb;
    if (opt.characteristic) cb = characteristic_basis(a0, hbar, Vec2{1.0, 0.0}, p, 1);
    const Eigen::Vector3d v0 = as_vec(a0);
    const Eigen::Vector3d ut = cb.l * (Eigen::Vector3d(ur[0], ur[1], 0.0) - v0);
    const Eigen::Vector3d utt = cb.l * (v0 - Eigen::Vector3d(ul[0], ul[1], 0.0));
    const Eigen::Vector3d dp = cb.l * (as_vec(side[1]) - v0);
    const Eigen::Vector3d dm = cb.l * (v0 - as_vec(side[0]));
    const double dx = mesh.signed_measure(k);
    const double thr = opt.m_tvb * dx * dx;
    bool changed = false;
    for (int c = 0; c < 2; ++c) {
      if (modified_minmod(ut[c], dp[c], dm[c], thr) != ut[c]) changed = true;
      if (modified_minmod(utt[c], dp[c], dm[c], thr) != utt[c]) changed = true;
    }
    if (!changed) continue;
    const Eigen::Vector3d a(u(k, 0, 1) * phi1r, u(k, 1, 1) * phi1r, 0.0);
    Eigen::Vector3d aw = cb.l * a;
    for (int c = 0; c < 2; ++c) aw[c] = minmod(aw[c], dp[c], dm[c]);
    aw[2] = 0.0;
    const Eigen::Vector3d an = cb.r * aw;
    for (int c = 0; c < 2; ++c) {
      u(k, c, 1) = an[c] / phi1r;
      for (int j = 2; j < nb; ++j) u(k, c, j) = 0.0;
    }
    ++count;
  }
  return count;
}

// Modal coefficients (modes 1..2) of the P1 function that is 1 at the
// midpoint of local face i and 0 at the other two.
std::array<std::array<double, 3>, 3> midpoint_shape_coefficients(const Discretization& disc) {
  std::array<std::array<double, 3>, 3> c{};
  for (int i = 0; i < 3; ++i)
    for (int q = 0; q < disc.volume.size(); ++q) {
      const Vec2 r = disc.volume.points[q];
      const double lam[3] = {1.0 - r.x - r.y, r.x, r.y};
      const double psi = 1.0 - 2.0 * lam[i];
      for (int j = 1; j <= 2; ++j) c[i][j] += disc.volume.weights[q] * psi * disc.vol_phi[q * disc.nb + j];
    }
  return c;
}

int tvb_limit_2d(const Discretization& disc, const SimplicialMesh& mesh, DGField& u, const DGField& b,
                 const TvbOptions& opt, const PhysicsParams& p) {
  const auto& topo = mesh.topology();
  const int ne = mesh.num_elements();
  const int nb = disc.nb;
  const auto psi = midpoint_shape_coefficients(disc);
  std::vector<State> avg(ne);
  std::vector<Vec2> bary(ne);
  for (int k = 0; k < ne; ++k) {
    avg[k] = average_state(disc, u, k);
    const auto v = mesh.element_vertices(k);
    bary[k] = (1.0 / 3.0) * (v[0] + v[1] + v[2]);
  }
  int count = 0;
#pragma omp parallel for reduction(+ : count)
  for (int k = 0; k < ne; ++k) {
    const ElementGeometry geo = mesh.geometry(k);
    const auto v = mesh.element_vertices(k);
    const State a0 = avg[k];
    const Eigen::Vector3d v0 = as_vec(a0);
    const Vec2 b0 = bary[k];
    Vec2 nbary[3];
    Eigen::Vector3d navg[3];
    Vec2 mid[3];
    for (int lf = 0; lf < 3; ++lf) {
      mid[lf] = 0.5 * (v[(lf + 1) % 3] + v[(lf + 2) % 3]);
      const NeighborRef nr = neighbor_of(topo, k, lf);
      if (nr.elem >= 0) {
        nbary[lf] = bary[nr.elem] + nr.offset;
        navg[lf] = as_vec(avg[nr.elem]);
      } else {
        const Vec2 n = geo.normals[lf];
        nbary[lf] = b0 + 2.0 * dot(mid[lf] - b0, n) * n;
        navg[lf] = as_vec(ghost_state(a0, nr.kind, n, 2));
      }
    }
    const double hbar = a0.eta - b(k, 0, 0) * disc.phi0;
    const double thr = opt.m_tvb * geo.diameter * geo.diameter;
    Eigen::Vector3d delta[3];
    bool changed = false;
    for (int i = 0; i < 3; ++i) {
      // m_i - b0 = a1 (b_j - b0) + a2 (b_l - b0) with a1, a2 >= 0
      const Vec2 r = mid[i] - b0;
      const int pairs[3][2] = {{i, (i + 1) % 3}, {i, (i + 2) % 3}, {(i + 1) % 3, (i + 2) % 3}};
      double best = -INFINITY, a1 = 0.0, a2 = 0.0;
      int bj = i, bl = (i + 1) % 3;
      for (const auto& pr : pairs) {
        const Vec2 dj = nbary[pr[0]] - b0, dl = nbary[pr[1]] - b0;
        const double det = cross(dj, dl);
        if (std::abs(det) < 1e-300) continue;
        const double x1 = cross(r, dl) / det, x2 = cross(dj, r) / det;
        const double worst = std::min(x1, x2);
        if (worst > best + 1e-14) {
          best = worst;
          a1 = x1;
          a2 = x2;
          bj = pr[0];
          bl = pr[1];
        }
        if (worst >= 0.0) break;
      }
      a1 = std::max(a1, 0.0);
      a2 = std::max(a2, 0.0);
      const Eigen::Vector3d dbar = a1 * (navg[bj] - v0) + a2 * (navg[bl] - v0);
      const auto um = evaluate(u, k, disc.midpoint_phi[i].data());
      const Eigen::Vector3d ut = Eigen::Vector3d(um[0], um[1], um[2]) - v0;
      CharacteristicBasis cb;
      if (opt.characteristic) cb = characteristic_basis(a0, hbar, geo.normals[i], p, 2);
      const Eigen::Vector3d wt = cb.l * ut;
      const Eigen::Vector3d wd = cb.l * (opt.nu * dbar);
      Eigen::Vector3d wl;
      for (int c = 0; c < 3; ++c) {
        wl[c] = modified_minmod(wt[c], wd[c], wd[c], thr);
        if (wl[c] != wt[c]) changed = true;
      }
      delta[i] = cb.r * wl;
    }
    if (!changed) continue;
    for (int c = 0; c < 3; ++c) {
      double d[3] = {delta[0][c], delta[1][c], delta[2][c]};
      const double sum = d[0] + d[1] + d[2];
      if (sum != 0.0) {
        double pos = 0.0, neg = 0.0;
        for (double x : d) {
          pos += std::max(0.0, x);
          neg += std::max(0.0, -x);
        }
        const double tp = pos > 0.0 ? std::min(1.0, neg / pos) : 0.0;
        const double tn = neg > 0.0 ? std::min(1.0, pos / neg) : 0.0;
        for (double& x : d) x = tp * std::max(0.0, x) - tn * std::max(0.0, -x);
      }
      for (int j = 1; j <= 2; ++j) u(k, c, j) = d[0] * psi[0][j] + d[1] * psi[1][j] + d[2] * psi[2][j];
      for (int j = 3; j < nb; ++j) u(k, c, j) = 0.0;
    }
    ++count;
  }
  return count;
}

}  // namespace

int tvb_limit(const Discretization& disc, const SimplicialMesh& mesh, DGField& u, const DGField& b,
              const TvbOptions& opt, const PhysicsParams& p) {
  check_compatible(u, mesh, disc);
  check_compatible(b, mesh, disc);
  if (opt.m_tvb < 0.0) fail(ErrorKind::InvalidArgument, "TVB constant must be non-negative");
  return disc.dim == 1 ? tvb_limit_1d(disc, mesh, u, b, opt, p) : tvb_limit_2d(disc, mesh, u, b, opt, p);
}

int pp_limit(const Discretization& disc, DGField& h) {
  const int ne = h.num_elements();
  const int nb = disc.nb;
  const int np = static_cast<int>(disc.pp_points.size());
  int count = 0;
  int bad = -1;
#pragma omp parallel for reduction(+ : count)
  for (int k = 0; k < ne; ++k) {
    const double hbar = h(k, 0, 0) * disc.phi0;
    if (hbar < -1e-12) {
#pragma omp critical
      if (bad < 0 || k < bad) bad = k;
      continue;
    }
    if (hbar <= 0.0) {
      bool any = false;
      for (int j = 1; j < nb; ++j) any = any || h(k, 0, j) != 0.0;
      for (int j = 1; j < nb; ++j) h(k, 0, j) = 0.0;
      if (any) ++count;
      continue;
    }
    double hmin = INFINITY;
    for (int q = 0; q < np; ++q) hmin = std::min(hmin, evaluate(h, k, 0, &disc.pp_phi[q * nb]));
    if (hmin >= 0.0) continue;
    const double theta = std::min(1.0, hbar / (hbar - hmin));
    for (int j = 1; j < nb; ++j) h(k, 0, j) *= theta;
    ++count;
  }
  if (bad >= 0)
    fail(ErrorKind::PositivityViolation,
         "negative cell-average depth " + std::to_string(h(bad, 0, 0) * disc.phi0) + " in element " +
             std::to_string(bad));
  return count;
}

void bottom_correct(DGField& b, const DGField& h_before, const DGField& h_after) {
  if (!h_before.same_shape(h_after) || b.num_elements() != h_before.num_elements() ||
      b.num_basis() != h_before.num_basis() || b.num_components() != 1 || h_before.num_components() != 1)
    fail(ErrorKind::InvalidArgument, "bottom correction on mismatched fields");
  auto bd = b.data();
  const auto hb = h_before.data();
  const auto ha = h_after.data();
  for (size_t i = 0; i < bd.size(); ++i) bd[i] -= ha[i] - hb[i];
}

double min_checkpoint_value(const Discretization& disc, const DGField& f, int c) {
  double m = INFINITY;
  const int np = static_cast<int>(disc.pp_points.size());
  for (int k = 0; k < f.num_elements(); ++k)
    for (int q = 0; q < np; ++q) m = std::min(m, evaluate(f, k, c, &disc.pp_phi[q * disc.nb]));
  return m;
}

DGField depth_field(const DGField& u, const DGField& b) {
  DGField h(u.num_elements(), 1, u.num_basis());
  for (int k = 0; k < u.num_elements(); ++k)
    for (int j = 0; j < u.num_basis(); ++j) h(k, 0, j) = u(k, 0, j) - b(k, 0, j);
  return h;
}

}  // namespace qlmm
