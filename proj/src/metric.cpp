#include "qlmm/metric.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "qlmm/error.hpp"

namespace qlmm {

double det_d(const Mat2& m, int dim) { return dim == 1 ? m(0, 0) : m.determinant(); }

double trace_d(const Mat2& m, int dim) { return dim == 1 ? m(0, 0) : m.trace(); }

Mat2 identity_d(int /*dim*/) { return Mat2::Identity(); }

Mat2 spectral_abs(const Mat2& h, int dim) {
  if (dim == 1) {
    Mat2 r = Mat2::Identity();
    r(0, 0) = std::abs(h(0, 0));
    return r;
  }
  Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (h + h.transpose()));
  return es.eigenvectors() * es.eigenvalues().cwiseAbs().asDiagonal() * es.eigenvectors().transpose();
}

namespace {

// Quadratic least-squares fit at one vertex; returns false if the stencil is
// rank deficient.
bool fit_hessian(const SimplicialMesh& mesh, std::span<const double> q, int i,
                 const std::vector<int>& stencil, Mat2& out) {
  const int dim = mesh.dim();
  const int nu = dim == 1 ? 3 : 6;
  const int ns = static_cast<int>(stencil.size());
  if (ns < nu) return false;
  const Vec2 xi = mesh.vertex(i);
  double scale = 0.0;
  for (int j : stencil) scale = std::max(scale, norm(mesh.vertex(j) - xi));
  if (scale <= 0.0) return false;
  Eigen::MatrixXd a(ns, nu);
  Eigen::VectorXd rhs(ns);
  for (int r = 0; r < ns; ++r) {
    const Vec2 d = (1.0 / scale) * (mesh.vertex(stencil[r]) - xi);
    if (dim == 1) {
      a.row(r) << 1.0, d.x, 0.5 * d.x * d.x;
    } else {
      a.row(r) << 1.0, d.x, d.y, 0.5 * d.x * d.x, d.x * d.y, 0.5 * d.y * d.y;
    }
    rhs[r] = q[stencil[r]];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < nu) return false;
  const Eigen::VectorXd c = qr.solve(rhs);
  const double s2 = 1.0 / (scale * scale);
  out = Mat2::Identity();
  if (dim == 1) {
    out(0, 0) = c[2] * s2;
  } else {
    out << c[3] * s2, c[4] * s2, c[4] * s2, c[5] * s2;
  }
  return true;
}

std::vector<int> grow(const SimplicialMesh& mesh, const std::vector<int>& set) {
  std::set<int> s(set.begin(), set.end());
  for (int v : set)
    for (int n : mesh.neighbors(v)) s.insert(n);
  return {s.begin(), s.end()};
}

}  // namespace

std::vector<Mat2> recover_vertex_hessians(const SimplicialMesh& mesh, std::span<const double> q) {
  const int nv = mesh.num_vertices();
  if (static_cast<int>(q.size()) != nv) fail(ErrorKind::InvalidArgument, "nodal field size mismatch");
  for (double x : q)
    if (!std::isfinite(x)) fail(ErrorKind::AdaptationInput, "non-finite nodal value");
  std::vector<Mat2> h(nv, Mat2::Zero());
  int deficient = 0;
#pragma omp parallel for reduction(+ : deficient)
  for (int i = 0; i < nv; ++i) {
    std::vector<int> st = grow(mesh, grow(mesh, {i}));
    Mat2 hi;
    bool ok = fit_hessian(mesh, q, i, st, hi);
    if (!ok) {
      st = grow(mesh, st);
      ok = fit_hessian(mesh, q, i, st, hi);
    }
    if (ok) {
      h[i] = hi;
    } else {
      h[i] = Mat2::Zero();
      if (mesh.dim() == 1) h[i](1, 1) = 0.0;
      ++deficient;
    }
    if (mesh.dim() == 1) {
      h[i](0, 1) = h[i](1, 0) = 0.0;
      h[i](1, 1) = 0.0;
    }
  }
  if (deficient > 0 && deficient == nv)
    fail(ErrorKind::AdaptationInput, "every Hessian recovery stencil is rank deficient");
  return h;
}

std::vector<Mat2> recover_hessian(const SimplicialMesh& mesh, std::span<const double> q) {
  const auto hv = recover_vertex_hessians(mesh, q);
  const auto& topo = mesh.topology();
  std::vector<Mat2> h(mesh.num_elements(), Mat2::Zero());
  for (int k = 0; k < mesh.num_elements(); ++k) {
    for (int l = 0; l <= mesh.dim(); ++l) h[k] += hv[topo.elements[k][l]];
    h[k] /= (mesh.dim() + 1);
  }
  return h;
}

double metric_alpha(const SimplicialMesh& mesh, const std::vector<Mat2>& abs_h, double rtol) {
  const int d = mesh.dim();
  const double e = 2.0 / (d + 4.0);
  const int ne = mesh.num_elements();
  double rhs = 0.0, fallback = 0.0;
  for (int k = 0; k < ne; ++k) {
    const double a = mesh.signed_measure(k);
    rhs += a * std::pow(std::max(0.0, det_d(abs_h[k], d)), e);
    fallback += a * std::pow(std::max(0.0, trace_d(abs_h[k], d) / d), d * e);
  }
  rhs *= 2.0;
  // Degenerate (e.g. one-directional) Hessians make the determinant sum
  // vanish; use the trace-based surrogate instead.
  if (!(rhs > 0.0)) rhs = 2.0 * fallback;
  if (!(rhs > 0.0)) return 0.0;
  auto lhs = [&](double alpha) {
    double s = 0.0;
    for (int k = 0; k < ne; ++k) {
      Mat2 m = abs_h[k];
      m(0, 0) += alpha;
      if (d == 2) m(1, 1) += alpha;
      s += mesh.signed_measure(k) * std::pow(det_d(m, d), e);
    }
    return s;
  };
  double lo = 0.0, hi = 1.0;
  for (int k = 0; k < ne; ++k) hi = std::max(hi, trace_d(abs_h[k], d));
  int guard = 0;
  while (lhs(hi) < rhs) {
    hi *= 2.0;
    if (++guard > 200) fail(ErrorKind::Nonconvergence, "metric regularization bracket not found");
  }
  for (int it = 0; it < 400 && hi - lo > rtol * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (lhs(mid) < rhs ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<Mat2> metric_from_hessian(const SimplicialMesh& mesh, const std::vector<Mat2>& hessians) {
  const int d = mesh.dim();
  const int ne = mesh.num_elements();
  if (static_cast<int>(hessians.size()) != ne) fail(ErrorKind::InvalidArgument, "Hessian count mismatch");
  std::vector<Mat2> abs_h(ne);
  bool all_zero = true;
  for (int k = 0; k < ne; ++k) {
    if (!hessians[k].allFinite()) fail(ErrorKind::AdaptationInput, "non-finite Hessian");
    abs_h[k] = spectral_abs(hessians[k], d);
    if (d == 1) abs_h[k](1, 1) = 0.0;
    if (trace_d(abs_h[k], d) > 0.0) all_zero = false;
  }
  std::vector<Mat2> m(ne, Mat2::Identity());
  if (all_zero) return m;
  const double alpha = metric_alpha(mesh, abs_h);
  for (int k = 0; k < ne; ++k) {
    Mat2 a = abs_h[k];
    a(0, 0) += alpha;
    if (d == 2) a(1, 1) += alpha;
    if (d == 1) a(1, 1) = 1.0;
    const double det = det_d(a, d);
    m[k] = std::pow(det, -1.0 / (d + 4.0)) * a;
    if (d == 1) m[k](1, 1) = 1.0;
  }
  return m;
}

Mat2 intersect_metrics(const Mat2& a, const Mat2& b, int dim) {
  if (dim == 1) {
    Mat2 r = Mat2::Identity();
    r(0, 0) = std::max(a(0, 0), b(0, 0));
    return r;
  }
  Eigen::LLT<Mat2> llt(a);
  if (llt.info() != Eigen::Success) fail(ErrorKind::AdaptationInput, "metric is not SPD");
  const Mat2 l = llt.matrixL();
  const Mat2 li = l.inverse();
  const Mat2 c = li * b * li.transpose();
  Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (c + c.transpose()));
  const Eigen::Vector2d lam = es.eigenvalues().cwiseMax(1.0);
  const Mat2 r = l * es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose() * l.transpose();
  return 0.5 * (r + r.transpose());
}

Mat2 cap_metric(const Mat2& m, double beta, int dim) {
  const double t = trace_d(m, dim) / beta;
  Mat2 r = m / std::sqrt(1.0 + t * t);
  if (dim == 1) {
    r(1, 1) = 1.0;
    r(0, 1) = r(1, 0) = 0.0;
  }
  return r;
}

double energy_quantity(const State& s, double h, const PhysicsParams& p) {
  const double u = desingularized_velocity(s.m, h, p.h_dry);
  const double v = desingularized_velocity(s.w, h, p.h_dry);
  return 0.5 * (u * u + v * v) + p.g * s.eta;
}

double depth_quantity(const State&, double h, const PhysicsParams&) { return h; }

std::vector<double> nodal_values(const Discretization& disc, const SimplicialMesh& mesh,
                                 const DGField& u, const DGField& b,
                                 double (*quantity)(const State&, double, const PhysicsParams&),
                                 const PhysicsParams& p) {
  const auto& topo = mesh.topology();
  const int nv = mesh.num_vertices();
  std::vector<double> out(nv, 0.0);
  for (int v = 0; v < nv; ++v) {
    const int beg = topo.patch_offsets[v], end = topo.patch_offsets[v + 1];
    double s = 0.0;
    for (int e = beg; e < end; ++e) {
      const int k = topo.patch_elements[e];
      const double* phi = disc.vertex_phi[topo.patch_local[e]].data();
      const auto val = evaluate(u, k, phi);
      const State st{val[0], val[1], disc.dim == 2 ? val[2] : 0.0};
      const double h = st.eta - evaluate(b, k, 0, phi);
      s += quantity(st, h, p);
    }
    out[v] = s / (end - beg);
    if (!std::isfinite(out[v])) fail(ErrorKind::AdaptationInput, "non-finite solution value at a vertex");
  }
  return out;
}

MetricField smooth_metric(const SimplicialMesh& mesh, const std::vector<Mat2>& em, int sweeps) {
  const auto& topo = mesh.topology();
  const int nv = mesh.num_vertices();
  const int d = mesh.dim();
  MetricField out;
  out.vertex.assign(nv, Mat2::Zero());
  for (int v = 0; v < nv; ++v) {
    double area = 0.0;
    for (int e = topo.patch_offsets[v]; e < topo.patch_offsets[v + 1]; ++e) {
      const int k = topo.patch_elements[e];
      const double a = mesh.signed_measure(k);
      out.vertex[v] += a * em[k];
      area += a;
    }
    out.vertex[v] /= area;
  }
  for (int s = 0; s < sweeps; ++s) {
    std::vector<Mat2> next(nv);
    for (int v = 0; v < nv; ++v) {
      Mat2 acc = out.vertex[v];
      const auto nb = mesh.neighbors(v);
      for (int n : nb) acc += out.vertex[n];
      next[v] = acc / (1.0 + nb.size());
    }
    out.vertex = std::move(next);
  }
  out.element.assign(mesh.num_elements(), Mat2::Zero());
  for (int k = 0; k < mesh.num_elements(); ++k) {
    for (int l = 0; l <= d; ++l) out.element[k] += out.vertex[topo.elements[k][l]];
    out.element[k] /= (d + 1);
  }
  return out;
}

MetricField build_adaptation_metric(const Discretization& disc, const SimplicialMesh& mesh,
                                    const DGField& u, const DGField& b, const PhysicsParams& p,
                                    const MetricOptions& opt) {
  const int d = mesh.dim();
  const int ne = mesh.num_elements();
  const Box& dom = mesh.topology().domain;
  const double len = std::max(dom.hi.x - dom.lo.x, d == 2 ? dom.hi.y - dom.lo.y : 0.0);

  auto metric_of = [&](const std::vector<double>& q) {
    auto h = recover_hessian(mesh, q);
    // Hessians at round-off level (e.g. a flat field) are treated as zero.
    double qmax = 0.0, hmax = 0.0;
    for (double x : q) qmax = std::max(qmax, std::abs(x));
    for (const auto& m : h) hmax = std::max(hmax, m.cwiseAbs().maxCoeff());
    if (hmax <= 1e-8 * (qmax + 1.0) / (len * len))
      for (auto& m : h) m.setZero();
    auto m = metric_from_hessian(mesh, h);
    double norm = 0.0;
    for (const auto& x : m) norm = std::max(norm, d == 1 ? std::abs(x(0, 0)) : x.cwiseAbs().maxCoeff());
    for (auto& x : m) {
      x /= norm;
      if (d == 1) x(1, 1) = 1.0;
    }
    return m;
  };

  const auto me = metric_of(nodal_values(disc, mesh, u, b, energy_quantity, p));
  const auto mh = metric_of(nodal_values(disc, mesh, u, b, depth_quantity, p));
  std::vector<Mat2> m(ne);
  for (int k = 0; k < ne; ++k) {
    Mat2 scaled = opt.delta * mh[k];
    if (d == 1) scaled(1, 1) = 1.0;
    m[k] = cap_metric(intersect_metrics(me[k], scaled, d), opt.beta, d);
  }
  return smooth_metric(mesh, m, opt.smoothing_sweeps);
}

}  // namespace qlmm
