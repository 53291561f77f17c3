#include "qlmm/mesh.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <map>
#include <string>
#include <utility>

#include "qlmm/error.hpp"

namespace qlmm {

const char* to_string(BoundaryKind kind) {
  switch (kind) {
    case BoundaryKind::Interior: return "interior";
    case BoundaryKind::Periodic: return "periodic";
    case BoundaryKind::Transmissive: return "transmissive";
    case BoundaryKind::Reflective: return "reflective";
  }
  return "unknown";
}

Vec2 AffineMap::to_physical(const Vec2& r) const {
  return {origin.x + e[0][0] * r.x + e[0][1] * r.y, origin.y + e[1][0] * r.x + e[1][1] * r.y};
}

Vec2 AffineMap::to_reference(const Vec2& p) const {
  const Vec2 d = p - origin;
  return {(e[1][1] * d.x - e[0][1] * d.y) / det, (-e[1][0] * d.x + e[0][0] * d.y) / det};
}

SimplicialMesh::SimplicialMesh(std::shared_ptr<const MeshTopology> topo, std::vector<Vec2> coords)
    : topo_(std::move(topo)), coords_(std::move(coords)) {
  if (!topo_) fail(ErrorKind::InvalidArgument, "mesh without topology");
  if (static_cast<int>(coords_.size()) != topo_->num_vertices())
    fail(ErrorKind::InvalidArgument, "coordinate count does not match topology");
}

SimplicialMesh SimplicialMesh::with_vertices(std::vector<Vec2> coords) const {
  return SimplicialMesh(topo_, std::move(coords));
}

std::array<Vec2, 3> SimplicialMesh::element_vertices(int k) const {
  const auto& el = topo_->elements[k];
  std::array<Vec2, 3> v{};
  for (int i = 0; i <= dim(); ++i) v[i] = coords_[el[i]];
  return v;
}

double SimplicialMesh::signed_measure(int k) const {
  const auto v = element_vertices(k);
  if (dim() == 1) return v[1].x - v[0].x;
  return 0.5 * cross(v[1] - v[0], v[2] - v[0]);
}

double SimplicialMesh::total_measure() const {
  double s = 0.0;
  for (int k = 0; k < num_elements(); ++k) s += signed_measure(k);
  return s;
}

double SimplicialMesh::min_measure() const {
  double m = INFINITY;
  for (int k = 0; k < num_elements(); ++k) m = std::min(m, signed_measure(k));
  return m;
}

double SimplicialMesh::min_height() const {
  double m = INFINITY;
  for (int k = 0; k < num_elements(); ++k) m = std::min(m, geometry(k).min_height);
  return m;
}

ElementGeometry SimplicialMesh::geometry(int k) const {
  ElementGeometry g;
  const auto v = element_vertices(k);
  g.measure = signed_measure(k);
  if (dim() == 1) {
    g.min_height = g.measure;
    g.diameter = g.measure;
    g.barycenter = {0.5 * (v[0].x + v[1].x), 0.0};
    g.normals[0] = {-1.0, 0.0};
    g.normals[1] = {1.0, 0.0};
    return g;
  }
  g.barycenter = (1.0 / 3.0) * (v[0] + v[1] + v[2]);
  double lmax = 0.0;
  for (int f = 0; f < 3; ++f) {
    const Vec2 d = v[(f + 2) % 3] - v[(f + 1) % 3];
    const double len = norm(d);
    g.face_lengths[f] = len;
    g.normals[f] = {d.y / len, -d.x / len};
    lmax = std::max(lmax, len);
  }
  g.diameter = lmax;
  g.min_height = 2.0 * g.measure / lmax;
  return g;
}

AffineMap SimplicialMesh::affine_map(int k) const {
  const auto v = element_vertices(k);
  AffineMap m;
  m.origin = v[0];
  if (dim() == 1) {
    m.e[0][0] = v[1].x - v[0].x;
    m.det = m.e[0][0];
    return m;
  }
  m.e[0][0] = v[1].x - v[0].x;
  m.e[1][0] = v[1].y - v[0].y;
  m.e[0][1] = v[2].x - v[0].x;
  m.e[1][1] = v[2].y - v[0].y;
  m.det = m.e[0][0] * m.e[1][1] - m.e[0][1] * m.e[1][0];
  return m;
}

Vec2 SimplicialMesh::face_normal(int f, double* length) const {
  const Face& face = topo_->faces[f];
  if (dim() == 1) {
    if (length) *length = 1.0;
    return face.local[0] == 0 ? Vec2{-1.0, 0.0} : Vec2{1.0, 0.0};
  }
  const Vec2 d = coords_[face.vb[0]] - coords_[face.va[0]];
  const double len = norm(d);
  if (length) *length = len;
  return {d.y / len, -d.x / len};
}

std::span<const int> SimplicialMesh::patch(int v) const {
  const int b = topo_->patch_offsets[v];
  const int e = topo_->patch_offsets[v + 1];
  return {topo_->patch_elements.data() + b, static_cast<size_t>(e - b)};
}

std::span<const int> SimplicialMesh::neighbors(int v) const {
  const int b = topo_->neighbor_offsets[v];
  const int e = topo_->neighbor_offsets[v + 1];
  return {topo_->neighbor_vertices.data() + b, static_cast<size_t>(e - b)};
}

namespace {

double signed_measure_of(int dim, const std::vector<Vec2>& x, const std::array<int, 3>& el) {
  if (dim == 1) return x[el[1]].x - x[el[0]].x;
  return 0.5 * cross(x[el[1]] - x[el[0]], x[el[2]] - x[el[0]]);
}

// Pairs vertices on the lo side of an axis with those on the hi side by the
// other coordinate.
void pair_periodic(const std::vector<Vec2>& x, const std::vector<std::uint8_t>& flags,
                   std::uint8_t lo_flag, std::uint8_t hi_flag, bool along_x, double tol,
                   std::vector<int>& partner) {
  std::vector<int> lo, hi;
  for (int i = 0; i < static_cast<int>(x.size()); ++i) {
    if (flags[i] & lo_flag) lo.push_back(i);
    if (flags[i] & hi_flag) hi.push_back(i);
  }
  auto key = [&](int i) { return along_x ? x[i].y : x[i].x; };
  auto by_key = [&](int a, int b) { return key(a) < key(b); };
  std::sort(lo.begin(), lo.end(), by_key);
  std::sort(hi.begin(), hi.end(), by_key);
  if (lo.size() != hi.size())
    fail(ErrorKind::MeshSingular, "periodic sides have different vertex counts");
  for (size_t i = 0; i < lo.size(); ++i) {
    if (std::abs(key(lo[i]) - key(hi[i])) > tol)
      fail(ErrorKind::MeshSingular, "periodic sides do not match");
    partner[lo[i]] = hi[i];
    partner[hi[i]] = lo[i];
  }
}

}  // namespace

SimplicialMesh make_mesh(int dim, const Box& domain, const BoundarySpec& bc,
                         std::vector<Vec2> x, std::vector<std::array<int, 3>> elements) {
  if (dim != 1 && dim != 2) fail(ErrorKind::InvalidArgument, "dimension must be 1 or 2");
  if (!(domain.hi.x > domain.lo.x) || (dim == 2 && !(domain.hi.y > domain.lo.y)))
    fail(ErrorKind::MeshSingular, "degenerate domain");
  const int nv = static_cast<int>(x.size());
  const int ne = static_cast<int>(elements.size());
  if (ne == 0) fail(ErrorKind::InvalidArgument, "mesh has no elements");

  auto topo = std::make_shared<MeshTopology>();
  topo->dim = dim;
  topo->domain = domain;
  topo->bc = bc;
  if (dim == 1) topo->bc.y = BoundaryKind::Transmissive;

  for (int k = 0; k < ne; ++k) {
    auto& el = elements[k];
    if (dim == 1) el[2] = -1;
    for (int i = 0; i <= dim; ++i)
      if (el[i] < 0 || el[i] >= nv)
        fail(ErrorKind::InvalidArgument, "element " + std::to_string(k) + " has a bad vertex id");
    if (!(signed_measure_of(dim, x, el) > 0.0))
      fail(ErrorKind::MeshSingular, "element " + std::to_string(k) + " is not positively oriented");
  }

  const double extent = std::max(domain.hi.x - domain.lo.x, dim == 2 ? domain.hi.y - domain.lo.y : 0.0);
  const double tol = 1e-10 * extent;
  topo->vertex_flags.assign(nv, 0);
  for (int i = 0; i < nv; ++i) {
    std::uint8_t f = 0;
    if (std::abs(x[i].x - domain.lo.x) <= tol) f |= kOnXLo;
    if (std::abs(x[i].x - domain.hi.x) <= tol) f |= kOnXHi;
    if (dim == 2) {
      if (std::abs(x[i].y - domain.lo.y) <= tol) f |= kOnYLo;
      if (std::abs(x[i].y - domain.hi.y) <= tol) f |= kOnYHi;
    }
    topo->vertex_flags[i] = f;
  }
  topo->periodic_partner_x.assign(nv, -1);
  topo->periodic_partner_y.assign(nv, -1);
  if (bc.x == BoundaryKind::Periodic)
    pair_periodic(x, topo->vertex_flags, kOnXLo, kOnXHi, true, tol, topo->periodic_partner_x);
  if (dim == 2 && bc.y == BoundaryKind::Periodic)
    pair_periodic(x, topo->vertex_flags, kOnYLo, kOnYHi, false, tol, topo->periodic_partner_y);

  topo->elements = elements;
  topo->element_faces.assign(ne, {-1, -1, -1});
  topo->element_face_side.assign(ne, {-1, -1, -1});
  auto& faces = topo->faces;

  if (dim == 1) {
    std::vector<std::array<int, 2>> at(nv, {-1, -1});  // [0]: element ending here, [1]: starting
    for (int k = 0; k < ne; ++k) {
      at[elements[k][1]][0] = k;
      at[elements[k][0]][1] = k;
    }
    int lo_elem = -1, hi_elem = -1, lo_v = -1, hi_v = -1;
    for (int v = 0; v < nv; ++v) {
      const int left = at[v][0], right = at[v][1];
      if (left >= 0 && right >= 0) {
        Face f;
        f.elem = {left, right};
        f.local = {1, 0};
        f.va = f.vb = {v, v};
        faces.push_back(f);
      } else if (right >= 0) {
        lo_elem = right;
        lo_v = v;
      } else if (left >= 0) {
        hi_elem = left;
        hi_v = v;
      }
    }
    if (lo_elem < 0 || hi_elem < 0) fail(ErrorKind::MeshSingular, "1D mesh is not a single interval");
    if (bc.x == BoundaryKind::Periodic) {
      Face f;
      f.elem = {hi_elem, lo_elem};
      f.local = {1, 0};
      f.va = f.vb = {hi_v, lo_v};
      f.kind = BoundaryKind::Periodic;
      f.shift = {domain.lo.x - domain.hi.x, 0.0};
      faces.push_back(f);
    } else {
      Face lo;
      lo.elem = {lo_elem, -1};
      lo.local = {0, -1};
      lo.va = lo.vb = {lo_v, -1};
      lo.kind = bc.x;
      faces.push_back(lo);
      Face hi;
      hi.elem = {hi_elem, -1};
      hi.local = {1, -1};
      hi.va = hi.vb = {hi_v, -1};
      hi.kind = bc.x;
      faces.push_back(hi);
    }
  } else {
    std::map<std::pair<int, int>, int> edge_face;
    std::vector<int> boundary;
    for (int k = 0; k < ne; ++k) {
      const auto& el = elements[k];
      for (int lf = 0; lf < 3; ++lf) {
        const int a = el[(lf + 1) % 3], b = el[(lf + 2) % 3];
        const auto key = std::minmax(a, b);
        auto it = edge_face.find(key);
        if (it == edge_face.end()) {
          Face f;
          f.elem = {k, -1};
          f.local = {lf, -1};
          f.va = {a, -1};
          f.vb = {b, -1};
          edge_face.emplace(key, static_cast<int>(faces.size()));
          faces.push_back(f);
        } else {
          Face& f = faces[it->second];
          if (f.elem[1] >= 0) fail(ErrorKind::MeshSingular, "edge shared by more than two elements");
          f.elem[1] = k;
          f.local[1] = lf;
          f.va[1] = f.va[0];
          f.vb[1] = f.vb[0];
          f.reversed[1] = (f.va[0] == el[(lf + 2) % 3]);
        }
      }
    }
    // Boundary faces: classify by side and pair periodic ones.
    std::vector<Face> kept;
    std::vector<int> xlo, xhi, ylo, yhi;
    for (auto& f : faces) {
      if (f.elem[1] >= 0) {
        kept.push_back(f);
        continue;
      }
      const std::uint8_t common = topo->vertex_flags[f.va[0]] & topo->vertex_flags[f.vb[0]];
      const int id = static_cast<int>(kept.size());
      if (common & kOnXLo) {
        f.kind = bc.x;
        xlo.push_back(id);
      } else if (common & kOnXHi) {
        f.kind = bc.x;
        xhi.push_back(id);
      } else if (common & kOnYLo) {
        f.kind = bc.y;
        ylo.push_back(id);
      } else if (common & kOnYHi) {
        f.kind = bc.y;
        yhi.push_back(id);
      } else {
        fail(ErrorKind::MeshSingular, "boundary edge not on the domain boundary");
      }
      kept.push_back(f);
    }
    std::vector<bool> drop(kept.size(), false);
    auto merge = [&](const std::vector<int>& lo_faces, const std::vector<int>& hi_faces,
                     const std::vector<int>& partner, Vec2 shift) {
      std::map<std::pair<int, int>, int> lo_by_edge;
      for (int id : lo_faces) lo_by_edge[std::minmax(kept[id].va[0], kept[id].vb[0])] = id;
      for (int id : hi_faces) {
        Face& f = kept[id];
        const int a = partner[f.va[0]], b = partner[f.vb[0]];
        auto it = (a < 0 || b < 0) ? lo_by_edge.end() : lo_by_edge.find(std::minmax(a, b));
        if (it == lo_by_edge.end()) fail(ErrorKind::MeshSingular, "unmatched periodic edge");
        const Face& g = kept[it->second];
        f.elem[1] = g.elem[0];
        f.local[1] = g.local[0];
        f.va[1] = a;
        f.vb[1] = b;
        f.reversed[1] = (a == elements[g.elem[0]][(g.local[0] + 2) % 3]);
        f.kind = BoundaryKind::Periodic;
        f.shift = shift;
        drop[it->second] = true;
      }
    };
    if (bc.x == BoundaryKind::Periodic)
      merge(xlo, xhi, topo->periodic_partner_x, {domain.lo.x - domain.hi.x, 0.0});
    if (bc.y == BoundaryKind::Periodic)
      merge(ylo, yhi, topo->periodic_partner_y, {0.0, domain.lo.y - domain.hi.y});
    faces.clear();
    for (size_t i = 0; i < kept.size(); ++i)
      if (!drop[i]) faces.push_back(kept[i]);
  }

  for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
    for (int s = 0; s < 2; ++s) {
      if (faces[f].elem[s] < 0) continue;
      topo->element_faces[faces[f].elem[s]][faces[f].local[s]] = f;
      topo->element_face_side[faces[f].elem[s]][faces[f].local[s]] = s;
    }
  }
  for (int k = 0; k < ne; ++k)
    for (int lf = 0; lf <= dim; ++lf)
      if (topo->element_faces[k][lf] < 0) fail(ErrorKind::MeshSingular, "element face without a face record");

  // Vertex patches and vertex adjacency.
  topo->patch_offsets.assign(nv + 1, 0);
  for (const auto& el : elements)
    for (int i = 0; i <= dim; ++i) ++topo->patch_offsets[el[i] + 1];
  for (int v = 0; v < nv; ++v) topo->patch_offsets[v + 1] += topo->patch_offsets[v];
  topo->patch_elements.resize(topo->patch_offsets[nv]);
  topo->patch_local.resize(topo->patch_offsets[nv]);
  {
    std::vector<int> fill(topo->patch_offsets.begin(), topo->patch_offsets.end() - 1);
    for (int k = 0; k < ne; ++k)
      for (int i = 0; i <= dim; ++i) {
        const int v = elements[k][i];
        topo->patch_elements[fill[v]] = k;
        topo->patch_local[fill[v]] = i;
        ++fill[v];
      }
  }
  std::vector<std::vector<int>> adj(nv);
  for (const auto& el : elements)
    for (int i = 0; i <= dim; ++i)
      for (int j = 0; j <= dim; ++j)
        if (i != j) adj[el[i]].push_back(el[j]);
  topo->neighbor_offsets.assign(nv + 1, 0);
  for (int v = 0; v < nv; ++v) {
    auto& a = adj[v];
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    topo->neighbor_offsets[v + 1] = topo->neighbor_offsets[v] + static_cast<int>(a.size());
    topo->neighbor_vertices.insert(topo->neighbor_vertices.end(), a.begin(), a.end());
  }

  return SimplicialMesh(std::move(topo), std::move(x));
}

SimplicialMesh build_uniform_mesh_1d(double a, double b, int n, BoundaryKind kind) {
  if (n < 1) fail(ErrorKind::InvalidConfig, "element count must be at least 1");
  if (!(b > a)) fail(ErrorKind::MeshSingular, "degenerate interval");
  std::vector<Vec2> x(n + 1);
  for (int i = 0; i <= n; ++i) x[i] = {i == n ? b : a + (b - a) * i / n, 0.0};
  std::vector<std::array<int, 3>> el(n);
  for (int i = 0; i < n; ++i) el[i] = {i, i + 1, -1};
  return make_mesh(1, Box{{a, 0.0}, {b, 0.0}}, BoundarySpec{kind, BoundaryKind::Transmissive},
                   std::move(x), std::move(el));
}

SimplicialMesh build_uniform_mesh_2d(const Box& d, int nx, int ny, const BoundarySpec& bc) {
  if (nx < 1 || ny < 1) fail(ErrorKind::InvalidConfig, "cell counts must be at least 1");
  const long long cells = static_cast<long long>(nx) * ny;
  if (cells > (INT_MAX - 1) / 4 || static_cast<long long>(nx + 1) * (ny + 1) + cells > INT_MAX)
    fail(ErrorKind::OutOfRange, "mesh too large");
  if (!(d.hi.x > d.lo.x) || !(d.hi.y > d.lo.y)) fail(ErrorKind::MeshSingular, "degenerate domain");
  const int nc = (nx + 1) * (ny + 1);
  std::vector<Vec2> x(nc + nx * ny);
  auto xc = [&](int i) { return i == nx ? d.hi.x : d.lo.x + (d.hi.x - d.lo.x) * i / nx; };
  auto yc = [&](int j) { return j == ny ? d.hi.y : d.lo.y + (d.hi.y - d.lo.y) * j / ny; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) x[j * (nx + 1) + i] = {xc(i), yc(j)};
  std::vector<std::array<int, 3>> el;
  el.reserve(4 * nx * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int c00 = j * (nx + 1) + i, c10 = c00 + 1, c01 = c00 + nx + 1, c11 = c01 + 1;
      const int m = nc + j * nx + i;
      x[m] = {0.5 * (xc(i) + xc(i + 1)), 0.5 * (yc(j) + yc(j + 1))};
      el.push_back({c00, c10, m});
      el.push_back({c10, c11, m});
      el.push_back({c11, c01, m});
      el.push_back({c01, c00, m});
    }
  return make_mesh(2, d, bc, std::move(x), std::move(el));
}

MeshMotion MeshMotion::fixed(const SimplicialMesh& mesh, double t0, double dt) {
  return MeshMotion{mesh, mesh, std::vector<Vec2>(mesh.num_vertices()), t0, dt};
}

MeshMotion MeshMotion::from_velocity(const SimplicialMesh& start, std::vector<Vec2> velocity,
                                     double t0, double dt) {
  std::vector<Vec2> x(start.vertices().begin(), start.vertices().end());
  for (size_t i = 0; i < x.size(); ++i) x[i] += dt * velocity[i];
  return MeshMotion{start, start.with_vertices(std::move(x)), std::move(velocity), t0, dt};
}

SimplicialMesh MeshMotion::at(double t) const {
  const double eps = 1e-12 * std::max(1.0, std::abs(t0) + std::abs(dt));
  if (t < t0 - eps || t > t0 + dt + eps)
    fail(ErrorKind::OutOfRange, "time outside the step interval");
  if (t == t0) return start;
  if (t == t0 + dt) return end;
  // Linear vertex paths: x(t) = x^n + (t - t_n) Xdot.
  const double s = t - t0;
  std::vector<Vec2> x(start.vertices().begin(), start.vertices().end());
  for (size_t i = 0; i < x.size(); ++i) x[i] += s * velocity[i];
  return start.with_vertices(std::move(x));
}

Vec2 mesh_velocity(const SimplicialMesh& mesh, std::span<const Vec2> vel, int k, const Vec2& ref) {
  const Vec2 r{std::clamp(ref.x, 0.0, 1.0), std::clamp(ref.y, 0.0, 1.0)};
  return interpolate_vertex_field(vel, mesh.topology().elements[k], r, mesh.dim());
}

double velocity_divergence(const SimplicialMesh& mesh, std::span<const Vec2> vel, int k) {
  if (vel.empty()) return 0.0;
  return measure_rate(mesh, vel, k) / mesh.signed_measure(k);
}

double measure_rate(const SimplicialMesh& mesh, std::span<const Vec2> vel, int k) {
  const auto& el = mesh.topology().elements[k];
  if (mesh.dim() == 1) return vel[el[1]].x - vel[el[0]].x;
  const Vec2 e1 = mesh.vertex(el[1]) - mesh.vertex(el[0]);
  const Vec2 e2 = mesh.vertex(el[2]) - mesh.vertex(el[0]);
  const Vec2 d1 = vel[el[1]] - vel[el[0]];
  const Vec2 d2 = vel[el[2]] - vel[el[0]];
  return 0.5 * (cross(d1, e2) + cross(e1, d2));
}

double min_measure_along_path(const SimplicialMesh& start, const SimplicialMesh& end, int k) {
  const double a0 = start.signed_measure(k);
  const double a1 = end.signed_measure(k);
  if (start.dim() == 1) return std::min(a0, a1);
  const auto& el = start.topology().elements[k];
  const Vec2 e1 = start.vertex(el[1]) - start.vertex(el[0]);
  const Vec2 e2 = start.vertex(el[2]) - start.vertex(el[0]);
  const Vec2 d1 = (end.vertex(el[1]) - end.vertex(el[0])) - e1;
  const Vec2 d2 = (end.vertex(el[2]) - end.vertex(el[0])) - e2;
  // A(s) = a0 + b s + c s^2
  const double b = 0.5 * (cross(d1, e2) + cross(e1, d2));
  const double c = 0.5 * cross(d1, d2);
  double m = std::min(a0, a1);
  if (c > 0.0) {
    const double s = -b / (2.0 * c);
    if (s > 0.0 && s < 1.0) m = std::min(m, a0 + b * s + c * s * s);
  }
  return m;
}

}  // namespace qlmm
