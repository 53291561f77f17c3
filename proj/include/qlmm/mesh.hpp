#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "qlmm/vec2.hpp"

namespace qlmm {

enum class BoundaryKind { Interior, Periodic, Transmissive, Reflective };

const char* to_string(BoundaryKind kind);

// Axis-aligned domain. For 1D meshes only the x components are used.
struct Box {
  Vec2 lo;
  Vec2 hi;
};

// One boundary kind per axis, applied on both of its sides.
struct BoundarySpec {
  BoundaryKind x = BoundaryKind::Transmissive;
  BoundaryKind y = BoundaryKind::Transmissive;
};

enum VertexFlag : std::uint8_t {
  kOnXLo = 1,
  kOnXHi = 2,
  kOnYLo = 4,
  kOnYHi = 8,
};

// A face shared by up to two elements. Side 0 owns the orientation: the
// face normal points out of elem[0] and the edge is traversed from va[0] to
// vb[0]. va[1]/vb[1] are the matching vertices seen from side 1 (for a
// periodic face they are the translated copies, x_side1 = x_side0 + shift).
struct Face {
  std::array<int, 2> elem{-1, -1};
  std::array<int, 2> local{-1, -1};
  std::array<int, 2> va{-1, -1};
  std::array<int, 2> vb{-1, -1};
  // True when the side traverses the edge against its element's local
  // ordering (local vertex (f+1) -> (f+2)).
  std::array<bool, 2> reversed{false, false};
  BoundaryKind kind = BoundaryKind::Interior;
  Vec2 shift;

  bool has_neighbor() const { return elem[1] >= 0; }
};

struct MeshTopology {
  int dim = 1;
  Box domain;
  BoundarySpec bc;
  std::vector<std::array<int, 3>> elements;  // 1D uses the first two entries
  std::vector<Face> faces;
  std::vector<std::array<int, 3>> element_faces;
  std::vector<std::array<int, 3>> element_face_side;
  std::vector<std::uint8_t> vertex_flags;
  std::vector<int> periodic_partner_x;  // -1 when the vertex has none
  std::vector<int> periodic_partner_y;
  std::vector<int> patch_offsets;  // vertex -> incident (element, local vertex)
  std::vector<int> patch_elements;
  std::vector<int> patch_local;
  std::vector<int> neighbor_offsets;  // vertex -> vertices sharing an edge
  std::vector<int> neighbor_vertices;

  int num_vertices() const { return static_cast<int>(vertex_flags.size()); }
  int num_elements() const { return static_cast<int>(elements.size()); }
  int vertices_per_element() const { return dim + 1; }
};

struct AffineMap {
  Vec2 origin;
  double e[2][2] = {{1, 0}, {0, 1}};  // columns are edge vectors
  double det = 1.0;

  Vec2 to_physical(const Vec2& ref) const;
  Vec2 to_reference(const Vec2& phys) const;
};

struct ElementGeometry {
  double measure = 0.0;
  double min_height = 0.0;  // a_K
  double diameter = 0.0;
  Vec2 barycenter;
  std::array<Vec2, 3> normals;  // outward, by local face
  std::array<double, 3> face_lengths{1.0, 1.0, 1.0};
};

class SimplicialMesh {
 public:
  SimplicialMesh() = default;
  SimplicialMesh(std::shared_ptr<const MeshTopology> topo, std::vector<Vec2> coords);

  int dim() const { return topo_->dim; }
  int num_elements() const { return topo_->num_elements(); }
  int num_vertices() const { return topo_->num_vertices(); }
  const MeshTopology& topology() const { return *topo_; }
  const std::shared_ptr<const MeshTopology>& topology_ptr() const { return topo_; }
  std::span<const Vec2> vertices() const { return coords_; }
  const Vec2& vertex(int i) const { return coords_[i]; }

  // Same connectivity, new coordinates.
  SimplicialMesh with_vertices(std::vector<Vec2> coords) const;

  std::array<Vec2, 3> element_vertices(int k) const;
  double signed_measure(int k) const;
  double total_measure() const;
  double min_measure() const;
  double min_height() const;
  ElementGeometry geometry(int k) const;
  AffineMap affine_map(int k) const;
  // Outward normal and length of a face as seen from side 0.
  Vec2 face_normal(int f, double* length = nullptr) const;

  std::span<const int> patch(int v) const;
  std::span<const int> neighbors(int v) const;

 private:
  std::shared_ptr<const MeshTopology> topo_;
  std::vector<Vec2> coords_;
};

// Builds topology (faces, periodic pairing, patches) for a conforming mesh.
// Elements must be positively oriented.
SimplicialMesh make_mesh(int dim, const Box& domain, const BoundarySpec& bc,
                         std::vector<Vec2> vertices,
                         std::vector<std::array<int, 3>> elements);

SimplicialMesh build_uniform_mesh_1d(double a, double b, int n, BoundaryKind kind);

// nx*ny rectangles, each split into four triangles through its center.
SimplicialMesh build_uniform_mesh_2d(const Box& domain, int nx, int ny,
                                     const BoundarySpec& bc);

// Mesh motion over one time step: linear vertex paths from start to end.
struct MeshMotion {
  SimplicialMesh start;
  SimplicialMesh end;
  std::vector<Vec2> velocity;
  double t0 = 0.0;
  double dt = 0.0;

  static MeshMotion fixed(const SimplicialMesh& mesh, double t0, double dt);
  static MeshMotion from_velocity(const SimplicialMesh& start, std::vector<Vec2> velocity,
                                  double t0, double dt);

  SimplicialMesh at(double t) const;
};

// Piecewise-linear vertex field at a reference point of an element.
inline Vec2 interpolate_vertex_field(std::span<const Vec2> field, const std::array<int, 3>& el, const Vec2& ref,
                                     int dim) {
  if (field.empty()) return {};
  if (dim == 1) return (1.0 - ref.x) * field[el[0]] + ref.x * field[el[1]];
  return (1.0 - ref.x - ref.y) * field[el[0]] + ref.x * field[el[1]] + ref.y * field[el[2]];
}

// Mesh velocity Xdot at reference point `ref` of element k; zero for an
// empty velocity array.
Vec2 mesh_velocity(const SimplicialMesh& mesh, std::span<const Vec2> velocity, int k, const Vec2& ref);
// div(Xdot) on element k (constant per element).
double velocity_divergence(const SimplicialMesh& mesh, std::span<const Vec2> velocity, int k);

// Rate of change of the element measure, d|K|/dt, for vertex velocities.
double measure_rate(const SimplicialMesh& mesh, std::span<const Vec2> velocity, int k);

// Smallest value of the signed measure along the linear path
// x(s) = start + s*(end - start), s in [0, 1].
double min_measure_along_path(const SimplicialMesh& start, const SimplicialMesh& end, int k);

}  // namespace qlmm
