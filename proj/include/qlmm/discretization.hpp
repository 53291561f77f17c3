#pragma once

#include <array>
#include <vector>

#include "qlmm/basis.hpp"
#include "qlmm/quadrature.hpp"
#include "qlmm/vec2.hpp"

namespace qlmm {

// Precomputed reference tables for one (dimension, degree) pair. Tables are
// row-major [point][mode].
struct Discretization {
  Discretization(int dim, int degree);

  int dim;
  int degree;
  int nb;                  // number of modes
  double ref_measure;      // |K^|
  double phi0;             // value of mode 0
  ReferenceBasis basis;

  QuadratureRule volume;
  QuadratureRule face;     // on [0,1]; a single unit-weight point in 1D
  std::vector<double> vol_phi;
  std::vector<Vec2> vol_dphi;

  // Face tables indexed by local face and orientation (reversed or not).
  std::array<std::array<std::vector<Vec2>, 2>, 3> face_points;
  std::array<std::array<std::vector<double>, 2>, 3> face_phi;

  std::vector<Vec2> pp_points;    // positivity check points
  std::vector<double> pp_phi;
  std::vector<Vec2> sample_points;  // 21 error-sampling points
  std::vector<double> sample_phi;
  std::array<std::vector<double>, 3> vertex_phi;    // at reference vertices
  std::array<std::vector<double>, 3> midpoint_phi;  // at face midpoints

  int num_faces() const { return dim + 1; }
  static std::array<Vec2, 3> reference_vertices();
  Vec2 face_reference_point(int local_face, bool reversed, double s) const;
  std::vector<double> phi_at(const Vec2& ref) const;
};

}  // namespace qlmm
