#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "qlmm/dg_field.hpp"
#include "qlmm/discretization.hpp"
#include "qlmm/mesh.hpp"
#include "qlmm/swe_physics.hpp"

namespace qlmm {

// Symmetric tensors are stored as 2x2 matrices. In 1D only entry (0,0) is
// meaningful; (1,1) is kept at 1 and the off-diagonals at 0.
using Mat2 = Eigen::Matrix2d;

double det_d(const Mat2& m, int dim);
double trace_d(const Mat2& m, int dim);
Mat2 identity_d(int dim);
Mat2 spectral_abs(const Mat2& h, int dim);

// Least-squares quadratic fit over each vertex's patch-of-patches; returns
// the per-vertex Hessians.
std::vector<Mat2> recover_vertex_hessians(const SimplicialMesh& mesh, std::span<const double> nodal);
// Element Hessian = average of its vertex Hessians.
std::vector<Mat2> recover_hessian(const SimplicialMesh& mesh, std::span<const double> nodal);

// alpha solving sum |K| det(alpha I + |H_K|)^{2/(d+4)} = 2 sum |K| det(|H_K|)^{2/(d+4)}.
// `abs_h` must already be spectral absolute values.
double metric_alpha(const SimplicialMesh& mesh, const std::vector<Mat2>& abs_h, double rtol = 1e-13);

// M_K = det(alpha I + |H_K|)^{-1/(d+4)} (alpha I + |H_K|); identity if all
// Hessians vanish.
std::vector<Mat2> metric_from_hessian(const SimplicialMesh& mesh, const std::vector<Mat2>& hessians);

// Smallest SPD tensor dominating both (simultaneous diagonalization).
Mat2 intersect_metrics(const Mat2& a, const Mat2& b, int dim);
// M / sqrt(1 + (tr M / beta)^2); eigenvalues end up <= beta.
Mat2 cap_metric(const Mat2& m, double beta, int dim);

struct MetricOptions {
  double delta = 0.1;  // weight of the depth metric in the intersection
  double beta = 1000.0;
  int smoothing_sweeps = 2;
};

struct MetricField {
  std::vector<Mat2> element;
  std::vector<Mat2> vertex;
};

// Vertex values of a per-point quantity, averaged over incident elements.
std::vector<double> nodal_values(const Discretization& disc, const SimplicialMesh& mesh,
                                 const DGField& u, const DGField& b,
                                 double (*quantity)(const State&, double h, const PhysicsParams&),
                                 const PhysicsParams& p);

double energy_quantity(const State& s, double h, const PhysicsParams& p);
double depth_quantity(const State& s, double h, const PhysicsParams& p);

// Metric from the energy E = (u^2+v^2)/2 + g*eta and the depth h.
MetricField build_adaptation_metric(const Discretization& disc, const SimplicialMesh& mesh,
                                    const DGField& u, const DGField& b, const PhysicsParams& p,
                                    const MetricOptions& opt = {});

// Nodal averaging, smoothing and element averaging of element metrics.
MetricField smooth_metric(const SimplicialMesh& mesh, const std::vector<Mat2>& element_metric,
                          int sweeps);

}  // namespace qlmm
