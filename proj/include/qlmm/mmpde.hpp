#pragma once

#include <span>
#include <vector>

#include "qlmm/mesh.hpp"
#include "qlmm/metric.hpp"

namespace qlmm {

struct MoverOptions {
  double tau_factor = 0.1;          // tau = tau_factor * N^{-1/d}
  double max_move_fraction = 0.2;   // per substep, of the smallest incident height
  int max_retries = 10;
  // explicit substeps are capped at stability_fraction / (largest Jacobian
  // eigenvalue), estimated with this many power iterations
  double stability_fraction = 0.9;
  int stiffness_iterations = 12;
  int max_substeps = 20000;
};

struct MoveDiagnostics {
  double energy_start = 0.0;
  double energy_end = 0.0;
  double max_displacement = 0.0;
  double min_area = 0.0;
  int substeps = 0;
  int retries = 0;
  bool moved = true;
};

// Energy I_h of the physical mesh against computational vertices xi.
double mesh_energy(const SimplicialMesh& physical, std::span<const Vec2> xi,
                   const std::vector<Mat2>& element_metric);

// dI_h/dxi_i for every vertex, from the local-velocity assembly.
std::vector<Vec2> energy_gradient(const SimplicialMesh& physical, std::span<const Vec2> xi,
                                  const std::vector<Mat2>& element_metric);

double default_tau(const SimplicialMesh& mesh, double factor = 0.1);

// dxi_i/dt = det(M(x_i))^{1/2}/tau * sum_K |K| v^K_{i_K}, with boundary
// constraints applied.
std::vector<Vec2> nodal_mesh_velocities(const SimplicialMesh& physical, std::span<const Vec2> xi,
                                        const MetricField& metric, double tau);

// Removes the boundary-normal components, pins corners and keeps periodic
// vertex pairs in step.
void constrain_boundary_velocities(const MeshTopology& topo, std::vector<Vec2>& vel);

struct MoveResult {
  SimplicialMesh mesh;
  MoveDiagnostics diag;
};

// New physical mesh from the current one: integrate the mesh equation from
// the reference computational vertices over pseudo-time dt, then
// interpolate the current vertex positions at the reference vertices.
MoveResult move_mesh(const SimplicialMesh& current, const MetricField& metric,
                     std::span<const Vec2> xi_ref, double dt, const MoverOptions& opt = {});

// Snaps boundary vertices onto the domain boundary and makes periodic
// partners exact translates.
void snap_to_boundary(const MeshTopology& topo, std::vector<Vec2>& x);

}  // namespace qlmm
