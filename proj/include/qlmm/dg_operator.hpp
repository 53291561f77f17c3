#pragma once

#include <span>
#include <vector>

#include "qlmm/dg_field.hpp"
#include "qlmm/discretization.hpp"
#include "qlmm/mesh.hpp"
#include "qlmm/swe_physics.hpp"

namespace qlmm {

// Exterior state for a boundary face. Periodic faces never reach this.
State ghost_state(const State& interior, BoundaryKind kind, const Vec2& n, int dim);

// Semi-discrete DG operator on a (possibly moving) mesh. The output holds the
// raw integrals
//   L_j = int_K grad(phi_j).H + phi_j S  -  sum_faces int_e phi_j H*.n
// before division by the mass matrix (|K|/|K^|) I.
class SpatialOperator {
 public:
  SpatialOperator(const Discretization& disc, PhysicsParams params);

  const Discretization& discretization() const { return disc_; }
  const PhysicsParams& params() const { return params_; }

  // OpenMP element/face-parallel version. `velocity` may be empty (fixed mesh).
  void rhs(const SimplicialMesh& mesh, const DGField& u, const DGField& b,
           std::span<const Vec2> velocity, DGField& out) const;
  // Plain serial version with direct face scatter; reference for testing.
  void rhs_serial(const SimplicialMesh& mesh, const DGField& u, const DGField& b,
                  std::span<const Vec2> velocity, DGField& out) const;

  // Largest |eigenvalue| of the moving flux Jacobian over all face
  // quadrature points and both traces.
  double max_wave_speed(const SimplicialMesh& mesh, const DGField& u, const DGField& b,
                        std::span<const Vec2> velocity) const;

 private:
  struct PointTrace {
    State ui, ue;
    double bi = 0.0, be = 0.0;
    Vec2 xdot;
  };

  void face_traces(const SimplicialMesh& mesh, const DGField& u, const DGField& b,
                   std::span<const Vec2> velocity, int f, PointTrace* out) const;
  void volume_terms(const SimplicialMesh& mesh, const DGField& u, const DGField& b,
                    std::span<const Vec2> velocity, int k, double* out) const;
  // params_ with the pressure reference at the cell averages of element k
  PhysicsParams element_params(const DGField& u, const DGField& b, int k) const;
  void check_inputs(const SimplicialMesh& mesh, const DGField& u, const DGField& b,
                    std::span<const Vec2> velocity) const;

  const Discretization& disc_;
  PhysicsParams params_;
};

// int_K phi_j div(U Xdot) dx per element, component and mode (same scaling
// as the operator output).
DGField motion_term(const Discretization& disc, const SimplicialMesh& mesh, const DGField& u,
                    std::span<const Vec2> velocity);

// max |L - int_K phi div(U Xdot)|; zero (to round-off) for the lake at rest
// on any mesh motion.
double wellbalance_residual(const SpatialOperator& op, const SimplicialMesh& mesh, const DGField& u,
                            const DGField& b, std::span<const Vec2> velocity = {});

// Throws NumericalBlowup naming the first element with a non-finite entry.
void check_finite(const DGField& f, const char* what);

}  // namespace qlmm
