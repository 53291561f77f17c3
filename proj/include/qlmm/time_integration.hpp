#pragma once

#include <array>
#include <functional>
#include <vector>

#include "qlmm/dg_field.hpp"
#include "qlmm/dg_operator.hpp"
#include "qlmm/limiters.hpp"
#include "qlmm/mesh.hpp"
#include "qlmm/metric.hpp"
#include "qlmm/mmpde.hpp"

namespace qlmm {

enum class MeshMode { Fixed, Moving };

const char* to_string(MeshMode mode);

struct SolverConfig {
  double cfl = 0.3;
  TvbOptions tvb;
  bool positivity = true;
  PhysicsParams physics;
  MetricOptions metric;
  MoverOptions mover;
  MeshMode mode = MeshMode::Fixed;
  long max_steps = 100000000;
  int max_dt_shrinks = 50;
};

using ScalarFunction = std::function<double(const Vec2&)>;

struct SolverState {
  SimplicialMesh mesh;
  DGField u;  // eta, m[, w]
  DGField b;  // corrected bottom
  double t = 0.0;
  long step = 0;
};

struct StepDiagnostics {
  double t = 0.0;
  double dt = 0.0;
  double min_h = 0.0;          // smallest check-point depth after the step
  double mass = 0.0;           // integral of h
  double total_area = 0.0;
  int tvb_count = 0;
  int pp_count = 0;
  int dt_shrinks = 0;
  double gcl_error = 0.0;      // max |A_GCL - |K^{n+1}|| / |K^{n+1}|
  double min_stage_area = 0.0; // smallest element measure along the step
  double min_stage_check_h = 0.0;  // smallest check-point depth over all stages
  MoveDiagnostics mover;
};

// Stage element areas from the discrete geometric conservation law, with
// divergence values at t_n, t_{n+1}, t_{n+1/2}:
//   a1 = a0 + dt a0 d0
//   a2 = 3/4 a0 + 1/4 (a1 + dt a1 d1)
//   a3 = 1/3 a0 + 2/3 (a2 + dt a2 d2)
std::array<double, 3> gcl_area_update(double area0, double dt, const std::array<double, 3>& divergence);

// Same, per element of a mesh motion, with d_s = (d|K|/dt at the stage
// mesh) / (GCL area at that stage).
// If `rates` is given it receives d|K|/dt at the three stage meshes.
std::vector<std::array<double, 3>> gcl_stage_areas(const MeshMotion& motion,
                                                   std::vector<std::array<double, 3>>* rates = nullptr);

// Fixed-mesh CFL step: cfl * min a_K / max |lambda|, clamped to `remaining`.
double fixed_mesh_dt(const SpatialOperator& op, const SimplicialMesh& mesh, const DGField& u,
                     const DGField& b, double cfl, double remaining);
// Moving-mesh CFL step for a given motion: cfl * min(a^n, a^{n+1}) / max |lambda(Xdot)|.
double moving_mesh_dt(const SpatialOperator& op, const MeshMotion& motion, const DGField& u,
                      const DGField& b, double cfl, double remaining);

class Solver {
 public:
  // `xi_ref` is the reference computational mesh (usually the initial mesh
  // coordinates); only used in moving mode.
  Solver(const Discretization& disc, SolverConfig cfg, ScalarFunction bottom,
         std::vector<Vec2> xi_ref);

  const Discretization& discretization() const { return disc_; }
  const SolverConfig& config() const { return cfg_; }
  const SpatialOperator& op() const { return op_; }

  // Projects the initial data and the bottom, then applies the positivity
  // limiter with bottom correction.
  SolverState initialize(const SimplicialMesh& mesh, const PointFunction& initial) const;

  // One SSP-RK3 step over `motion` (which fixes dt). Updates the state.
  StepDiagnostics rk3_step(SolverState& s, const MeshMotion& motion) const;

  // Chooses dt (and the mesh motion in moving mode) and takes one step,
  // never going past t_end.
  StepDiagnostics step(SolverState& s, double t_end) const;

  using Observer = std::function<void(const SolverState&, const StepDiagnostics&)>;
  void advance_to(SolverState& s, double t_end, const Observer& observer = {}) const;

  // B projection, TVB, positivity and bottom correction on one stage.
  void postprocess_stage(const SimplicialMesh& mesh, DGField& u, DGField& b, StepDiagnostics& d) const;

 private:
  const Discretization& disc_;
  SolverConfig cfg_;
  ScalarFunction bottom_;
  std::vector<Vec2> xi_ref_;
  SpatialOperator op_;
};

}  // namespace qlmm
