#include "qlmm/time_integration.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qlmm/error.hpp"

namespace qlmm {

const char* to_string(MeshMode mode) { return mode == MeshMode::Fixed ? "fixed" : "moving"; }

std::array<double, 3> gcl_area_update(double a0, double dt, const std::array<double, 3>& div) {
  const double a1 = a0 + dt * a0 * div[0];
  const double a2 = 0.75 * a0 + 0.25 * (a1 + dt * a1 * div[1]);
  const double a3 = a0 / 3.0 + 2.0 / 3.0 * (a2 + dt * a2 * div[2]);
  return {a1, a2, a3};
}

std::vector<std::array<double, 3>> gcl_stage_areas(const MeshMotion& motion,
                                                   std::vector<std::array<double, 3>>* rates) {
  const SimplicialMesh& m0 = motion.start;
  const SimplicialMesh& m1 = motion.end;
  const SimplicialMesh mh = motion.at(motion.t0 + 0.5 * motion.dt);
  const double dt = motion.dt;
  const int ne = m0.num_elements();
  std::vector<std::array<double, 3>> out(ne);
  if (rates) rates->assign(ne, {0.0, 0.0, 0.0});
  if (motion.velocity.empty()) {
    for (int k = 0; k < ne; ++k) {
      const double a = m0.signed_measure(k);
      out[k] = {a, a, a};
    }
    return out;
  }
  const auto& v = motion.velocity;
  for (int k = 0; k < ne; ++k) {
    const double a0 = m0.signed_measure(k);
    // divergence = rate / GCL area, so a_s * d_s reproduces the rate exactly
    const double r0 = measure_rate(m0, v, k);
    const double a1 = a0 + dt * r0;
    const double r1 = measure_rate(m1, v, k);
    const double a2 = 0.75 * a0 + 0.25 * (a1 + dt * r1);
    const double r2 = measure_rate(mh, v, k);
    const double a3 = a0 / 3.0 + 2.0 / 3.0 * (a2 + dt * r2);
    out[k] = {a1, a2, a3};
    if (rates) (*rates)[k] = {r0, r1, r2};
  }
  return out;
}

double fixed_mesh_dt(const SpatialOperator& op, const SimplicialMesh& mesh, const DGField& u,
                     const DGField& b, double cfl, double remaining) {
  const double speed = op.max_wave_speed(mesh, u, b, {});
  double dt = speed > 0.0 ? cfl * mesh.min_height() / speed : remaining;
  return std::min(dt, remaining);
}

double moving_mesh_dt(const SpatialOperator& op, const MeshMotion& motion, const DGField& u,
                      const DGField& b, double cfl, double remaining) {
  const double speed = op.max_wave_speed(motion.start, u, b, motion.velocity);
  const double a = std::min(motion.start.min_height(), motion.end.min_height());
  double dt = speed > 0.0 ? cfl * a / speed : remaining;
  return std::min(dt, remaining);
}

Solver::Solver(const Discretization& disc, SolverConfig cfg, ScalarFunction bottom, std::vector<Vec2> xi_ref)
    : disc_(disc), cfg_(cfg), bottom_(std::move(bottom)), xi_ref_(std::move(xi_ref)), op_(disc, cfg.physics) {
  if (!(cfg_.cfl > 0.0)) fail(ErrorKind::InvalidConfig, "CFL number must be positive");
}

SolverState Solver::initialize(const SimplicialMesh& mesh, const PointFunction& initial) const {
  SolverState s;
  s.mesh = mesh;
  s.u = l2_project(disc_, mesh, initial, disc_.dim + 1);
  s.b = l2_project(disc_, mesh, [&](const Vec2& x) { return std::array<double, 3>{bottom_(x), 0.0, 0.0}; }, 1);
  if (cfg_.positivity) {
    const DGField h = depth_field(s.u, s.b);
    DGField hl = h;
    pp_limit(disc_, hl);
    bottom_correct(s.b, h, hl);
  }
  check_finite(s.u, "initial data");
  return s;
}

void Solver::postprocess_stage(const SimplicialMesh& mesh, DGField& u, DGField& b, StepDiagnostics& d) const {
  b = l2_project(disc_, mesh, [&](const Vec2& x) { return std::array<double, 3>{bottom_(x), 0.0, 0.0}; }, 1);
  d.tvb_count += tvb_limit(disc_, mesh, u, b, cfg_.tvb, cfg_.physics);
  if (cfg_.positivity) {
    const DGField h = depth_field(u, b);
    DGField hl = h;
    d.pp_count += pp_limit(disc_, hl);
    bottom_correct(b, h, hl);
    d.min_stage_check_h = std::min(d.min_stage_check_h, min_checkpoint_value(disc_, hl));
  }
}

namespace {

// Re-raises solver errors with the step, stage and time attached.
template <class F>
void with_context(long step, int stage, double t, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    fail(e.kind(), std::string(e.what()) + " (step " + std::to_string(step + 1) + ", stage " +
                       std::to_string(stage) + ", t=" + std::to_string(t) + ")");
  }
}

}  // namespace

StepDiagnostics Solver::rk3_step(SolverState& s, const MeshMotion& motion) const {
  StepDiagnostics d;
  d.min_stage_check_h = INFINITY;
  const double dt = motion.dt;
  const double kref = disc_.ref_measure;
  const int ne = s.mesh.num_elements();
  const size_t per = static_cast<size_t>(disc_.dim + 1) * disc_.nb;
  const std::span<const Vec2> vel = motion.velocity;

  const SimplicialMesh& m0 = motion.start;
  const SimplicialMesh& m1 = motion.end;
  const SimplicialMesh mh = motion.at(motion.t0 + 0.5 * dt);
  std::vector<std::array<double, 3>> rate;
  const auto areas = gcl_stage_areas(motion, &rate);

  d.min_stage_area = INFINITY;
  for (int k = 0; k < ne; ++k) d.min_stage_area = std::min(d.min_stage_area, min_measure_along_path(m0, m1, k));
  if (!(d.min_stage_area > 0.0)) fail(ErrorKind::MeshSingular, "element inverted during the step");

  const DGField u0 = s.u;
  DGField l;
  DGField u1(u0.num_elements(), u0.num_components(), u0.num_basis());
  DGField b = s.b;

  // Stage updates in increment form on U^n: with a_s from the GCL rates r_s
  // this equals the area-weighted update, and a constant state only sees
  // round-off in the increment.
  // stage 1 on the mesh at t_n
  op_.rhs(m0, u0, b, vel, l);
#pragma omp parallel for
  for (int k = 0; k < ne; ++k) {
    const double* c0 = u0.element(k);
    const double* lk = l.element(k);
    double* c1 = u1.element(k);
    const double r = rate[k][0];
    for (size_t i = 0; i < per; ++i) c1[i] = c0[i] + dt * (kref * lk[i] - r * c0[i]) / areas[k][0];
  }
  with_context(s.step, 1, motion.t0, [&] { postprocess_stage(m1, u1, b, d); });

  // stage 2 on the mesh at t_{n+1}
  DGField u2 = u1;
  op_.rhs(m1, u1, b, vel, l);
#pragma omp parallel for
  for (int k = 0; k < ne; ++k) {
    const double* c0 = u0.element(k);
    const double* c1 = u1.element(k);
    const double* lk = l.element(k);
    double* c2 = u2.element(k);
    const double r = rate[k][1];
    for (size_t i = 0; i < per; ++i)
      c2[i] = c0[i] + 0.25 * (areas[k][0] * (c1[i] - c0[i]) + dt * (kref * lk[i] - r * c0[i])) / areas[k][1];
  }
  with_context(s.step, 2, motion.t0, [&] { postprocess_stage(mh, u2, b, d); });

  // stage 3 on the mesh at t_{n+1/2}
  DGField u3 = u2;
  op_.rhs(mh, u2, b, vel, l);
#pragma omp parallel for
  for (int k = 0; k < ne; ++k) {
    const double* c0 = u0.element(k);
    const double* c2 = u2.element(k);
    const double* lk = l.element(k);
    double* c3 = u3.element(k);
    const double r = rate[k][2];
    for (size_t i = 0; i < per; ++i)
      c3[i] = c0[i] + 2.0 / 3.0 * (areas[k][1] * (c2[i] - c0[i]) + dt * (kref * lk[i] - r * c0[i])) / areas[k][2];
  }
  with_context(s.step, 3, motion.t0, [&] { postprocess_stage(m1, u3, b, d); });
  check_finite(u3, "time step");

  for (int k = 0; k < ne; ++k) {
    const double a = m1.signed_measure(k);
    d.gcl_error = std::max(d.gcl_error, std::abs(areas[k][2] - a) / a);
  }

  s.u = std::move(u3);
  s.b = std::move(b);
  s.mesh = m1;
  s.t = motion.t0 + dt;
  ++s.step;

  const DGField h = depth_field(s.u, s.b);
  d.t = s.t;
  d.dt = dt;
  d.min_h = min_checkpoint_value(disc_, h);
  d.mass = integral(disc_, s.mesh, h, 0);
  d.total_area = s.mesh.total_measure();
  if (!cfg_.positivity) d.min_stage_check_h = d.min_h;
  return d;
}

StepDiagnostics Solver::step(SolverState& s, double t_end) const {
  const double remaining = t_end - s.t;
  if (!(remaining > 0.0)) fail(ErrorKind::InvalidArgument, "no time left to step");
  const double dt1 = fixed_mesh_dt(op_, s.mesh, s.u, s.b, cfg_.cfl, remaining);
  if (!(dt1 > 0.0) || !std::isfinite(dt1)) fail(ErrorKind::NumericalBlowup, "non-positive time step");

  StepDiagnostics d;
  if (cfg_.mode == MeshMode::Fixed) {
    d = rk3_step(s, MeshMotion::fixed(s.mesh, s.t, dt1));
  } else {
    const MetricField metric = build_adaptation_metric(disc_, s.mesh, s.u, s.b, cfg_.physics, cfg_.metric);
    MoveResult mv = move_mesh(s.mesh, metric, xi_ref_, dt1, cfg_.mover);
    std::vector<Vec2> vel(s.mesh.num_vertices());
    for (int i = 0; i < s.mesh.num_vertices(); ++i) vel[i] = (1.0 / dt1) * (mv.mesh.vertex(i) - s.mesh.vertex(i));
    MeshMotion motion{s.mesh, mv.mesh, vel, s.t, dt1};
    // shrink the step along the same vertex velocities until the
    // moving-mesh CFL condition holds
    int shrinks = 0;
    for (; shrinks < cfg_.max_dt_shrinks; ++shrinks) {
      const double dt2 = moving_mesh_dt(op_, motion, s.u, s.b, cfg_.cfl, remaining);
      if (dt2 >= motion.dt * (1.0 - 1e-12)) break;
      motion = MeshMotion::from_velocity(s.mesh, vel, s.t, dt2);
    }
    const bool clamp_end = motion.dt == remaining;
    d = rk3_step(s, motion);
    if (clamp_end) s.t = t_end;
    d.dt_shrinks = shrinks;
    d.mover = mv.diag;
    d.t = s.t;
    return d;
  }
  if (dt1 == remaining) {
    s.t = t_end;
    d.t = t_end;
  }
  return d;
}

void Solver::advance_to(SolverState& s, double t_end, const Observer& observer) const {
  const double tol = 1e-14 * std::max(1.0, std::abs(t_end));
  while (t_end - s.t > tol) {
    if (s.step >= cfg_.max_steps) fail(ErrorKind::Nonconvergence, "step limit reached");
    const StepDiagnostics d = step(s, t_end);
    if (observer) observer(s, d);
  }
  s.t = std::max(s.t, t_end);
}

}  // namespace qlmm
