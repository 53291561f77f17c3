#pragma once

#include <Eigen/Dense>
#include <array>

#include "qlmm/vec2.hpp"

namespace qlmm {

struct PhysicsParams {
  double g = 9.812;
  double h_dry = 1e-12;
  // Pressure is taken relative to its value at the reference state
  // (eta_ref, b_ref). A constant offset drops out of the DG element integrals;
  // a reference near the local state keeps the hydrostatic balance free of
  // cancellation.
  double eta_ref = 0.0;
  double b_ref = 0.0;
};

// Conservative state in surface variables: eta = h + B, m = hu, w = hv.
// In 1D w is zero and ignored.
struct State {
  double eta = 0.0;
  double m = 0.0;
  double w = 0.0;
};

using Vec3 = std::array<double, 3>;
// Flux tensor: row c holds the (x, y) flux of component c.
using FluxTensor = std::array<Vec2, 3>;

// m*h / max(h^2, h_dry^2); tends to zero as h -> 0.
inline double desingularized_velocity(double mom, double h, double h_dry) {
  const double d = std::max(h * h, h_dry * h_dry);
  return mom * h / d;
}

FluxTensor physical_flux(const State& u, double h, const PhysicsParams& p, int dim);
// F(U) - U (x) Xdot
FluxTensor moving_flux(const State& u, double h, const Vec2& xdot, const PhysicsParams& p, int dim);
Vec3 normal_flux(const FluxTensor& f, const Vec2& n);

// Eigenvalues of the normal moving-flux Jacobian, ascending:
// (u - Xdot).n - c, (u - Xdot).n, (u - Xdot).n + c. Throws on negative h.
Vec3 eigenvalues_moving(const State& u, double h, const Vec2& xdot, const Vec2& n,
                        const PhysicsParams& p, int dim);
// max |lambda| with h clamped at zero; never throws.
double max_abs_eigenvalue(const State& u, double h, const Vec2& xdot, const Vec2& n,
                          const PhysicsParams& p, int dim);

// Global Lax-Friedrichs flux of the moving flux, oriented along n (out of
// the interior).
Vec3 lax_friedrichs_flux(const State& ui, double hi, const State& ue, double he, const Vec2& xdot,
                         const Vec2& n, double alpha, const PhysicsParams& p, int dim);

struct ReconstructedPair {
  State ui, ue;
  double hi = 0.0, he = 0.0;
};

// Hydrostatic reconstruction at an interface; eta is left unchanged.
ReconstructedPair hydrostatic_reconstruct(const State& ui, double bi, const State& ue, double be,
                                          const PhysicsParams& p, int dim);

// Well-balanced numerical flux seen from the interior side:
// LF flux of the reconstructed pair plus g*eta_i*(h_i - h*_i) n in the
// momentum rows.
Vec3 corrected_flux(const State& ui, double bi, const State& ue, double be, const Vec2& xdot,
                    const Vec2& n, double alpha, const PhysicsParams& p, int dim);

// Right/left eigenvectors of the normal flux Jacobian at a given state. The
// leading dim+1 block is used; identity when the depth is (nearly) dry.
struct CharacteristicBasis {
  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d l = Eigen::Matrix3d::Identity();
};

CharacteristicBasis characteristic_basis(const State& avg, double h, const Vec2& n,
                                         const PhysicsParams& p, int dim);

}  // namespace qlmm
