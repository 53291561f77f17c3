#pragma once

#include <array>
#include <vector>

#include "qlmm/dg_field.hpp"
#include "qlmm/discretization.hpp"
#include "qlmm/mesh.hpp"
#include "qlmm/swe_physics.hpp"

namespace qlmm {

double minmod(double a, double b, double c);
// Returns a unchanged when |a| <= threshold, else minmod(a, b, c).
double modified_minmod(double a, double b, double c, double threshold);

struct TvbOptions {
  double m_tvb = 0.0;
  double nu = 1.5;  // 2D neighbor-difference weight
  bool characteristic = true;  // false: component-wise
};

// TVB limiter in characteristic variables on (eta, m[, w]). The bottom is
// needed for the depth of the cell-average state. Returns the number of
// limited elements. Cell averages are untouched.
int tvb_limit(const Discretization& disc, const SimplicialMesh& mesh, DGField& u, const DGField& b,
              const TvbOptions& opt, const PhysicsParams& p);

// Scales deviations of the depth field about its average so that it is
// non-negative at every check point. Throws PositivityViolation for a
// negative cell average below -1e-12. Returns the number of limited elements.
int pp_limit(const Discretization& disc, DGField& h);

// B^ = B - (h_after - h_before), so eta = h + B is unchanged.
void bottom_correct(DGField& b, const DGField& h_before, const DGField& h_after);

// Smallest value of component c over all positivity check points.
double min_checkpoint_value(const Discretization& disc, const DGField& f, int c = 0);

// h = eta - B, coefficient-wise.
DGField depth_field(const DGField& u, const DGField& b);

}  // namespace qlmm
