#pragma once

#include <vector>

#include "qlmm/vec2.hpp"

namespace qlmm {

// Points live on the reference element: [0,1] in 1D (y = 0), the triangle
// (0,0),(1,0),(0,1) in 2D. Weights sum to the reference measure.
struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int exactness = 0;

  int size() const { return static_cast<int>(weights.size()); }
};

QuadratureRule gauss_legendre(int n);
QuadratureRule gauss_lobatto(int n);
// Collapsed tensor Gauss rule with n points per direction, exact to degree 2n-2.
QuadratureRule triangle_rule(int n);

// Exact integral of x^a y^b over the reference element.
double reference_monomial_integral(int dim, int a, int b);

// Throws if the rule misses any monomial up to its claimed exactness.
void verify_exactness(int dim, const QuadratureRule& rule, double tol = 1e-13);

}  // namespace qlmm
