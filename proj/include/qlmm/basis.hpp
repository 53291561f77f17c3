#pragma once

#include <array>
#include <span>
#include <vector>

#include "qlmm/vec2.hpp"

namespace qlmm {

// Orthonormal modal basis of P^k on the reference element, ordered by total
// degree. Modes 0..dim span P^1.
class ReferenceBasis {
 public:
  ReferenceBasis(int dim, int degree);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  int size() const { return static_cast<int>(exponents_.size()); }
  int linear_size() const { return dim_ + 1; }

  void values(const Vec2& ref, std::span<double> out) const;
  void gradients(const Vec2& ref, std::span<Vec2> out) const;

 private:
  int dim_;
  int degree_;
  std::vector<std::array<int, 2>> exponents_;
  std::vector<double> coeff_;  // row i: monomial coefficients of mode i
};

}  // namespace qlmm
