#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "qlmm/discretization.hpp"
#include "qlmm/mesh.hpp"

namespace qlmm {

// Modal coefficients laid out as [element][component][mode].
class DGField {
 public:
  DGField() = default;
  DGField(int n_elements, int n_components, int n_basis)
      : ne_(n_elements), nc_(n_components), nb_(n_basis),
        c_(static_cast<size_t>(n_elements) * n_components * n_basis, 0.0) {}

  int num_elements() const { return ne_; }
  int num_components() const { return nc_; }
  int num_basis() const { return nb_; }

  double& operator()(int k, int c, int j) { return c_[(static_cast<size_t>(k) * nc_ + c) * nb_ + j]; }
  double operator()(int k, int c, int j) const { return c_[(static_cast<size_t>(k) * nc_ + c) * nb_ + j]; }
  double* element(int k) { return c_.data() + static_cast<size_t>(k) * nc_ * nb_; }
  const double* element(int k) const { return c_.data() + static_cast<size_t>(k) * nc_ * nb_; }
  std::span<double> data() { return c_; }
  std::span<const double> data() const { return c_; }

  bool same_shape(const DGField& o) const { return ne_ == o.ne_ && nc_ == o.nc_ && nb_ == o.nb_; }

 private:
  int ne_ = 0;
  int nc_ = 0;
  int nb_ = 0;
  std::vector<double> c_;
};

using PointFunction = std::function<std::array<double, 3>(const Vec2&)>;

// L2 projection onto the broken P^k space. Components beyond n_components of
// the returned array are ignored.
DGField l2_project(const Discretization& disc, const SimplicialMesh& mesh, const PointFunction& f,
                   int n_components);

// Value of every component at a reference point of element k.
std::array<double, 3> evaluate(const Discretization& disc, const DGField& u, int k, const Vec2& ref);
// Same, with precomputed basis values.
std::array<double, 3> evaluate(const DGField& u, int k, const double* phi);
double evaluate(const DGField& u, int k, int c, const double* phi);

double cell_average(const Discretization& disc, const DGField& u, int k, int c);
// Sum over elements of |K| times the cell average.
double integral(const Discretization& disc, const SimplicialMesh& mesh, const DGField& u, int c);

void check_compatible(const DGField& u, const SimplicialMesh& mesh, const Discretization& disc);

// Locates the element containing x; returns -1 if none. `ref` receives the
// reference coordinates. Starts the search at `hint` when given.
int locate_point(const SimplicialMesh& mesh, const Vec2& x, Vec2* ref, int hint = -1);

}  // namespace qlmm
