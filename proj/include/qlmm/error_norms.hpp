#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qlmm/dg_field.hpp"
#include "qlmm/discretization.hpp"
#include "qlmm/mesh.hpp"
#include "qlmm/time_integration.hpp"

namespace qlmm {

// Point values (eta, m, w, h).
using SolutionValues = std::array<double, 4>;
using Evaluator = std::function<SolutionValues(const Vec2&)>;

// A DG solution evaluable at arbitrary physical points.
class DiscreteSolution {
 public:
  DiscreteSolution(std::shared_ptr<const Discretization> disc, SimplicialMesh mesh, DGField u, DGField b);

  SolutionValues operator()(const Vec2& x) const;
  SolutionValues at(int k, const double* phi) const;

  const SimplicialMesh& mesh() const { return mesh_; }
  const DGField& u() const { return u_; }
  const DGField& b() const { return b_; }
  const Discretization& disc() const { return *disc_; }

 private:
  std::shared_ptr<const Discretization> disc_;
  SimplicialMesh mesh_;
  DGField u_;
  DGField b_;
  std::vector<double> left_;  // 1D: sorted element left ends
  std::vector<int> order_;
};

Evaluator exact_evaluator(PointFunction state, ScalarFunction bottom);

struct ComponentError {
  std::string component;
  double l1 = 0.0;
  double linf = 0.0;
};

struct ErrorReport {
  std::vector<ComponentError> components;
  double seconds = 0.0;

  const ComponentError& get(const std::string& name) const;
};

// 21 samples per element; L1 = sum_K |K|/21 sum_s |err|, Linf = max.
ErrorReport error_norms(const Discretization& disc, const SimplicialMesh& mesh, const DGField& u,
                        const DGField& b, const Evaluator& reference,
                        const std::vector<std::string>& components);

double component_value(const SolutionValues& v, const std::string& name);

}  // namespace qlmm
