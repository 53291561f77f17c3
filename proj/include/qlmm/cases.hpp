#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qlmm/dg_field.hpp"
#include "qlmm/mesh.hpp"
#include "qlmm/time_integration.hpp"

namespace qlmm {

struct CaseSpec {
  std::string name;
  std::string description;
  int dim = 1;
  Box domain;
  BoundarySpec bc;
  ScalarFunction bottom;
  PointFunction initial;  // (eta, m, w)
  double final_time = 0.0;
  double cfl_p1 = 0.3;
  double cfl_p2 = 0.18;
  double m_tvb = 0.0;
  double epsilon = 0.0;          // pulse amplitude, where applicable
  int default_n = 100;           // 1D
  int default_nx = 10;           // 2D
  int default_ny = 10;
  std::vector<double> output_times;
  // Lake-at-rest cases carry their exact steady state.
  std::optional<PointFunction> exact;
  // Fine fixed P2 reference run used when no exact solution exists (0: none).
  int reference_n = 0;
  std::string reference_note;
  // Components reported by error_norms: "eta", "h", "hu", "hv".
  std::vector<std::string> error_components;
  // Sub-interval excluded from the pulse-bound check (1D perturbation cases).
  std::optional<std::pair<double, double>> bump_region;

  double cfl(int degree) const { return degree == 1 ? cfl_p1 : cfl_p2; }
  SimplicialMesh build_mesh(int n, int nx, int ny) const;
};

struct CaseParams {
  std::optional<double> epsilon;
  std::optional<double> level;  // lake-at-rest water level override
  bool full_scale = false;
};

std::vector<std::string> case_names();
CaseSpec make_case(const std::string& name, const CaseParams& params = {});

}  // namespace qlmm
