#include "qlmm/cases.hpp"

#include <cmath>
#include <numbers>

#include "qlmm/error.hpp"

namespace qlmm {

namespace {

constexpr double kPi = std::numbers::pi;

using Triple = std::array<double, 3>;

CaseSpec lake_at_rest_1d(const std::string& name, const std::string& desc, ScalarFunction bottom,
                         const CaseParams& p) {
  CaseSpec c;
  c.name = name;
  c.description = desc;
  c.dim = 1;
  c.domain = {{0.0, 0.0}, {10.0, 0.0}};
  c.bc = {BoundaryKind::Transmissive, BoundaryKind::Transmissive};
  c.bottom = std::move(bottom);
  const double level = p.level.value_or(10.0);
  c.initial = [level](const Vec2&) { return Triple{level, 0.0, 0.0}; };
  c.exact = c.initial;
  c.final_time = 0.5;
  c.default_n = 50;
  c.error_components = {"eta", "hu"};
  return c;
}

CaseSpec perturbation_1d(const std::string& name, const std::string& desc, double amplitude, double eps) {
  CaseSpec c;
  c.name = name;
  c.description = desc;
  c.dim = 1;
  c.domain = {{0.0, 0.0}, {2.0, 0.0}};
  c.bc = {BoundaryKind::Transmissive, BoundaryKind::Transmissive};
  c.bottom = [amplitude](const Vec2& x) {
    return (x.x > 1.4 && x.x < 1.6) ? amplitude * (std::cos(10.0 * kPi * (x.x - 1.5)) + 1.0) : 0.0;
  };
  c.epsilon = eps;
  c.initial = [eps](const Vec2& x) {
    return Triple{(x.x >= 1.1 && x.x <= 1.2) ? 1.0 + eps : 1.0, 0.0, 0.0};
  };
  c.final_time = 0.2;
  c.default_n = 160;
  c.reference_n = 2560;
  c.reference_note = "P2 fixed-mesh run with N=2560 (desk-scale reference)";
  c.error_components = {"eta", "hu"};
  c.bump_region = std::make_pair(1.4, 1.6);
  return c;
}

CaseSpec lake_at_rest_2d(const std::string& name, const std::string& desc, double peak, const CaseParams& p) {
  CaseSpec c;
  c.name = name;
  c.description = desc;
  c.dim = 2;
  c.domain = {{0.0, 0.0}, {1.0, 1.0}};
  c.bc = {BoundaryKind::Periodic, BoundaryKind::Periodic};
  c.bottom = [peak](const Vec2& x) {
    const double dx = x.x - 0.5, dy = x.y - 0.5;
    return peak * std::exp(-50.0 * (dx * dx + dy * dy));
  };
  const double level = p.level.value_or(1.0);
  c.initial = [level](const Vec2&) { return Triple{level, 0.0, 0.0}; };
  c.exact = c.initial;
  c.final_time = 0.1;
  c.cfl_p1 = 0.2;
  c.cfl_p2 = 0.1;
  c.default_nx = c.default_ny = 10;
  c.error_components = {"eta", "hu", "hv"};
  return c;
}

}  // namespace

SimplicialMesh CaseSpec::build_mesh(int n, int nx, int ny) const {
  if (dim == 1) return build_uniform_mesh_1d(domain.lo.x, domain.hi.x, n, bc.x);
  return build_uniform_mesh_2d(domain, nx, ny, bc);
}

std::vector<std::string> case_names() {
  return {"accuracy-1d",
          "lake-at-rest-1d-smooth",
          "lake-at-rest-1d-discontinuous",
          "lake-at-rest-1d-dry",
          "perturbation-1d-big",
          "perturbation-1d-small",
          "perturbation-1d-dry",
          "dam-break-wavy-1d",
          "lake-at-rest-2d",
          "lake-at-rest-2d-dry",
          "perturbation-2d"};
}

CaseSpec make_case(const std::string& name, const CaseParams& p) {
  if (name == "accuracy-1d") {
    CaseSpec c;
    c.name = name;
    c.description = "smooth periodic flow over a sinusoidal hump (accuracy test)";
    c.dim = 1;
    c.domain = {{0.0, 0.0}, {1.0, 0.0}};
    c.bc = {BoundaryKind::Periodic, BoundaryKind::Transmissive};
    c.bottom = [](const Vec2& x) {
      const double s = std::sin(kPi * x.x);
      return s * s;
    };
    c.initial = [](const Vec2& x) {
      const double s = std::sin(kPi * x.x);
      const double cc = std::cos(2.0 * kPi * x.x);
      return Triple{5.0 + std::exp(cc) + s * s, std::sin(cc), 0.0};
    };
    c.final_time = 0.1;
    c.m_tvb = 40.0;
    c.default_n = 100;
    c.reference_n = 4000;
    c.reference_note = "P2 fixed-mesh run with N=4000 (desk-scale reference)";
    c.error_components = {"h", "hu"};
    return c;
  }
  if (name == "lake-at-rest-1d-smooth")
    return lake_at_rest_1d(name, "lake at rest over a smooth Gaussian bottom", [](const Vec2& x) {
      return 5.0 * std::exp(-0.4 * (x.x - 5.0) * (x.x - 5.0));
    }, p);
  if (name == "lake-at-rest-1d-discontinuous")
    return lake_at_rest_1d(name, "lake at rest over a discontinuous step bottom", [](const Vec2& x) {
      return (x.x > 4.0 && x.x < 8.0) ? 4.0 : 0.0;
    }, p);
  if (name == "lake-at-rest-1d-dry") {
    CaseSpec c = lake_at_rest_1d(name, "lake at rest over a Gaussian touching the surface (dry point)",
                                 [](const Vec2& x) { return 10.0 * std::exp(-0.4 * (x.x - 5.0) * (x.x - 5.0)); }, p);
    c.cfl_p1 = 0.3;
    c.cfl_p2 = 0.15;
    return c;
  }
  if (name == "perturbation-1d-big")
    return perturbation_1d(name, "large pulse over a cosine bump", 0.25, p.epsilon.value_or(0.2));
  if (name == "perturbation-1d-small")
    return perturbation_1d(name, "small pulse over a cosine bump", 0.25, p.epsilon.value_or(1e-5));
  if (name == "perturbation-1d-dry") {
    CaseSpec c = perturbation_1d(name, "small pulse over a cosine bump with a dry point", 0.5,
                                 p.epsilon.value_or(1e-5));
    c.reference_n = 640;
    c.reference_note = "P2 fixed-mesh run with N=640";
    return c;
  }
  if (name == "dam-break-wavy-1d") {
    CaseSpec c;
    c.name = name;
    c.description = "dam break over a wavy bottom (rarefaction and hydraulic jumps)";
    c.dim = 1;
    c.domain = {{-10.0, 0.0}, {10.0, 0.0}};
    c.bc = {BoundaryKind::Transmissive, BoundaryKind::Transmissive};
    auto bottom = [](const Vec2& x) {
      return (x.x >= 0.0 && x.x <= 2.0) ? 0.3 * std::pow(std::cos(0.5 * kPi * (x.x - 1.0)), 30) : 0.0;
    };
    c.bottom = bottom;
    c.initial = [bottom](const Vec2& x) {
      if (x.x < 1.0) return Triple{2.0, 2.0 - bottom(x), 0.0};
      return Triple{0.35, 0.0, 0.0};
    };
    c.final_time = 1.0;
    c.default_n = 160;
    c.reference_n = 2000;
    c.reference_note = "P2 fixed-mesh run with N=2000 (desk-scale reference)";
    c.error_components = {"eta", "hu"};
    return c;
  }
  if (name == "lake-at-rest-2d")
    return lake_at_rest_2d(name, "2D lake at rest over a Gaussian bump", 0.8, p);
  if (name == "lake-at-rest-2d-dry")
    return lake_at_rest_2d(name, "2D lake at rest over a Gaussian touching the surface", 1.0, p);
  if (name == "perturbation-2d") {
    CaseSpec c;
    c.name = name;
    c.description = "2D small pulse over an elliptical hump";
    c.dim = 2;
    c.domain = {{-1.0, 0.0}, {2.0, 1.0}};
    c.bc = {BoundaryKind::Reflective, BoundaryKind::Reflective};
    c.bottom = [](const Vec2& x) {
      const double dx = x.x - 0.9, dy = x.y - 0.5;
      return 0.8 * std::exp(-5.0 * dx * dx - 50.0 * dy * dy);
    };
    const double eps = p.epsilon.value_or(0.01);
    c.epsilon = eps;
    c.initial = [eps](const Vec2& x) {
      return Triple{(x.x > 0.05 && x.x < 0.15) ? 1.0 + eps : 1.0, 0.0, 0.0};
    };
    c.final_time = 0.48;
    c.cfl_p1 = 0.2;
    c.cfl_p2 = 0.1;
    c.default_nx = p.full_scale ? 150 : 60;
    c.default_ny = p.full_scale ? 50 : 20;
    c.output_times = {0.12, 0.24, 0.36, 0.48};
    c.error_components = {"eta", "hu", "hv"};
    return c;
  }
  std::string list;
  for (const auto& n : case_names()) list += "\n  " + n;
  fail(ErrorKind::InvalidConfig, "unknown case '" + name + "'; available cases:" + list);
}

}  // namespace qlmm
