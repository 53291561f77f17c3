#include "qlmm/error_norms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "qlmm/error.hpp"

namespace qlmm {

DiscreteSolution::DiscreteSolution(std::shared_ptr<const Discretization> disc, SimplicialMesh mesh, DGField u, DGField b)
    : disc_(std::move(disc)), mesh_(std::move(mesh)), u_(std::move(u)), b_(std::move(b)) {
  if (mesh_.dim() == 1) {
    const int ne = mesh_.num_elements();
    order_.resize(ne);
    std::iota(order_.begin(), order_.end(), 0);
    std::sort(order_.begin(), order_.end(), [&](int a, int c) {
      return mesh_.element_vertices(a)[0].x < mesh_.element_vertices(c)[0].x;
    });
    left_.resize(ne);
    for (int i = 0; i < ne; ++i) left_[i] = mesh_.element_vertices(order_[i])[0].x;
  }
}

SolutionValues DiscreteSolution::at(int k, const double* phi) const {
  const auto v = evaluate(u_, k, phi);
  const double bq = evaluate(b_, k, 0, phi);
  return {v[0], v[1], mesh_.dim() == 2 ? v[2] : 0.0, v[0] - bq};
}

SolutionValues DiscreteSolution::operator()(const Vec2& x) const {
  int k = -1;
  Vec2 ref;
  if (mesh_.dim() == 1) {
    // binary search over element left ends
    auto it = std::upper_bound(left_.begin(), left_.end(), x.x);
    if (it != left_.begin()) {
      const int i = static_cast<int>(it - left_.begin()) - 1;
      k = order_[i];
      const auto v = mesh_.element_vertices(k);
      if (x.x > v[1].x + 1e-12 * std::max(1.0, std::abs(x.x))) k = -1;
      else ref = {std::clamp((x.x - v[0].x) / (v[1].x - v[0].x), 0.0, 1.0), 0.0};
    }
  } else {
    k = locate_point(mesh_, x, &ref);
  }
  if (k < 0) {
    std::ostringstream os;
    os << "reference solution cannot be evaluated at (" << x.x << ", " << x.y << ")";
    fail(ErrorKind::OutOfRange, os.str());
  }
  const auto phi = disc_->phi_at(ref);
  return at(k, phi.data());
}

Evaluator exact_evaluator(PointFunction state, ScalarFunction bottom) {
  return [state = std::move(state), bottom = std::move(bottom)](const Vec2& x) {
    const auto s = state(x);
    return SolutionValues{s[0], s[1], s[2], s[0] - bottom(x)};
  };
}

const ComponentError& ErrorReport::get(const std::string& name) const {
  for (const auto& c : components)
    if (c.component == name) return c;
  fail(ErrorKind::InvalidArgument, "no error component '" + name + "'");
}

double component_value(const SolutionValues& v, const std::string& name) {
  if (name == "eta") return v[0];
  if (name == "hu") return v[1];
  if (name == "hv") return v[2];
  if (name == "h") return v[3];
  fail(ErrorKind::InvalidArgument, "unknown error component '" + name + "'");
}

ErrorReport error_norms(const Discretization& disc, const SimplicialMesh& mesh, const DGField& u,
                        const DGField& b, const Evaluator& reference,
                        const std::vector<std::string>& components) {
  check_compatible(u, mesh, disc);
  const int ns = static_cast<int>(disc.sample_points.size());
  const int nc = static_cast<int>(components.size());
  ErrorReport r;
  for (const auto& c : components) {
    component_value({}, c);
    r.components.push_back({c, 0.0, 0.0});
  }
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const AffineMap map = mesh.affine_map(k);
    const double w = mesh.signed_measure(k) / ns;
    for (int s = 0; s < ns; ++s) {
      const double* phi = &disc.sample_phi[s * disc.nb];
      const auto v = evaluate(u, k, phi);
      const SolutionValues nv{v[0], v[1], mesh.dim() == 2 ? v[2] : 0.0, v[0] - evaluate(b, k, 0, phi)};
      const SolutionValues rv = reference(map.to_physical(disc.sample_points[s]));
      for (int c = 0; c < nc; ++c) {
        const double e = std::abs(component_value(nv, components[c]) - component_value(rv, components[c]));
        r.components[c].l1 += w * e;
        r.components[c].linf = std::max(r.components[c].linf, e);
      }
    }
  }
  return r;
}

}  // namespace qlmm
