#include <cmath>
#include <vector>

#include "qlmm/basis.hpp"
#include "qlmm/discretization.hpp"
#include "qlmm/quadrature.hpp"
#include "test_util.hpp"

using namespace qlmm;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// a! b! / (a+b+2)! on the unit triangle; 1/(a+1) on [0,1]
double monomial_oracle(int dim, int a, int b) {
  if (dim == 1) return 1.0 / (a + 1);
  return factorial(a) * factorial(b) / factorial(a + b + 2);
}

double apply(const QuadratureRule& r, int a, int b) {
  double s = 0.0;
  for (int q = 0; q < r.size(); ++q) s += r.weights[q] * std::pow(r.points[q].x, a) * std::pow(r.points[q].y, b);
  return s;
}

}  // namespace

TEST_CASE("reference monomial integrals") {
  for (int a = 0; a <= 8; ++a) {
    CHECK(reference_monomial_integral(1, a, 0) == doctest::Approx(monomial_oracle(1, a, 0)).epsilon(1e-15));
    for (int b = 0; a + b <= 8; ++b)
      CHECK(reference_monomial_integral(2, a, b) == doctest::Approx(monomial_oracle(2, a, b)).epsilon(1e-14));
  }
}

TEST_CASE("Gauss-Legendre and collapsed triangle rules are exact to their degree") {
  for (int n = 1; n <= 6; ++n) {
    const auto gl = gauss_legendre(n);
    CHECK(gl.exactness == 2 * n - 1);
    for (int a = 0; a <= gl.exactness; ++a) CHECK(apply(gl, a, 0) == doctest::Approx(monomial_oracle(1, a, 0)).epsilon(1e-14));
    for (double w : gl.weights) CHECK(w > 0.0);

    const auto tr = triangle_rule(n);
    CHECK(tr.exactness == 2 * n - 2);
    for (int a = 0; a <= tr.exactness; ++a)
      for (int b = 0; a + b <= tr.exactness; ++b)
        CHECK(std::abs(apply(tr, a, b) - monomial_oracle(2, a, b)) < 1e-14);
    for (double w : tr.weights) CHECK(w > 0.0);
    CHECK_NOTHROW(verify_exactness(2, tr));
  }
  // the rule misses the next degree
  const auto tr = triangle_rule(2);
  CHECK(std::abs(apply(tr, 3, 0) - monomial_oracle(2, 3, 0)) > 1e-6);
}

TEST_CASE("Gauss-Lobatto includes the endpoints") {
  for (int n = 2; n <= 5; ++n) {
    const auto r = gauss_lobatto(n);
    CHECK(r.points.front().x == doctest::Approx(0.0));
    CHECK(r.points.back().x == doctest::Approx(1.0));
    CHECK(r.exactness == 2 * n - 3);
    for (int a = 0; a <= r.exactness; ++a) CHECK(apply(r, a, 0) == doctest::Approx(1.0 / (a + 1)).epsilon(1e-14));
  }
}

TEST_CASE("discretization rules cover the steady-state integrands") {
  for (int dim : {1, 2})
    for (int k : {1, 2}) {
      const Discretization d(dim, k);
      CHECK(d.volume.exactness >= 3 * k);
      CHECK(d.nb == (dim == 1 ? k + 1 : (k + 1) * (k + 2) / 2));
      if (dim == 2) CHECK(d.face.exactness >= 2 * k + 3);
      double s = 0.0;
      for (double w : d.volume.weights) s += w;
      CHECK(s == doctest::Approx(d.ref_measure).epsilon(1e-14));
      CHECK(d.sample_points.size() == 21);
    }
  const Discretization d1(1, 2);
  for (int i = 0; i < 21; ++i) CHECK(d1.sample_points[i].x == doctest::Approx(i / 20.0));
  REQUIRE(d1.pp_points.size() == 4);
  CHECK(d1.pp_points.front().x == doctest::Approx(0.0));
  CHECK(d1.pp_points.back().x == doctest::Approx(1.0));
  // 2D samples: barycentric lattice of order 5
  const Discretization d2(2, 1);
  for (const Vec2& p : d2.sample_points) {
    CHECK(std::abs(5 * p.x - std::round(5 * p.x)) < 1e-12);
    CHECK(std::abs(5 * p.y - std::round(5 * p.y)) < 1e-12);
    CHECK(p.x + p.y <= 1.0 + 1e-12);
  }
}

TEST_CASE("modal basis is orthonormal") {
  for (int dim : {1, 2})
    for (int k = 0; k <= 4; ++k) {
      const ReferenceBasis basis(dim, k);
      const auto rule = dim == 1 ? gauss_legendre(k + 2) : triangle_rule(k + 2);
      const int nb = basis.size();
      std::vector<double> phi(nb);
      std::vector<double> gram(nb * nb, 0.0);
      for (int q = 0; q < rule.size(); ++q) {
        basis.values(rule.points[q], phi);
        for (int i = 0; i < nb; ++i)
          for (int j = 0; j < nb; ++j) gram[i * nb + j] += rule.weights[q] * phi[i] * phi[j];
      }
      for (int i = 0; i < nb; ++i)
        for (int j = 0; j < nb; ++j) CHECK(std::abs(gram[i * nb + j] - (i == j ? 1.0 : 0.0)) < 1e-10);
      basis.values({0.2, 0.1}, phi);
      CHECK(phi[0] == doctest::Approx(1.0 / std::sqrt(dim == 1 ? 1.0 : 0.5)));
    }
}

TEST_CASE("basis gradients match finite differences") {
  test::Rng g(1);
  for (int dim : {1, 2})
    for (int k : {1, 2, 3}) {
      const ReferenceBasis basis(dim, k);
      const int nb = basis.size();
      std::vector<double> p(nb), m(nb);
      std::vector<Vec2> grad(nb);
      for (int trial = 0; trial < 10; ++trial) {
        const Vec2 r{test::uniform(g, 0.1, 0.45), dim == 2 ? test::uniform(g, 0.1, 0.45) : 0.0};
        basis.gradients(r, grad);
        const double eps = 1e-6;
        basis.values({r.x + eps, r.y}, p);
        basis.values({r.x - eps, r.y}, m);
        for (int j = 0; j < nb; ++j) CHECK(grad[j].x == doctest::Approx((p[j] - m[j]) / (2 * eps)).epsilon(1e-6));
        if (dim == 2) {
          basis.values({r.x, r.y + eps}, p);
          basis.values({r.x, r.y - eps}, m);
          for (int j = 0; j < nb; ++j) CHECK(grad[j].y == doctest::Approx((p[j] - m[j]) / (2 * eps)).epsilon(1e-6));
        }
      }
    }
}

TEST_CASE("unsupported degree is rejected") {
  CHECK_THROWS(Discretization(1, 3));
  CHECK_THROWS(Discretization(2, 0));
  CHECK_THROWS(ReferenceBasis(2, 5));
}
