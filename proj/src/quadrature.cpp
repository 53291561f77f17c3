#include "qlmm/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qlmm/error.hpp"

namespace qlmm {

namespace {

// Legendre P_n and its derivative on [-1,1].
void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  if (n == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

QuadratureRule gauss_legendre(int n) {
  if (n < 1) fail(ErrorKind::InvalidArgument, "Gauss rule needs at least one point");
  QuadratureRule r;
  r.points.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double p = 0.0, dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      legendre(n, x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(n, x, p, dp);
    // ascending order on [0,1]
    r.points[n - 1 - i] = {0.5 * (x + 1.0), 0.0};
    r.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  r.exactness = 2 * n - 1;
  return r;
}

QuadratureRule gauss_lobatto(int n) {
  if (n < 2) fail(ErrorKind::InvalidArgument, "Gauss-Lobatto rule needs at least two points");
  QuadratureRule r;
  r.points.resize(n);
  r.weights.resize(n);
  const int m = n - 1;
  for (int i = 0; i < n; ++i) {
    double x;
    if (i == 0) {
      x = -1.0;
    } else if (i == m) {
      x = 1.0;
    } else {
      // interior nodes are the roots of P_m'
      x = -std::cos(std::numbers::pi * i / m);
      for (int it = 0; it < 100; ++it) {
        double p, dp;
        legendre(m, x, p, dp);
        const double d2p = (2.0 * x * dp - m * (m + 1.0) * p) / (1.0 - x * x);
        const double dx = dp / d2p;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
    }
    double p = 1.0, dp = 0.0;
    if (i == 0)
      p = (m % 2 == 0) ? 1.0 : -1.0;
    else if (i == m)
      p = 1.0;
    else
      legendre(m, x, p, dp);
    r.points[i] = {0.5 * (x + 1.0), 0.0};
    r.weights[i] = 1.0 / (n * (n - 1.0) * p * p);
  }
  r.exactness = 2 * n - 3;
  return r;
}

QuadratureRule triangle_rule(int n) {
  const QuadratureRule g = gauss_legendre(n);
  QuadratureRule r;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double u = g.points[i].x, v = g.points[j].x;
      r.points.push_back({u, v * (1.0 - u)});
      r.weights.push_back(g.weights[i] * g.weights[j] * (1.0 - u));
    }
  r.exactness = 2 * n - 2;
  return r;
}

double reference_monomial_integral(int dim, int a, int b) {
  if (dim == 1) return b == 0 ? 1.0 / (a + 1.0) : 0.0;
  return factorial(a) * factorial(b) / factorial(a + b + 2);
}

void verify_exactness(int dim, const QuadratureRule& rule, double tol) {
  for (int a = 0; a <= rule.exactness; ++a)
    for (int b = 0; b + a <= rule.exactness; ++b) {
      if (dim == 1 && b > 0) break;
      double s = 0.0;
      for (int q = 0; q < rule.size(); ++q)
        s += rule.weights[q] * std::pow(rule.points[q].x, a) * std::pow(rule.points[q].y, b);
      const double exact = reference_monomial_integral(dim, a, b);
      if (std::abs(s - exact) > tol * std::max(1.0, std::abs(exact)))
        fail(ErrorKind::InvalidArgument, "quadrature not exact for monomial " + std::to_string(a) +
                                             "," + std::to_string(b));
    }
}

}  // namespace qlmm
