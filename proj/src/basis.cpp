#include "qlmm/basis.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "qlmm/error.hpp"
#include "qlmm/quadrature.hpp"

namespace qlmm {

namespace {

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

}  // namespace

ReferenceBasis::ReferenceBasis(int dim, int degree) : dim_(dim), degree_(degree) {
  if (dim != 1 && dim != 2) fail(ErrorKind::InvalidArgument, "dimension must be 1 or 2");
  if (degree < 0 || degree > 4) fail(ErrorKind::InvalidArgument, "unsupported polynomial degree");
  for (int p = 0; p <= degree; ++p) {
    if (dim == 1) {
      exponents_.push_back({p, 0});
    } else {
      for (int b = 0; b <= p; ++b) exponents_.push_back({p - b, b});
    }
  }
  const int n = size();
  // Gram matrix of the monomials; its inverse Cholesky factor orthonormalizes
  // them in order (Gram-Schmidt).
  Eigen::MatrixXd gram(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      gram(i, j) = reference_monomial_integral(dim, exponents_[i][0] + exponents_[j][0],
                                               exponents_[i][1] + exponents_[j][1]);
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) fail(ErrorKind::Nonconvergence, "basis Gram matrix not SPD");
  Eigen::MatrixXd l = llt.matrixL();
  Eigen::MatrixXd c = l.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
  coeff_.resize(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) coeff_[i * n + j] = c(i, j);
}

void ReferenceBasis::values(const Vec2& r, std::span<double> out) const {
  const int n = size();
  double mono[16];
  for (int j = 0; j < n; ++j) mono[j] = ipow(r.x, exponents_[j][0]) * ipow(r.y, exponents_[j][1]);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j <= i; ++j) s += coeff_[i * n + j] * mono[j];
    out[i] = s;
  }
}

void ReferenceBasis::gradients(const Vec2& r, std::span<Vec2> out) const {
  const int n = size();
  Vec2 mono[16];
  for (int j = 0; j < n; ++j) {
    const int a = exponents_[j][0], b = exponents_[j][1];
    mono[j].x = a > 0 ? a * ipow(r.x, a - 1) * ipow(r.y, b) : 0.0;
    mono[j].y = b > 0 ? b * ipow(r.x, a) * ipow(r.y, b - 1) : 0.0;
  }
  for (int i = 0; i < n; ++i) {
    Vec2 s;
    for (int j = 0; j <= i; ++j) s += coeff_[i * n + j] * mono[j];
    out[i] = s;
  }
}

}  // namespace qlmm
