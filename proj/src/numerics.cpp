#include "semisep/numerics.hpp"

#include <cmath>
#include <sstream>

namespace semisep::numerics {

bool all_finite(const CMatrix& m) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

void require_finite(const CMatrix& m, std::string_view what) {
  if (!all_finite(m)) throw NumericalError(std::string(what) + ": non-finite entry");
}

namespace {

void require_square(const CMatrix& m, const char* op) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << op << ": expected square matrix, got " << m.rows() << "x" << m.cols();
    throw DimensionError(os.str());
  }
}

// Parlett-Reinsch balancing with power-of-two factors. The similarity
// D M D^{-1} leaves the determinant bit-exact but tames the pivoting when
// one off-diagonal block is exponentially large (propagator endpoints).
void balance(CMatrix& m) {
  const Index n = m.rows();
  bool changed = true;
  for (int sweep = 0; changed && sweep < 20; ++sweep) {
    changed = false;
    for (Index i = 0; i < n; ++i) {
      double c = 0, r = 0;
      for (Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(m(j, i));
        r += std::abs(m(i, j));
      }
      if (c == 0 || r == 0) continue;
      double f = 1.0;
      const double s = c + r;
      while (c < r / 2) { c *= 2; r /= 2; f *= 2; }
      while (c >= r * 2) { c /= 2; r *= 2; f /= 2; }
      if ((c + r) < 0.95 * s) {
        changed = true;
        m.col(i) *= f;
        m.row(i) /= f;
      }
    }
  }
}

}  // namespace

Complex det(const CMatrix& m) {
  require_square(m, "det");
  if (m.rows() == 0) return 1.0;
  if (m.rows() == 1) return m(0, 0);
  const Index n = m.rows();
  bool upper = true, lower = true;
  for (Index j = 0; j < n && (upper || lower); ++j)
    for (Index i = 0; i < n; ++i) {
      if (i > j && m(i, j) != Complex(0)) upper = false;
      if (i < j && m(i, j) != Complex(0)) lower = false;
    }
  if (upper || lower) {
    Complex p = 1.0;
    for (Index i = 0; i < n; ++i) p *= m(i, i);
    return p;
  }
  CMatrix b = m;
  balance(b);
  return Eigen::PartialPivLU<CMatrix>(b).determinant();
}

Complex trace(const CMatrix& m) {
  require_square(m, "trace");
  return m.trace();
}

Complex det2_matrix(const CMatrix& m) {
  require_square(m, "det2_matrix");
  const Index n = m.rows();
  if (n == 0) return 1.0;
  CMatrix a = CMatrix::Identity(n, n) - m;
  return det(a) * std::exp(m.trace());
}

double hermiticity_defect(const CMatrix& m) {
  if (m.rows() != m.cols()) return INFINITY;
  const double scale = std::max(1.0, m.norm());
  return (m - m.adjoint()).norm() / scale;
}

HermitianEigen herm_eigs(const CMatrix& m, double herm_tol) {
  require_square(m, "herm_eigs");
  const double def = hermiticity_defect(m);
  if (def > herm_tol) {
    std::ostringstream os;
    os << "herm_eigs: matrix not Hermitian, relative ||M - M*|| = " << def;
    throw ContractError(os.str());
  }
  if (m.rows() == 0) return {};
  CMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("herm_eigs: eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

CMatrix herm_abs(const CMatrix& m, double herm_tol) {
  auto e = herm_eigs(m, herm_tol);
  return e.vectors * e.values.cwiseAbs().cast<Complex>().asDiagonal() * e.vectors.adjoint();
}

CMatrix herm_negative_part(const CMatrix& m, double herm_tol) {
  auto e = herm_eigs(m, herm_tol);
  RVector neg = e.values.unaryExpr([](double l) { return l < 0 ? -l : 0.0; });
  return e.vectors * neg.cast<Complex>().asDiagonal() * e.vectors.adjoint();
}

PolarFactors polar_factor(const CMatrix& vx, double herm_tol) {
  require_square(vx, "polar_factor");
  require_finite(vx, "polar_factor");
  const Index n = vx.rows();
  if (n == 0) return {CMatrix(0, 0), CMatrix(0, 0)};
  if (n == 1) {
    const Complex z = vx(0, 0);
    const double r = std::abs(z);
    CMatrix v(1, 1), u(1, 1);
    v(0, 0) = std::sqrt(r);
    u(0, 0) = r == 0 ? Complex(0) : z / v(0, 0);
    return {u, v};
  }
  if (hermiticity_defect(vx) <= herm_tol) {
    auto e = herm_eigs(vx, herm_tol);
    RVector root = e.values.cwiseAbs().cwiseSqrt();
    RVector signed_root = e.values.unaryExpr([](double l) {
      return l < 0 ? -std::sqrt(-l) : std::sqrt(l);
    });
    CMatrix v = e.vectors * root.cast<Complex>().asDiagonal() * e.vectors.adjoint();
    CMatrix u = e.vectors * signed_root.cast<Complex>().asDiagonal() * e.vectors.adjoint();
    return {u, v};
  }
  // V = W S Y*, |V| = Y S Y*, U_V = W Y* on ran |V|.
  Eigen::JacobiSVD<CMatrix> svd(vx, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const CMatrix& w = svd.matrixU();
  const CMatrix& y = svd.matrixV();
  RVector root = svd.singularValues().cwiseSqrt();
  CMatrix v = y * root.cast<Complex>().asDiagonal() * y.adjoint();
  CMatrix u = w * root.cast<Complex>().asDiagonal() * y.adjoint();
  return {u, v};
}

double rel_diff(Complex a, Complex b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace semisep::numerics
