#include <doctest.h>

#include "oracles/oracles.hpp"
#include "semisep/numerics.hpp"

using namespace semisep;
namespace nm = semisep::numerics;

namespace {
double rel(Complex a, Complex b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }
}  // namespace

TEST_CASE("det of identity and diagonal matrices") {
  CHECK(nm::det(CMatrix::Identity(3, 3)) == Complex(1));
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 2;
  d(1, 1) = 5;
  CHECK(nm::det(d) == Complex(10));
  CHECK(nm::det(CMatrix(0, 0)) == Complex(1));
}

TEST_CASE("det matches the eigenvalue product and the Leibniz expansion") {
  oracle::Gen g(11);
  const CMatrix m = g.matrix(4);
  CHECK(rel(nm::det(m), oracle::eig_product(m)) < 1e-12);
  CHECK(rel(nm::det(m), oracle::det_leibniz(m)) < 1e-12);
}

TEST_CASE("det rejects non-square input") {
  CHECK_THROWS_AS(nm::det(CMatrix::Zero(2, 3)), DimensionError);
  CHECK_THROWS_AS(nm::det2_matrix(CMatrix::Zero(3, 2)), DimensionError);
}

TEST_CASE("det survives a badly scaled block structure") {
  // Propagator endpoints look like [[A, 0], [huge, D]].
  oracle::Gen g(3);
  CMatrix m = g.matrix(4);
  m.block(0, 2, 2, 2).setZero();
  m.block(2, 0, 2, 2) *= 1e150;
  const Complex expect = oracle::det_leibniz(m.block(0, 0, 2, 2)) *
                         oracle::det_leibniz(m.block(2, 2, 2, 2));
  CHECK(rel(nm::det(m), expect) < 1e-12);
}

TEST_CASE("property: det is multiplicative") {
  oracle::Gen g(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = g.integer(1, 8);
    const CMatrix a = g.matrix(n), b = g.matrix(n);
    const Complex lhs = nm::det(a * b), rhs = nm::det(a) * nm::det(b);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("det2_matrix examples") {
  CHECK(nm::det2_matrix(CMatrix::Zero(4, 4)) == Complex(1));
  // rank one with single eigenvalue alpha
  for (Complex alpha : {Complex(0.5), Complex(2.0), Complex(1.0, 1.0)}) {
    CMatrix m = CMatrix::Zero(3, 3);
    m(0, 0) = alpha;
    m(0, 2) = 7.0;
    CHECK(rel(nm::det2_matrix(m), (1.0 - alpha) * std::exp(alpha)) < 1e-14);
  }
  oracle::Gen g(5);
  const CMatrix m = g.matrix(5);
  CHECK(rel(nm::det2_matrix(m), oracle::det2_by_eigs(m)) < 1e-11);
}

TEST_CASE("property: det2_matrix equals the eigenvalue product") {
  oracle::Gen g(77);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = g.integer(1, 8);
    const CMatrix m = g.matrix(n, 0.7);
    CHECK(rel(nm::det2_matrix(m), oracle::det2_by_eigs(m)) <= 1e-9);
  }
}

TEST_CASE("property: strictly triangular input has det2 = 1") {
  oracle::Gen g(9);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = g.integer(1, 10);
    const CMatrix l = g.strictly_lower(n, 3.0);
    CHECK(std::abs(nm::det2_matrix(l) - 1.0) < 1e-15);
    CHECK(std::abs(nm::det2_matrix(CMatrix(l.transpose())) - 1.0) < 1e-15);
  }
}

TEST_CASE("polar factor examples") {
  const auto z = nm::polar_factor(CMatrix::Zero(2, 2));
  CHECK(z.u.norm() == 0.0);
  CHECK(z.v.norm() == 0.0);
  CMatrix s(1, 1);
  s(0, 0) = -4;
  const auto p = nm::polar_factor(s);
  CHECK(std::abs(p.u(0, 0) - (-2.0)) < 1e-15);
  CHECK(std::abs(p.v(0, 0) - 2.0) < 1e-15);
  oracle::Gen g(4);
  const CMatrix h = g.hermitian(3);
  const auto q = nm::polar_factor(h);
  CHECK((q.u * q.v - h).norm() < 1e-12);
}

TEST_CASE("property: polar factors reconstruct V and v is Hermitian psd") {
  oracle::Gen g(31);
  for (int trial = 0; trial < 150; ++trial) {
    const int n = g.integer(1, 6);
    CMatrix vx = trial % 2 ? g.hermitian(n, 3.0) : g.matrix(n, 3.0);
    if (trial % 5 == 0 && n > 1) vx.col(0).setZero();  // rank deficient
    const auto p = nm::polar_factor(vx);
    CHECK((p.u * p.v - vx).norm() <= 1e-11 * (1 + vx.norm()));
    CHECK((p.v - p.v.adjoint()).norm() <= 1e-12 * (1 + vx.norm()));
    CHECK(oracle::eigenvalues(p.v).real().minCoeff() >= -1e-10 * (1 + vx.norm()));
  }
}

TEST_CASE("polar factor of a normal matrix also satisfies v u = V") {
  oracle::Gen g(8);
  const CMatrix h = g.hermitian(4);
  const auto p = nm::polar_factor(h);
  CHECK((p.v * p.u - h).norm() < 1e-12);
}

TEST_CASE("herm_eigs examples") {
  CMatrix d = CMatrix::Zero(3, 3);
  d(0, 0) = 1;
  d(1, 1) = 2;
  d(2, 2) = 3;
  const auto e = nm::herm_eigs(d);
  CHECK(e.values(0) == doctest::Approx(1.0));
  CHECK(e.values(1) == doctest::Approx(2.0));
  CHECK(e.values(2) == doctest::Approx(3.0));
  CMatrix x = CMatrix::Zero(2, 2);
  x(0, 1) = x(1, 0) = 1;
  const auto px = nm::herm_eigs(x);
  CHECK(px.values(0) == doctest::Approx(-1.0));
  CHECK(px.values(1) == doctest::Approx(1.0));
}

TEST_CASE("herm_eigs matches the characteristic polynomial roots") {
  oracle::Gen g(66);
  const CMatrix h = g.hermitian(6);
  const auto e = nm::herm_eigs(h);
  const auto roots = oracle::charpoly_roots(h);
  REQUIRE(roots.size() == 6);
  for (int i = 0; i < 6; ++i) CHECK(std::abs(e.values(i) - roots[i]) < 1e-9);
}

TEST_CASE("herm_eigs refuses non-Hermitian input") {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 1) = 1;
  CHECK_THROWS_AS(nm::herm_eigs(m), ContractError);
}

TEST_CASE("negative part keeps only the negative spectrum") {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = -3;
  m(1, 1) = 2;
  const CMatrix n = nm::herm_negative_part(m);
  CHECK(std::abs(n(0, 0) - 3.0) < 1e-15);
  CHECK(std::abs(n(1, 1)) < 1e-15);
}

TEST_CASE("require_finite flags NaN") {
  CMatrix m = CMatrix::Zero(2, 2);
  m(1, 1) = NAN;
  CHECK_FALSE(nm::all_finite(m));
  CHECK_THROWS_AS(nm::require_finite(m, "m"), NumericalError);
}
