#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace semisep {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr Complex I_unit{0.0, 1.0};

// Error taxonomy shared by all modules.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct ContractError : Error { using Error::Error; };
struct ConvergenceError : Error {
  ConvergenceError(const std::string& msg, double last) : Error(msg), last_residual(last) {}
  double last_residual;
};
struct NumericalError : Error { using Error::Error; };
struct TruncationError : Error { using Error::Error; };
struct SizeError : Error { using Error::Error; };
struct ResolventSingularError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

namespace numerics {

// Throws NumericalError if any entry is NaN or Inf.
void require_finite(const CMatrix& m, std::string_view what);
bool all_finite(const CMatrix& m);

Complex det(const CMatrix& m);

// det(I - M) * exp(tr M)
Complex det2_matrix(const CMatrix& m);

Complex trace(const CMatrix& m);

struct PolarFactors {
  CMatrix u;
  CMatrix v;
};

// V = u v with v = |V|^{1/2}. Hermitian input takes the eigen route,
// anything else the SVD route (isometry zeroed on ker |V|).
PolarFactors polar_factor(const CMatrix& vx, double herm_tol = 1e-10);

struct HermitianEigen {
  RVector values;   // nondecreasing
  CMatrix vectors;  // columns
};

// ||M - M*||_F / max(1, ||M||_F)
double hermiticity_defect(const CMatrix& m);

HermitianEigen herm_eigs(const CMatrix& m, double herm_tol = 1e-10);

// Hermitian functional calculus helpers.
CMatrix herm_abs(const CMatrix& m, double herm_tol = 1e-10);
CMatrix herm_negative_part(const CMatrix& m, double herm_tol = 1e-10);  // (|M| - M)/2

// Relative distance |a-b| / max(1, |a|, |b|).
double rel_diff(Complex a, Complex b);

}  // namespace numerics
}  // namespace semisep
