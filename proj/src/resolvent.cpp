#include <algorithm>
#include <sstream>

#include "semisep/reduction.hpp"

namespace semisep {

ResolventKernel::ResolventKernel(const SemiSeparableKernel& k, Complex alpha,
                                 const Quadrature& grid, const ResolventOptions& opt)
    : k_(k), alpha_(alpha), opt_(opt) {
  if (alpha == Complex(0)) throw ContractError("resolvent trivial: alpha = 0 gives (I - 0 K)^{-1} = I");
  const DetResult d1 = det1_semiseparable(k, alpha, grid);
  if (std::abs(d1.routes.at(DetRoute::ReducedH1)) < opt.singular_threshold) {
    std::ostringstream os;
    os << "resolvent: I - alpha K not invertible at alpha = " << alpha
       << " (|det| = " << std::abs(d1.value) << ")";
    throw ResolventSingularError(os.str());
  }
  prop_ = propagator(k, alpha, grid, PropagatorRoute::ODE_A36a, opt.ode_substeps);
  inv_.reserve(prop_.U.size());
  for (const auto& u : prop_.U) inv_.push_back(u.partialPivLu().inverse());

  const Index n1 = k.n1(), n2 = k.n2();
  const CMatrix& uba = prop_.at_b();
  const CMatrix u22 = uba.bottomRightCorner(n2, n2);
  const CMatrix u21 = uba.bottomLeftCorner(n2, n1);
  Eigen::JacobiSVD<CMatrix> svd(u22);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1), smax = sv(0);
  if (!(smin > 0) || smax / smin > opt.max_condition) {
    std::ostringstream os;
    os << "resolvent: U22(b,a) numerically singular (condition " << (smin > 0 ? smax / smin : INFINITY)
       << ")";
    throw ResolventSingularError(os.str());
  }
  p_ = CMatrix::Zero(k.n(), k.n());
  p_.bottomLeftCorner(n2, n1) = u22.partialPivLu().solve(u21);
  p_.bottomRightCorner(n2, n2).setIdentity();
}

std::pair<CMatrix, CMatrix> ResolventKernel::u_at(double x) const {
  const auto& xs = prop_.x;
  if (x < xs.front() || x > xs.back()) {
    std::ostringstream os;
    os << "resolvent: x = " << x << " outside the kernel interval";
    throw DomainError(os.str());
  }
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - xs.begin() - 1));
  if (xs[i] == x) return {prop_.U[i], inv_[i]};
  CMatrix step = propagate(k_, alpha_, xs[i], x, opt_.ode_substeps);
  CMatrix u = step * prop_.U[i];
  return {u, u.partialPivLu().inverse()};
}

CMatrix ResolventKernel::operator()(double x, double xp) const {
  const auto [ux, uxinv] = u_at(x);
  const auto [uxp, uxpinv] = u_at(xp);
  (void)uxinv;
  (void)uxp;
  const CMatrix left = k_.block_C(x) * ux;
  const CMatrix right = uxpinv * k_.block_B(xp);
  const CMatrix eye = CMatrix::Identity(k_.n(), k_.n());
  const CMatrix lower = left * (eye - p_) * right;
  const CMatrix upper = -(left * p_ * right);
  if (xp < x) return lower;
  if (x < xp) return upper;
  return diagonal_value(k_.diagonal_convention(), lower, upper);
}

CMatrix resolvent_kernel(const SemiSeparableKernel& k, Complex alpha, const Quadrature& grid,
                         double x, double xp) {
  return ResolventKernel(k, alpha, grid)(x, xp);
}

}  // namespace semisep
