#include <sstream>

#include "semisep/kernel.hpp"

namespace semisep {

SemiSeparableKernel::SemiSeparableKernel(OperatorFunction F1, OperatorFunction G1,
                                         OperatorFunction F2, OperatorFunction G2,
                                         DiagonalConvention conv)
    : f1_(std::move(F1)), g1_(std::move(G1)), f2_(std::move(F2)), g2_(std::move(G2)),
      conv_(conv) {
  auto dims = [](const OperatorFunction& f) {
    std::ostringstream os;
    os << f.rows() << "x" << f.cols();
    return os.str();
  };
  if (f1_.cols() != g1_.rows() || f2_.cols() != g2_.rows() || f1_.rows() != f2_.rows() ||
      g1_.cols() != g2_.cols() || f1_.rows() != g1_.cols()) {
    throw DimensionError("SemiSeparableKernel: inconsistent factor shapes F1 " + dims(f1_) +
                         ", G1 " + dims(g1_) + ", F2 " + dims(f2_) + ", G2 " + dims(g2_));
  }
  const Interval& iv = f1_.interval();
  for (const auto* f : {&g1_, &f2_, &g2_})
    if (f->interval().a != iv.a || f->interval().b != iv.b)
      throw DomainError("SemiSeparableKernel: factors must share one interval");
  iv_ = iv;
}

SemiSeparableKernel SemiSeparableKernel::with_convention(DiagonalConvention c) const {
  SemiSeparableKernel k = *this;
  k.conv_ = c;
  return k;
}

CMatrix diagonal_value(DiagonalConvention c, const CMatrix& lower, const CMatrix& upper) {
  switch (c) {
    case DiagonalConvention::Average: return 0.5 * (lower + upper);
    case DiagonalConvention::LowerBranch: return lower;
    case DiagonalConvention::UpperBranch: return upper;
    case DiagonalConvention::ZeroDiagonal: return CMatrix::Zero(lower.rows(), lower.cols());
  }
  return lower;
}

CMatrix SemiSeparableKernel::eval_kernel(double x, double xp) const {
  if (xp < x) return f1_(x) * g1_(xp);
  if (x < xp) return f2_(x) * g2_(xp);
  return diagonal_value(conv_, f1_(x) * g1_(xp), f2_(x) * g2_(xp));
}

CMatrix SemiSeparableKernel::eval_H(double x, double xp) const {
  return f1_(x) * g1_(xp) - f2_(x) * g2_(xp);
}

CMatrix SemiSeparableKernel::block_C(double x) const {
  CMatrix c(d(), n());
  c << f1_(x), f2_(x);
  return c;
}

CMatrix SemiSeparableKernel::block_B(double x) const {
  CMatrix b(n(), d());
  b << g1_(x), -g2_(x);
  return b;
}

CMatrix SemiSeparableKernel::block_A(double x) const {
  const CMatrix F1 = f1_(x), G1 = g1_(x), F2 = f2_(x), G2 = g2_(x);
  CMatrix a(n(), n());
  a.topLeftCorner(n1(), n1()) = G1 * F1;
  a.topRightCorner(n1(), n2()) = G1 * F2;
  a.bottomLeftCorner(n2(), n1()) = -G2 * F1;
  a.bottomRightCorner(n2(), n2()) = -G2 * F2;
  return a;
}

CMatrix SemiSeparableKernel::P0() const {
  CMatrix p = CMatrix::Zero(n(), n());
  p.bottomRightCorner(n2(), n2()).setIdentity();
  return p;
}

NodalFactors SemiSeparableKernel::sample(const Quadrature& q) const {
  if (q.interval().a < iv_.a - 1e-12 || q.interval().b > iv_.b + 1e-12)
    throw DomainError("SemiSeparableKernel::sample: grid does not lie in the kernel interval");
  NodalFactors s;
  const auto& x = q.nodes();
  s.F1.reserve(x.size());
  s.G1.reserve(x.size());
  s.F2.reserve(x.size());
  s.G2.reserve(x.size());
  for (double xi : x) {
    s.F1.push_back(f1_(xi));
    s.G1.push_back(g1_(xi));
    s.F2.push_back(f2_(xi));
    s.G2.push_back(g2_(xi));
  }
  return s;
}

CMatrix eval_kernel(const SemiSeparableKernel& k, double x, double xp) {
  return k.eval_kernel(x, xp);
}
CMatrix eval_H(const SemiSeparableKernel& k, double x, double xp) { return k.eval_H(x, xp); }
CMatrix block_A(const SemiSeparableKernel& k, double x) { return k.block_A(x); }

}  // namespace semisep
