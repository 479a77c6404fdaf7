#include <cmath>
#include <sstream>

#include "semisep/reduction.hpp"

namespace semisep {

namespace {

void guard_size(Index N, Index d) {
  if (N * d > kNystromMaxSize) {
    std::ostringstream os;
    os << "nystrom: N*d = " << N * d << " exceeds the desk-scale limit " << kNystromMaxSize;
    throw SizeError(os.str());
  }
}

std::vector<double> sqrt_weights(const Quadrature& grid) {
  std::vector<double> s(grid.weights().size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sqrt(grid.weights()[i]);
  return s;
}

}  // namespace

CMatrix nystrom_matrix(const SemiSeparableKernel& k, Complex alpha, const Quadrature& grid) {
  const Index N = grid.size(), d = k.d();
  guard_size(N, d);
  CMatrix m = CMatrix::Zero(N * d, N * d);
  if (alpha == Complex(0)) return m;
  const NodalFactors f = k.sample(grid);
  const auto sw = sqrt_weights(grid);
  for (Index i = 0; i < N; ++i)
    for (Index j = 0; j < N; ++j) {
      CMatrix kij;
      if (j < i) kij = f.F1[i] * f.G1[j];
      else if (j > i) kij = f.F2[i] * f.G2[j];
      else kij = diagonal_value(k.diagonal_convention(), f.F1[i] * f.G1[i], f.F2[i] * f.G2[i]);
      m.block(i * d, j * d, d, d) = (alpha * sw[i] * sw[j]) * kij;
    }
  return m;
}

CMatrix volterra_nystrom_matrix(const SemiSeparableKernel& k, Complex alpha,
                                const Quadrature& grid, VolterraSide side) {
  const Index N = grid.size(), d = k.d();
  guard_size(N, d);
  CMatrix m = CMatrix::Zero(N * d, N * d);
  if (alpha == Complex(0)) return m;
  const NodalFactors f = k.sample(grid);
  const auto sw = sqrt_weights(grid);
  for (Index i = 0; i < N; ++i)
    for (Index j = 0; j < N; ++j) {
      const bool lower = j < i, upper = j > i;
      if ((side == VolterraSide::Ha && !lower) || (side == VolterraSide::Hb && !upper)) continue;
      const CMatrix h = f.F1[i] * f.G1[j] - f.F2[i] * f.G2[j];
      const double sgn = side == VolterraSide::Ha ? 1.0 : -1.0;
      m.block(i * d, j * d, d, d) = (sgn * alpha * sw[i] * sw[j]) * h;
    }
  return m;
}

std::pair<Complex, Complex> det2_volterra_is_one(const SemiSeparableKernel& k, Complex alpha,
                                                 const Quadrature& grid) {
  return {numerics::det2_matrix(volterra_nystrom_matrix(k, alpha, grid, VolterraSide::Ha)),
          numerics::det2_matrix(volterra_nystrom_matrix(k, alpha, grid, VolterraSide::Hb))};
}

DetResult det2_nystrom(const SemiSeparableKernel& k, Complex alpha, const Quadrature& grid) {
  DetResult r;
  r.kind = DetKind::Det2;
  r.route = DetRoute::Nystrom;
  r.alpha = alpha;
  r.grid_nodes = grid.size();
  r.value = alpha == Complex(0) ? Complex(1) : numerics::det2_matrix(nystrom_matrix(k, alpha, grid));
  r.routes[DetRoute::Nystrom] = r.value;
  return r;
}

Complex nystrom_trace(const SemiSeparableKernel& k, const Quadrature& grid) {
  const NodalFactors f = k.sample(grid);
  Complex t = 0;
  for (Index i = 0; i < grid.size(); ++i)
    t += grid.weights()[i] *
         diagonal_value(k.diagonal_convention(), f.F1[i] * f.G1[i], f.F2[i] * f.G2[i]).trace();
  return t;
}

Complex nystrom_jump_correction(const SemiSeparableKernel& k, Complex alpha, const Quadrature& grid) {
  // Near x = x' the product K(x,x')K(x',x) is L U on both sides, while the
  // sampled diagonal block D enters tr M^2 as D^2. The mismatch is O(h).
  const NodalFactors f = k.sample(grid);
  Complex s = 0;
  for (Index i = 0; i < grid.size(); ++i) {
    const CMatrix lo = f.F1[i] * f.G1[i], up = f.F2[i] * f.G2[i];
    const CMatrix dg = diagonal_value(k.diagonal_convention(), lo, up);
    const double w = grid.weights()[i];
    s += w * w * ((dg * dg).trace() - (lo * up).trace());
  }
  return std::exp(0.5 * alpha * alpha * s);
}

Complex det2_nystrom_extrapolated(const SemiSeparableKernel& k, Complex alpha,
                                  const Quadrature& grid, int levels) {
  if (levels < 1) throw DomainError("det2_nystrom_extrapolated: levels must be >= 1");
  std::vector<std::vector<Complex>> R(levels);
  Quadrature g = grid;
  for (int i = 0; i < levels; ++i) {
    if (i > 0) g = g.refined();
    R[i].push_back(det2_nystrom(k, alpha, g).value * nystrom_jump_correction(k, alpha, g));
    // corrected midpoint values carry an error series starting at h^2
    for (int j = 1; j <= i; ++j) {
      const double f = std::ldexp(1.0, j + 1);
      R[i].push_back((f * R[i][j - 1] - R[i - 1][j - 1]) / (f - 1.0));
    }
  }
  return R.back().back();
}

}  // namespace semisep
