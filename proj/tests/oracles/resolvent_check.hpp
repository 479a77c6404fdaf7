#pragma once

#include <algorithm>
#include <cmath>

#include "semisep/reduction.hpp"

namespace oracle {

// Residual of (I - alpha K)(I + alpha L) = I sampled on the nodes of `grid`.
// The kernel of the left side minus the identity is
//   R(x, x') = alpha (L - K)(x, x') - alpha^2 int K(x, s) L(s, x') ds,
// and the integral runs over a composite Gauss rule whose panels break at
// every node, so the jumps of K and L across the diagonal never sit inside a
// panel. Returns the Hilbert-Schmidt norm sqrt(sum w_i w_k |R_ik|^2).
inline double resolvent_identity_defect(const semisep::SemiSeparableKernel& k,
                                        const semisep::ResolventKernel& L, std::complex<double> alpha,
                                        const semisep::Quadrature& grid, int inner_nodes = 10) {
  using namespace semisep;
  std::vector<double> breaks = {k.interval().a};
  for (double x : grid.nodes()) breaks.push_back(x);
  breaks.push_back(k.interval().b);
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  const Quadrature fine = build_grid_breaks(breaks, inner_nodes);
  const Index N = grid.size(), M = fine.size(), d = k.d();
  CMatrix Ks(N * d, M * d), Ls(M * d, N * d);
  for (Index i = 0; i < N; ++i)
    for (Index m = 0; m < M; ++m)
      Ks.block(i * d, m * d, d, d) = fine.weights()[m] * k.eval_kernel(grid.nodes()[i], fine.nodes()[m]);
  for (Index m = 0; m < M; ++m)
    for (Index j = 0; j < N; ++j) Ls.block(m * d, j * d, d, d) = L(fine.nodes()[m], grid.nodes()[j]);
  const CMatrix KL = Ks * Ls;
  double acc = 0;
  for (Index i = 0; i < N; ++i)
    for (Index j = 0; j < N; ++j) {
      const double xi = grid.nodes()[i], xj = grid.nodes()[j];
      const CMatrix r = alpha * (L(xi, xj) - k.eval_kernel(xi, xj)) -
                        alpha * alpha * KL.block(i * d, j * d, d, d);
      acc += grid.weights()[i] * grid.weights()[j] * r.squaredNorm();
    }
  return std::sqrt(acc);
}

}  // namespace oracle
