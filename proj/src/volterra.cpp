#include <cmath>

#include "detail.hpp"
#include "semisep/reduction.hpp"

namespace semisep {

namespace detail {

std::vector<CMatrix> partial_integrals(const Quadrature& grid, const std::vector<CMatrix>& vals,
                                       bool from_above) {
  const Index N = grid.size();
  const int m = grid.n_per_panel();
  const auto& w = grid.weights();
  std::vector<CMatrix> out(static_cast<std::size_t>(N));
  if (N == 0) return out;
  CMatrix acc = CMatrix::Zero(vals[0].rows(), vals[0].cols());
  const int P = grid.panels();
  for (int step = 0; step < P; ++step) {
    const int p = from_above ? P - 1 - step : step;
    const Index b0 = grid.panel_begin(p);
    const RMatrix S = from_above ? grid.right_partial(p) : grid.left_partial(p);
    for (int i = 0; i < m; ++i) {
      CMatrix v = acc;
      for (int j = 0; j < m; ++j) v += S(i, j) * vals[b0 + j];
      out[b0 + i] = v;
    }
    for (int j = 0; j < m; ++j) acc += w[b0 + j] * vals[b0 + j];
  }
  return out;
}

CMatrix total_integral(const Quadrature& grid, const std::vector<CMatrix>& vals) {
  CMatrix acc = CMatrix::Zero(vals[0].rows(), vals[0].cols());
  for (std::size_t i = 0; i < vals.size(); ++i) acc += grid.weights()[i] * vals[i];
  return acc;
}

CMatrix c_at(const NodalFactors& f, std::size_t i) {
  CMatrix c(f.F1[i].rows(), f.F1[i].cols() + f.F2[i].cols());
  c << f.F1[i], f.F2[i];
  return c;
}

CMatrix b_at(const NodalFactors& f, std::size_t i) {
  CMatrix b(f.G1[i].rows() + f.G2[i].rows(), f.G1[i].cols());
  b << f.G1[i], -f.G2[i];
  return b;
}

}  // namespace detail

namespace {

struct Setup {
  std::vector<CMatrix> C, B;
  const std::vector<CMatrix>* src;
  double sign;     // -1 for Fhat1, +1 for Fhat2
  bool from_above; // Fhat1 integrates over [x, b]
};

Setup make_setup(const NodalFactors& f, Fhat which) {
  Setup s;
  const std::size_t N = f.F1.size();
  s.C.reserve(N);
  s.B.reserve(N);
  for (std::size_t i = 0; i < N; ++i) {
    s.C.push_back(detail::c_at(f, i));
    s.B.push_back(detail::b_at(f, i));
  }
  s.src = which == Fhat::Fhat1 ? &f.F1 : &f.F2;
  s.sign = which == Fhat::Fhat1 ? -1.0 : 1.0;
  s.from_above = which == Fhat::Fhat1;
  return s;
}

// Applies the discrete right-hand side operator: F + sign alpha C * int B Y.
std::vector<CMatrix> apply(const Setup& s, const Quadrature& grid, Complex alpha,
                           const std::vector<CMatrix>& y) {
  std::vector<CMatrix> by(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) by[i] = s.B[i] * y[i];
  auto ints = detail::partial_integrals(grid, by, s.from_above);
  std::vector<CMatrix> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    out[i] = (*s.src)[i] + (s.sign * alpha) * (s.C[i] * ints[i]);
  return out;
}

double defect(const Setup& s, const Quadrature& grid, Complex alpha,
              const std::vector<CMatrix>& y) {
  auto r = apply(s, grid, alpha, y);
  double worst = 0;
  for (std::size_t i = 0; i < y.size(); ++i) worst = std::max(worst, (r[i] - y[i]).norm());
  return worst;
}

std::vector<CMatrix> back_substitute(const Setup& s, const Quadrature& grid, Complex alpha) {
  const Index N = grid.size();
  const int m = grid.n_per_panel();
  const Index d = s.C[0].rows();
  const Index nj = (*s.src)[0].cols();
  const auto& w = grid.weights();
  std::vector<CMatrix> y(static_cast<std::size_t>(N));
  // Running sum of w B Y over the panels already solved.
  CMatrix tail = CMatrix::Zero(s.B[0].rows(), nj);
  const int P = grid.panels();
  const Complex sa = s.sign * alpha;
  CMatrix A(m * d, m * d), rhs(m * d, nj);
  for (int step = 0; step < P; ++step) {
    const int p = s.from_above ? P - 1 - step : step;
    const Index b0 = grid.panel_begin(p);
    const RMatrix M = s.from_above ? grid.right_partial(p) : grid.left_partial(p);
    for (int i = 0; i < m; ++i) {
      const CMatrix& Ci = s.C[b0 + i];
      for (int j = 0; j < m; ++j) {
        CMatrix blk = (-sa * M(i, j)) * (Ci * s.B[b0 + j]);
        if (i == j) blk += CMatrix::Identity(d, d);
        A.block(i * d, j * d, d, d) = blk;
      }
      rhs.block(i * d, 0, d, nj) = (*s.src)[b0 + i] + sa * (Ci * tail);
    }
    Eigen::PartialPivLU<CMatrix> lu(A);
    CMatrix sol = lu.solve(rhs);
    if (!numerics::all_finite(sol))
      throw NumericalError("solve_volterra: singular panel system");
    for (int i = 0; i < m; ++i) {
      y[b0 + i] = sol.block(i * d, 0, d, nj);
      tail += w[b0 + i] * (s.B[b0 + i] * y[b0 + i]);
    }
  }
  return y;
}

}  // namespace

VolterraSolution solve_volterra(const SemiSeparableKernel& k, const NodalFactors& f,
                                Complex alpha, const Quadrature& grid, Fhat which,
                                VolterraMethod method, const VolterraOptions& opt) {
  if (static_cast<Index>(f.F1.size()) != grid.size())
    throw DimensionError("solve_volterra: samples do not match the grid");
  if (grid.interval().a < k.interval().a - 1e-12 || grid.interval().b > k.interval().b + 1e-12)
    throw DomainError("solve_volterra: grid outside the kernel interval");
  VolterraSolution sol;
  sol.which = which;
  sol.alpha = alpha;
  sol.grid = grid;
  sol.method = method;
  const Setup s = make_setup(f, which);
  if (alpha == Complex(0)) {
    sol.samples = *s.src;
    return sol;
  }
  if (method == VolterraMethod::BackSubstitution) {
    sol.samples = back_substitute(s, grid, alpha);
  } else {
    std::vector<CMatrix> y = *s.src;
    double step = INFINITY;
    bool converged = false;
    int it = 0;
    while (it < opt.max_iter && !converged) {
      auto next = apply(s, grid, alpha, y);
      ++it;
      double diff = 0, scale = 0;
      for (std::size_t i = 0; i < y.size(); ++i) {
        diff = std::max(diff, (next[i] - y[i]).norm());
        scale = std::max(scale, next[i].norm());
      }
      y = std::move(next);
      step = diff;
      if (!std::isfinite(step)) break;
      converged = step <= opt.tol * std::max(1.0, scale);
    }
    if (!converged)
      throw ConvergenceError("solve_volterra: Picard iteration did not converge after " +
                                 std::to_string(it) + " iterations",
                             step);
    sol.samples = std::move(y);
    sol.iterations_used = it;
  }
  sol.residual = defect(s, grid, alpha, sol.samples);
  return sol;
}

VolterraSolution solve_volterra(const SemiSeparableKernel& k, Complex alpha,
                                const Quadrature& grid, Fhat which, VolterraMethod method,
                                const VolterraOptions& opt) {
  return solve_volterra(k, k.sample(grid), alpha, grid, which, method, opt);
}

}  // namespace semisep
