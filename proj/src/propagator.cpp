#include "detail.hpp"
#include "semisep/reduction.hpp"

namespace semisep {

namespace {

// One RK4 step of U' = alpha A(x) U.
void rk4_step(const SemiSeparableKernel& k, Complex alpha, double x0, double h, CMatrix& u) {
  const CMatrix A0 = alpha * k.block_A(x0);
  const CMatrix Am = alpha * k.block_A(x0 + 0.5 * h);
  const CMatrix A1 = alpha * k.block_A(x0 + h);
  const CMatrix k1 = A0 * u;
  const CMatrix k2 = Am * (u + (0.5 * h) * k1);
  const CMatrix k3 = Am * (u + (0.5 * h) * k2);
  const CMatrix k4 = A1 * (u + h * k3);
  u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

CMatrix propagate(const SemiSeparableKernel& k, Complex alpha, double x_from, double x_to,
                  int steps) {
  if (steps < 1) throw DomainError("propagate: steps must be positive");
  CMatrix u = CMatrix::Identity(k.n(), k.n());
  if (alpha == Complex(0) || x_from == x_to) return u;
  const double h = (x_to - x_from) / steps;
  for (int s = 0; s < steps; ++s) rk4_step(k, alpha, x_from + s * h, h, u);
  return u;
}

PropagatorU propagator_closed_form(const SemiSeparableKernel& k, const NodalFactors& f,
                                   const VolterraSolution& fhat1, const VolterraSolution& fhat2) {
  if (fhat1.alpha != fhat2.alpha) throw ContractError("propagator: mismatched alpha");
  const Quadrature& grid = fhat1.grid;
  const Complex alpha = fhat1.alpha;
  const Index n1 = k.n1(), n2 = k.n2(), n = k.n();
  const std::size_t N = static_cast<std::size_t>(grid.size());
  std::vector<CMatrix> g1f1(N), g2f1(N), g1f2(N), g2f2(N);
  for (std::size_t i = 0; i < N; ++i) {
    g1f1[i] = f.G1[i] * fhat1.samples[i];
    g2f1[i] = f.G2[i] * fhat1.samples[i];
    g1f2[i] = f.G1[i] * fhat2.samples[i];
    g2f2[i] = f.G2[i] * fhat2.samples[i];
  }
  auto i11 = detail::partial_integrals(grid, g1f1, true);
  auto i21 = detail::partial_integrals(grid, g2f1, true);
  auto i12 = detail::partial_integrals(grid, g1f2, false);
  auto i22 = detail::partial_integrals(grid, g2f2, false);
  const CMatrix t11 = detail::total_integral(grid, g1f1);
  const CMatrix t21 = detail::total_integral(grid, g2f1);
  const CMatrix t12 = detail::total_integral(grid, g1f2);
  const CMatrix t22 = detail::total_integral(grid, g2f2);

  auto assemble = [&](const CMatrix& a11, const CMatrix& a12, const CMatrix& a21,
                      const CMatrix& a22) {
    CMatrix u(n, n);
    u.topLeftCorner(n1, n1) = CMatrix::Identity(n1, n1) - alpha * a11;
    u.topRightCorner(n1, n2) = alpha * a12;
    u.bottomLeftCorner(n2, n1) = alpha * a21;
    u.bottomRightCorner(n2, n2) = CMatrix::Identity(n2, n2) - alpha * a22;
    return u;
  };
  PropagatorU p;
  p.alpha = alpha;
  p.route = PropagatorRoute::ClosedForm_A37;
  p.n1 = n1;
  p.n2 = n2;
  p.x.reserve(N + 2);
  p.U.reserve(N + 2);
  p.x.push_back(grid.interval().a);
  p.U.push_back(assemble(t11, CMatrix::Zero(n1, n2), t21, CMatrix::Zero(n2, n2)));
  for (std::size_t i = 0; i < N; ++i) {
    p.x.push_back(grid.nodes()[i]);
    p.U.push_back(assemble(i11[i], i12[i], i21[i], i22[i]));
  }
  p.x.push_back(grid.interval().b);
  p.U.push_back(assemble(CMatrix::Zero(n1, n1), t12, CMatrix::Zero(n2, n1), t22));
  return p;
}

PropagatorU propagator(const SemiSeparableKernel& k, Complex alpha, const Quadrature& grid,
                       PropagatorRoute route, int ode_substeps) {
  if (route == PropagatorRoute::ClosedForm_A37) {
    const NodalFactors f = k.sample(grid);
    auto s1 = solve_volterra(k, f, alpha, grid, Fhat::Fhat1);
    auto s2 = solve_volterra(k, f, alpha, grid, Fhat::Fhat2);
    return propagator_closed_form(k, f, s1, s2);
  }
  if (ode_substeps < 1) throw DomainError("propagator: substeps must be positive");
  PropagatorU p;
  p.alpha = alpha;
  p.route = PropagatorRoute::ODE_A36a;
  p.n1 = k.n1();
  p.n2 = k.n2();
  p.x.push_back(grid.interval().a);
  for (double x : grid.nodes()) p.x.push_back(x);
  p.x.push_back(grid.interval().b);
  CMatrix u = CMatrix::Identity(k.n(), k.n());
  p.U.push_back(u);
  for (std::size_t i = 1; i < p.x.size(); ++i) {
    const double h = (p.x[i] - p.x[i - 1]) / ode_substeps;
    if (alpha != Complex(0))
      for (int s = 0; s < ode_substeps; ++s) rk4_step(k, alpha, p.x[i - 1] + s * h, h, u);
    p.U.push_back(u);
  }
  return p;
}

}  // namespace semisep
