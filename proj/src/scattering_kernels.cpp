#include <cmath>
#include <memory>

#include "jost_detail.hpp"
#include "semisep/schrodinger.hpp"

namespace semisep {

namespace {

struct Factors {
  std::function<CMatrix(double)> u, v;
};

Factors polar_of(const Potential& pot) {
  auto p = std::make_shared<Potential>(pot);
  return {[p](double x) { return numerics::polar_factor((*p)(x)).u; },
          [p](double x) { return numerics::polar_factor((*p)(x)).v; }};
}

void require_off_cut(const SpectralPoint& z, const char* who) {
  if (z.k.imag() <= 0) throw DomainError(std::string(who) + ": z must lie off [0, inf)");
}

}  // namespace

SemiSeparableKernel build_K_fullline(const Potential& pot, const SpectralPoint& z,
                                     const Quadrature& grid) {
  require_off_cut(z, "build_K_fullline");
  const Index d = pot.d;
  const Interval iv = grid.interval();
  const Complex k = z.k;
  const Complex c = I_unit / (2.0 * k);
  auto [u, v] = polar_of(pot);
  return SemiSeparableKernel(
      OperatorFunction(d, d, iv, [u, k](double x) { return CMatrix(-u(x) * std::exp(I_unit * k * x)); }),
      OperatorFunction(d, d, iv, [v, k, c](double x) { return CMatrix(c * std::exp(-I_unit * k * x) * v(x)); }),
      OperatorFunction(d, d, iv, [u, k](double x) { return CMatrix(-u(x) * std::exp(-I_unit * k * x)); }),
      OperatorFunction(d, d, iv, [v, k, c](double x) { return CMatrix(c * std::exp(I_unit * k * x) * v(x)); }));
}

SemiSeparableKernel build_Ktilde_system(const Potential& pot, const SpectralPoint& z,
                                        const Quadrature& grid) {
  if (z.z == Complex(0) || z.k.imag() < 0)
    throw DomainError("build_Ktilde_system: need z != 0 and Im k >= 0");
  const Index d = pot.d;
  const Interval iv = grid.interval();
  const Complex k = z.k;
  const Complex c = I_unit / (2.0 * k);
  auto [u, v] = polar_of(pot);
  // f_{1,2} = -[u; +-ik u] e^{+-ikx}, g_{1,2} = [(i/2k) e^{-+ikx} v, 0]
  auto f = [u, k, d](double sgn) {
    return [u, k, d, sgn](double x) {
      CMatrix m(2 * d, d);
      const CMatrix ux = u(x);
      const Complex e = std::exp(sgn * I_unit * k * x);
      m.topRows(d) = -e * ux;
      m.bottomRows(d) = -(sgn * I_unit * k * e) * ux;
      return m;
    };
  };
  auto g = [v, k, c, d](double sgn) {
    return [v, k, c, d, sgn](double x) {
      CMatrix m = CMatrix::Zero(d, 2 * d);
      m.leftCols(d) = (c * std::exp(-sgn * I_unit * k * x)) * v(x);
      return m;
    };
  };
  return SemiSeparableKernel(OperatorFunction(2 * d, d, iv, f(1.0)),
                             OperatorFunction(d, 2 * d, iv, g(1.0)),
                             OperatorFunction(2 * d, d, iv, f(-1.0)),
                             OperatorFunction(d, 2 * d, iv, g(-1.0)));
}

SemiSeparableKernel build_K_halfline(const Potential& pot, const SpectralPoint& z,
                                     const Quadrature& grid) {
  require_off_cut(z, "build_K_halfline");
  if (grid.interval().a < 0) throw DomainError("build_K_halfline: grid must lie in [0, inf)");
  const Index d = pot.d;
  const Interval iv = grid.interval();
  const Complex k = z.k;
  auto [u, v] = polar_of(pot);
  // x' < x: sin(kx')/k e^{ikx};  x < x': sin(kx)/k e^{ikx'}
  return SemiSeparableKernel(
      OperatorFunction(d, d, iv, [u, k](double x) { return CMatrix(-u(x) * std::exp(I_unit * k * x)); }),
      OperatorFunction(d, d, iv, [v, k](double x) { return CMatrix((std::sin(k * x) / k) * v(x)); }),
      OperatorFunction(d, d, iv, [u, k](double x) { return CMatrix(-(std::sin(k * x) / k) * u(x)); }),
      OperatorFunction(d, d, iv, [v, k](double x) { return CMatrix(std::exp(I_unit * k * x) * v(x)); }));
}

TB2Result theorem_tB2_check(const Potential& v, const SpectralPoint& z, const Quadrature& grid) {
  const SemiSeparableKernel K = build_K_fullline(v, z, grid);
  TB2Result r;
  r.lhs = det1_semiseparable(K, 1.0, grid).value;
  r.rhs = numerics::det(jost_function(v, z, grid, JostRoute::ViaB8));
  return r;
}

TB3Result theorem_tB3_check(const Potential& v, const SpectralPoint& z, const Quadrature& grid) {
  TB3Result r;
  r.d2_system = det2_semiseparable(build_Ktilde_system(v, z, grid), 1.0, grid).value;
  r.d2_K = det2_semiseparable(build_K_fullline(v, z, grid), 1.0, grid).value;
  const auto vs = detail::sample_potential(v, grid);
  Complex trv = 0;
  for (std::size_t i = 0; i < vs.size(); ++i) trv += grid.weights()[i] * vs[i].trace();
  r.jost_side = numerics::det(jost_function(v, z, grid, JostRoute::ViaB8)) *
                std::exp(-I_unit / (2.0 * z.k) * trv);
  return r;
}

}  // namespace semisep
