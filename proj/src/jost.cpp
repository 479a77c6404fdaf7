#include <cmath>
#include <sstream>

#include "jost_detail.hpp"
#include "semisep/schrodinger.hpp"

namespace semisep {

const char* to_string(JostRoute r) {
  switch (r) {
    case JostRoute::ViaB8: return "ViaB8";
    case JostRoute::ViaB8a: return "ViaB8a";
    case JostRoute::ViaWronskian: return "ViaWronskian";
  }
  return "?";
}

namespace detail {

std::vector<CMatrix> sample_potential(const Potential& v, const Quadrature& grid) {
  std::vector<CMatrix> out;
  out.reserve(grid.nodes().size());
  for (double x : grid.nodes()) out.push_back(v(x));
  return out;
}

// m_+(x) = I - int_x^b (1 - e^{2ik(x'-x)})/(2ik) V m_+ dx'
// m_-(x) = I + int_a^x (e^{2ik(x-x')} - 1)/(2ik) V m_- dx'
// The separable split of the exponential is carried with a reference
// point at the current panel edge so that no factor ever exceeds one.
std::vector<CMatrix> solve_normalized_jost(const std::vector<CMatrix>& vs, Complex k,
                                           const Quadrature& grid, JostSide which) {
  const Index d = vs[0].rows();
  const int m = grid.n_per_panel();
  const int P = grid.panels();
  const auto& x = grid.nodes();
  const auto& w = grid.weights();
  const Complex tik = 2.0 * I_unit * k;
  const bool plus = which == JostSide::Plus;
  std::vector<CMatrix> sol(x.size());
  CMatrix T0 = CMatrix::Zero(d, d), T1 = CMatrix::Zero(d, d);
  const CMatrix eye = CMatrix::Identity(d, d);
  CMatrix A(m * d, m * d), rhs(m * d, d);
  auto g = [&](double t) {
    return plus ? (1.0 - std::exp(tik * t)) / tik : (std::exp(tik * t) - 1.0) / tik;
  };
  for (int step = 0; step < P; ++step) {
    const int p = plus ? P - 1 - step : step;
    const Index b0 = grid.panel_begin(p);
    const double ref = plus ? grid.panel_hi(p) : grid.panel_lo(p);
    const RMatrix M = plus ? grid.right_partial(p) : grid.left_partial(p);
    for (int i = 0; i < m; ++i) {
      const double xi = x[b0 + i];
      // contribution of panels already solved
      CMatrix tail;
      if (plus)
        tail = (T0 - std::exp(tik * (ref - xi)) * T1) / tik;
      else
        tail = (std::exp(tik * (xi - ref)) * T1 - T0) / tik;
      const double sgn = plus ? 1.0 : -1.0;
      for (int j = 0; j < m; ++j) {
        const double t = plus ? x[b0 + j] - xi : xi - x[b0 + j];
        // g is entire: nodes on the wrong side of x_i enter the panel
        // interpolant through its analytic continuation.
        CMatrix blk = (sgn * M(i, j) * g(t)) * vs[b0 + j];
        if (i == j) blk += eye;
        A.block(i * d, j * d, d, d) = blk;
      }
      rhs.block(i * d, 0, d, d) = plus ? CMatrix(eye - tail) : CMatrix(eye + tail);
    }
    CMatrix y = Eigen::PartialPivLU<CMatrix>(A).solve(rhs);
    if (!numerics::all_finite(y)) throw NumericalError("jost_solution: singular panel system");
    const double next_ref = plus ? grid.panel_lo(p) : grid.panel_hi(p);
    const Complex shift = std::exp(tik * std::abs(ref - next_ref));
    T1 *= shift;
    for (int i = 0; i < m; ++i) {
      sol[b0 + i] = y.block(i * d, 0, d, d);
      const CMatrix vm = w[b0 + i] * (vs[b0 + i] * sol[b0 + i]);
      T0 += vm;
      const double dist = plus ? x[b0 + i] - next_ref : next_ref - x[b0 + i];
      T1 += std::exp(tik * dist) * vm;
    }
  }
  return sol;
}

double jost_defect(const std::vector<CMatrix>& vs, Complex k, const Quadrature& grid,
                   JostSide which, const std::vector<CMatrix>& sol) {
  // Direct O(N^2) evaluation of the discrete operator, independent of the
  // separable bookkeeping above.
  const Index N = grid.size();
  const auto& x = grid.nodes();
  const auto& w = grid.weights();
  const Complex tik = 2.0 * I_unit * k;
  const bool plus = which == JostSide::Plus;
  const Index d = vs[0].rows();
  double worst = 0;
  std::vector<RMatrix> mats(grid.panels());
  for (int p = 0; p < grid.panels(); ++p) mats[p] = plus ? grid.right_partial(p) : grid.left_partial(p);
  for (Index i = 0; i < N; ++i) {
    const int pi = grid.panel_of(i);
    CMatrix acc = CMatrix::Zero(d, d);
    for (Index j = 0; j < N; ++j) {
      const int pj = grid.panel_of(j);
      double wt;
      if (pj == pi) wt = mats[pi](i - grid.panel_begin(pi), j - grid.panel_begin(pj));
      else if ((plus && pj > pi) || (!plus && pj < pi)) wt = w[j];
      else continue;
      const double t = plus ? x[j] - x[i] : x[i] - x[j];
      const Complex gv = plus ? (1.0 - std::exp(tik * t)) / tik : (std::exp(tik * t) - 1.0) / tik;
      acc += (wt * gv) * (vs[j] * sol[j]);
    }
    const CMatrix r = plus ? CMatrix(CMatrix::Identity(d, d) - acc)
                           : CMatrix(CMatrix::Identity(d, d) + acc);
    worst = std::max(worst, (r - sol[i]).norm());
  }
  return worst;
}

CMatrix jost_b8(const std::vector<CMatrix>& vs, Complex k, const Quadrature& grid,
                const std::vector<CMatrix>& mplus) {
  const Index d = vs[0].rows();
  CMatrix acc = CMatrix::Zero(d, d);
  for (std::size_t i = 0; i < vs.size(); ++i) acc += grid.weights()[i] * (vs[i] * mplus[i]);
  return CMatrix::Identity(d, d) - acc / (2.0 * I_unit * k);
}

}  // namespace detail

JostData jost_solution(const Potential& v, const SpectralPoint& z, JostSide which,
                       const Quadrature& grid) {
  JostData jd;
  jd.which = which;
  jd.z = z;
  jd.grid = grid;
  const auto vs = detail::sample_potential(v, grid);
  jd.m = detail::solve_normalized_jost(vs, z.k, grid, which);
  jd.residual = detail::jost_defect(vs, z.k, grid, which, jd.m);
  const double sgn = which == JostSide::Plus ? 1.0 : -1.0;
  double reach = std::max(std::abs(grid.interval().a), std::abs(grid.interval().b));
  if (std::abs(z.k.imag()) * reach < 600) {
    jd.samples.reserve(jd.m.size());
    for (std::size_t i = 0; i < jd.m.size(); ++i)
      jd.samples.push_back(std::exp(sgn * I_unit * z.k * grid.nodes()[i]) * jd.m[i]);
  }
  return jd;
}

JostRoutes jost_function_all(const Potential& v, const SpectralPoint& z, const Quadrature& grid,
                             double tol) {
  const auto vs = detail::sample_potential(v, grid);
  const Index d = v.d;
  const Complex k = z.k;
  const SpectralPoint zb = z.conjugate();
  const auto mplus = detail::solve_normalized_jost(vs, k, grid, JostSide::Plus);
  const auto mminus = detail::solve_normalized_jost(vs, zb.k, grid, JostSide::Minus);
  JostRoutes r;
  r.b8 = detail::jost_b8(vs, k, grid, mplus);
  CMatrix acc = CMatrix::Zero(d, d);
  for (std::size_t i = 0; i < vs.size(); ++i)
    acc += grid.weights()[i] * (mminus[i].adjoint() * vs[i]);
  r.b8a = CMatrix::Identity(d, d) - acc / (2.0 * I_unit * k);

  // Wronskian at the node nearest the middle of the grid.
  const double mid = 0.5 * (grid.interval().a + grid.interval().b);
  Index i0 = 0;
  for (Index i = 0; i < grid.size(); ++i)
    if (std::abs(grid.nodes()[i] - mid) < std::abs(grid.nodes()[i0] - mid)) i0 = i;
  const int p = grid.panel_of(i0);
  const Index b0 = grid.panel_begin(p);
  const RMatrix D = grid.differentiation(p);
  CMatrix dp = CMatrix::Zero(d, d), dm = CMatrix::Zero(d, d);
  for (int j = 0; j < grid.n_per_panel(); ++j) {
    dp += D(i0 - b0, j) * mplus[b0 + j];
    dm += D(i0 - b0, j) * mminus[b0 + j].adjoint();
  }
  const CMatrix ms = mminus[i0].adjoint();
  r.wronskian = ms * mplus[i0] + (ms * dp - dm * mplus[i0]) / (2.0 * I_unit * k);
  r.spread = std::max({(r.b8 - r.b8a).norm(), (r.b8 - r.wronskian).norm(),
                       (r.b8a - r.wronskian).norm()});
  if (r.spread > tol) {
    std::ostringstream os;
    os << "jost_function: routes disagree at z = " << z.z << " (spread " << r.spread
       << "): det ViaB8 = " << numerics::det(r.b8) << ", det ViaB8a = " << numerics::det(r.b8a)
       << ", det ViaWronskian = " << numerics::det(r.wronskian);
    throw JostRouteError(os.str(), r);
  }
  return r;
}

CMatrix jost_function(const Potential& v, const SpectralPoint& z, const Quadrature& grid,
                      JostRoute route) {
  if (route == JostRoute::ViaB8) {
    const auto vs = detail::sample_potential(v, grid);
    const auto mplus = detail::solve_normalized_jost(vs, z.k, grid, JostSide::Plus);
    return detail::jost_b8(vs, z.k, grid, mplus);
  }
  const JostRoutes r = jost_function_all(v, z, grid, INFINITY);
  return route == JostRoute::ViaB8a ? r.b8a : r.wronskian;
}

CMatrix halfline_jost_value(const Potential& v, const SpectralPoint& z, const Quadrature& grid) {
  if (grid.interval().a != 0.0) throw DomainError("halfline_jost_value: grid must start at 0");
  const auto vs = detail::sample_potential(v, grid);
  const auto mplus = detail::solve_normalized_jost(vs, z.k, grid, JostSide::Plus);
  return detail::m_plus_at_left(vs, z.k, grid, mplus);
}

namespace detail {

CMatrix m_plus_at_left(const std::vector<CMatrix>& vs, Complex k, const Quadrature& grid,
                       const std::vector<CMatrix>& mplus) {
  const Index d = vs[0].rows();
  const Complex tik = 2.0 * I_unit * k;
  const double a = grid.interval().a;
  CMatrix acc = CMatrix::Zero(d, d);
  for (std::size_t j = 0; j < vs.size(); ++j) {
    const double t = grid.nodes()[j] - a;
    acc += (grid.weights()[j] * (1.0 - std::exp(tik * t)) / tik) * (vs[j] * mplus[j]);
  }
  return CMatrix::Identity(d, d) - acc;
}

}  // namespace detail

}  // namespace semisep
