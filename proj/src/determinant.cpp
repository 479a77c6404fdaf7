#include <cmath>
#include <sstream>

#include "detail.hpp"
#include "semisep/reduction.hpp"

namespace semisep {

const char* to_string(DetRoute r) {
  switch (r) {
    case DetRoute::ReducedH1: return "ReducedH1";
    case DetRoute::ReducedH2: return "ReducedH2";
    case DetRoute::PropagatorA: return "PropagatorA";
    case DetRoute::PropagatorB: return "PropagatorB";
    case DetRoute::Nystrom: return "Nystrom";
  }
  return "?";
}

const char* to_string(DetKind k) { return k == DetKind::Det1 ? "det1" : "det2"; }

namespace {

struct RouteFactors {
  Complex h1, pa, h2, pb;  // determinants without exponential factors
  Complex tr1, tr2;        // quadratures of tr(F1 G1), tr(F2 G2)
};

RouteFactors route_factors(const SemiSeparableKernel& k, Complex alpha, const Quadrature& grid,
                           const DetOptions& opt) {
  const NodalFactors f = k.sample(grid);
  RouteFactors r{};
  const auto& w = grid.weights();
  for (std::size_t i = 0; i < w.size(); ++i) {
    r.tr1 += w[i] * (f.F1[i] * f.G1[i]).trace();
    r.tr2 += w[i] * (f.F2[i] * f.G2[i]).trace();
  }
  auto s1 = solve_volterra(k, f, alpha, grid, Fhat::Fhat1, opt.method, opt.volterra);
  auto s2 = solve_volterra(k, f, alpha, grid, Fhat::Fhat2, opt.method, opt.volterra);
  PropagatorU u = propagator_closed_form(k, f, s1, s2);
  const Index n1 = k.n1(), n2 = k.n2();
  r.h1 = numerics::det(u.at_a().topLeftCorner(n1, n1));
  r.h2 = numerics::det(u.at_b().bottomRightCorner(n2, n2));
  r.pa = numerics::det(u.at_a());
  r.pb = numerics::det(u.at_b());
  return r;
}

double spread_of(const std::map<DetRoute, Complex>& routes) {
  double s = 0;
  for (auto i = routes.begin(); i != routes.end(); ++i)
    for (auto j = std::next(i); j != routes.end(); ++j)
      s = std::max(s, numerics::rel_diff(i->second, j->second));
  return s;
}

void finish(DetResult& res, const DetOptions& opt) {
  res.value = res.routes.at(DetRoute::ReducedH1);
  res.route = DetRoute::ReducedH1;
  res.cross_route_spread = spread_of(res.routes);
  if (res.cross_route_spread > opt.consistency_tol) {
    res.consistent = false;
    std::ostringstream os;
    os << "cross-route spread " << res.cross_route_spread << " exceeds " << opt.consistency_tol;
    res.warnings.push_back(os.str());
  }
}

}  // namespace

DetResult det2_semiseparable(const SemiSeparableKernel& k, Complex alpha, const Quadrature& grid,
                             const DetOptions& opt) {
  const RouteFactors r = route_factors(k, alpha, grid, opt);
  DetResult res;
  res.kind = DetKind::Det2;
  res.alpha = alpha;
  res.grid_nodes = grid.size();
  res.trace_F1G1 = r.tr1;
  res.trace_F2G2 = r.tr2;
  res.trace_K = 0.5 * (r.tr1 + r.tr2);
  const Complex e1 = std::exp(alpha * r.tr1), e2 = std::exp(alpha * r.tr2);
  res.routes[DetRoute::ReducedH1] = r.h1 * e1;
  res.routes[DetRoute::PropagatorA] = r.pa * e1;
  res.routes[DetRoute::ReducedH2] = r.h2 * e2;
  res.routes[DetRoute::PropagatorB] = r.pb * e2;
  finish(res, opt);
  return res;
}

DetResult det1_semiseparable(const SemiSeparableKernel& k, Complex alpha, const Quadrature& grid,
                             const DetOptions& opt) {
  const RouteFactors r = route_factors(k, alpha, grid, opt);
  DetResult res;
  res.kind = DetKind::Det1;
  res.alpha = alpha;
  res.grid_nodes = grid.size();
  res.trace_F1G1 = r.tr1;
  res.trace_F2G2 = r.tr2;
  res.trace_K = 0.5 * (r.tr1 + r.tr2);
  res.routes[DetRoute::ReducedH1] = r.h1;
  res.routes[DetRoute::PropagatorA] = r.pa;
  res.routes[DetRoute::ReducedH2] = r.h2;
  res.routes[DetRoute::PropagatorB] = r.pb;
  finish(res, opt);
  const double tdiff = std::abs(r.tr1 - r.tr2);
  if (tdiff > opt.trace_tol * std::max(1.0, std::abs(res.trace_K))) {
    res.reliable = false;
    std::ostringstream os;
    os << "trace mismatch |int tr(F1G1) - int tr(F2G2)| = " << tdiff
       << ": branches disagree on the diagonal, det1 unreliable";
    res.warnings.push_back(os.str());
  }
  const Complex det2 = r.h1 * std::exp(alpha * r.tr1);
  res.bridge_defect = numerics::rel_diff(res.value, det2 * std::exp(-alpha * res.trace_K));
  return res;
}

}  // namespace semisep
