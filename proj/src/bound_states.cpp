#include <algorithm>
#include <cmath>
#include <sstream>

#include "jost_detail.hpp"
#include "semisep/schrodinger.hpp"

namespace semisep {

const char* to_string(CountMethod m) {
  switch (m) {
    case CountMethod::JostZeros: return "JostZeros";
    case CountMethod::BirmanSchwinger: return "BirmanSchwinger";
    case CountMethod::DirectDiag: return "DirectDiag";
  }
  return "?";
}

namespace {

Potential restrict_to(const Potential& v, LineDomain domain) {
  if (domain == v.domain) return v;
  if (domain == LineDomain::FullLine)
    throw DomainError("count_bound_states: half-line potential on the full line");
  Potential h = v;
  h.domain = LineDomain::HalfLine;
  if (h.support) {
    if (h.support->b <= 0) return potentials::zero(v.d, LineDomain::HalfLine);
    h.support->a = std::max(0.0, h.support->a);
  }
  std::vector<double> bp;
  for (double b : h.breakpoints)
    if (b > 0) bp.push_back(b);
  h.breakpoints = bp;
  h.exp_envelope.reset();
  return h;
}

double max_norm(const std::vector<CMatrix>& vs) {
  double m = 0;
  for (const auto& v : vs) m = std::max(m, v.operatorNorm());
  return m;
}

// ------------------------------------------------------------- JostZeros

CountReport jost_zeros(const Potential& v, const CountOptions& opt) {
  CountReport rep;
  rep.method = CountMethod::JostZeros;
  const PotentialGrid pg = make_grid(v, opt.grid);
  const Quadrature& grid = pg.grid;
  const auto vs = detail::sample_potential(v, grid);
  const bool half = v.domain == LineDomain::HalfLine;
  double worst_imag = 0;
  auto f = [&](double kappa) {
    const Complex k{0.0, kappa};
    const auto mp = detail::solve_normalized_jost(vs, k, grid, JostSide::Plus);
    const CMatrix F = half ? detail::m_plus_at_left(vs, k, grid, mp) : detail::jost_b8(vs, k, grid, mp);
    const Complex dt = numerics::det(F);
    worst_imag = std::max(worst_imag, std::abs(dt.imag()) / std::max(1.0, std::abs(dt)));
    return dt.real();
  };
  const double kmax = 1.0 + std::sqrt(max_norm(vs));
  const double kmin = opt.kappa_min;
  const int n = std::max(8, static_cast<int>(std::ceil(opt.points_per_decade * std::log10(kmax / kmin))));
  std::vector<double> ks(n + 1), fs(n + 1);
  for (int i = 0; i <= n; ++i) {
    ks[i] = kmin * std::pow(kmax / kmin, static_cast<double>(i) / n);
    fs[i] = f(ks[i]);
  }
  for (int i = 0; i < n; ++i) {
    if (fs[i] == 0.0) {
      rep.kappas.push_back(ks[i]);
      continue;
    }
    if ((fs[i] < 0) == (fs[i + 1] < 0) || fs[i + 1] == 0.0) continue;
    double lo = ks[i], hi = ks[i + 1], flo = fs[i];
    for (int it = 0; it < 60 && hi - lo > 1e-13 * hi; ++it) {
      const double mid = std::sqrt(lo * hi);
      const double fm = f(mid);
      if ((fm < 0) == (flo < 0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    rep.kappas.push_back(std::sqrt(lo * hi));
    if (i == 0) {
      rep.inconclusive = true;
      rep.notes.push_back("zero of det F bracketed next to kappa_min: possible threshold resonance");
    }
  }
  std::sort(rep.kappas.begin(), rep.kappas.end());
  rep.count = static_cast<int>(rep.kappas.size());
  for (double kp : rep.kappas)
    if (kp < kmin + opt.resonance_window) rep.inconclusive = true;
  if (std::abs(fs[0]) < 1e-6) {
    rep.inconclusive = true;
    rep.notes.push_back("det F nearly vanishes at kappa_min: near-zero-energy resonance");
  }
  if (worst_imag > opt.imag_tol) {
    rep.inconclusive = true;
    std::ostringstream os;
    os << "imaginary residue of det F " << worst_imag << " exceeds " << opt.imag_tol;
    rep.notes.push_back(os.str());
  }
  return rep;
}

// ------------------------------------------------------- BirmanSchwinger

int bs_count(const Potential& v, const Quadrature& grid, double lambda) {
  const Index N = grid.size(), d = v.d;
  const double kap = std::sqrt(lambda);
  const bool half = v.domain == LineDomain::HalfLine;
  std::vector<CMatrix> vroot(N), sgn(N);
  for (Index i = 0; i < N; ++i) {
    const auto e = numerics::herm_eigs(v(grid.nodes()[i]));
    RVector r = e.values.cwiseAbs().cwiseSqrt();
    RVector s = e.values.unaryExpr([](double l) { return l > 0 ? 1.0 : (l < 0 ? -1.0 : 0.0); });
    vroot[i] = std::sqrt(grid.weights()[i]) * e.vectors * r.cast<Complex>().asDiagonal() * e.vectors.adjoint();
    sgn[i] = e.vectors * s.cast<Complex>().asDiagonal() * e.vectors.adjoint();
  }
  auto g0 = [&](double x, double y) {
    if (!half) return std::exp(-kap * std::abs(x - y)) / (2 * kap);
    const double lo = std::min(x, y), hi = std::max(x, y);
    // sinh(kap lo) e^{-kap hi} / kap, written without overflow
    return 0.5 * (std::exp(-kap * (hi - lo)) - std::exp(-kap * (hi + lo))) / kap;
  };
  CMatrix P(N * d, N * d);
  for (Index i = 0; i < N; ++i)
    for (Index j = 0; j <= i; ++j) {
      const CMatrix blk = g0(grid.nodes()[i], grid.nodes()[j]) * (vroot[i] * vroot[j]);
      P.block(i * d, j * d, d, d) = blk;
      P.block(j * d, i * d, d, d) = blk.adjoint();
    }
  bool attractive = true;
  for (const auto& s : sgn)
    attractive = attractive && (s + CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-12;
  CMatrix Q;
  if (attractive) {
    Q = P;
  } else {
    const auto e = numerics::herm_eigs(P, 1e-8);
    RVector r = e.values.unaryExpr([](double l) { return l > 0 ? std::sqrt(l) : 0.0; });
    const CMatrix root = e.vectors * r.cast<Complex>().asDiagonal() * e.vectors.adjoint();
    CMatrix S = CMatrix::Zero(N * d, N * d);
    for (Index i = 0; i < N; ++i) S.block(i * d, i * d, d, d) = sgn[i];
    Q = -(root * S * root);
    Q = 0.5 * (Q + Q.adjoint());
  }
  const auto e = numerics::herm_eigs(Q, 1e-8);
  int count = 0;
  for (Index i = 0; i < e.values.size(); ++i)
    if (e.values(i) > 1.0) ++count;
  return count;
}

CountReport birman_schwinger(const Potential& v, const CountOptions& opt) {
  CountReport rep;
  rep.method = CountMethod::BirmanSchwinger;
  const Quadrature grid = make_grid(v, opt.grid).grid;
  rep.count = bs_count(v, grid, opt.bs_lambda);
  if (opt.bs_lambda_check > 0) {
    const int alt = bs_count(v, grid, opt.bs_lambda_check);
    if (alt != rep.count) {
      rep.inconclusive = true;
      std::ostringstream os;
      os << "count changes from " << rep.count << " to " << alt << " between lambda = "
         << opt.bs_lambda << " and " << opt.bs_lambda_check;
      rep.notes.push_back(os.str());
    }
  }
  return rep;
}

// ------------------------------------------------------------ DirectDiag

CountReport direct_diag(const Potential& v, const CountOptions& opt) {
  CountReport rep;
  rep.method = CountMethod::DirectDiag;
  const Interval core = make_grid(v, opt.grid).grid.interval();
  const bool half = v.domain == LineDomain::HalfLine;
  const double a = half ? 0.0 : core.a, b = core.b;
  const int ncore = std::max(4, static_cast<int>(std::ceil((b - a) / opt.fd_h)));
  const double h0 = (b - a) / ncore;
  std::vector<double> xs;  // all nodes including the two Dirichlet ends
  std::vector<double> left;
  if (!half) {
    double x = a, h = h0;
    while (a - x < opt.fd_pad) {
      h = std::min(h * opt.fd_growth, opt.fd_hmax);
      x -= h;
      left.push_back(x);
    }
  }
  xs.assign(left.rbegin(), left.rend());
  for (int i = 0; i <= ncore; ++i) xs.push_back(a + i * h0);
  {
    double x = b, h = h0;
    while (x - b < opt.fd_pad) {
      h = std::min(h * opt.fd_growth, opt.fd_hmax);
      x += h;
      xs.push_back(x);
    }
  }
  const Index d = v.d;
  const std::size_t M = xs.size();
  // Dual-cell averages of V, two-point Gauss on each half cell.
  const double g = 0.5 / std::sqrt(3.0);
  auto cell_avg = [&](std::size_t i) {
    const double hl = xs[i] - xs[i - 1], hr = xs[i + 1] - xs[i];
    const double l0 = xs[i] - 0.5 * hl;
    CMatrix acc = CMatrix::Zero(d, d);
    for (double t : {0.5 - g, 0.5 + g}) {
      acc += (0.25 * hl) * v(l0 + t * 0.5 * hl);
      acc += (0.25 * hr) * v(xs[i] + t * 0.5 * hr);
    }
    return CMatrix(acc);  // integral over the dual cell
  };
  const double sigma = -opt.lambda_cut;
  int negatives = 0;
  CMatrix Dprev;
  double hprev = 0;
  for (std::size_t i = 1; i + 1 < M; ++i) {
    const double hl = xs[i] - xs[i - 1], hr = xs[i + 1] - xs[i];
    const double mi = 0.5 * (hl + hr);
    CMatrix Di = cell_avg(i);
    Di += (1.0 / hl + 1.0 / hr - sigma * mi) * CMatrix::Identity(d, d);
    if (i > 1) Di -= (1.0 / (hprev * hprev)) * Dprev.partialPivLu().inverse();
    Di = 0.5 * (Di + Di.adjoint());
    const auto e = numerics::herm_eigs(Di, 1e-6);
    for (Index k = 0; k < d; ++k) {
      if (e.values(k) < 0) ++negatives;
      if (e.values(k) == 0) {
        rep.inconclusive = true;
        rep.notes.push_back("exactly singular pivot in the inertia count");
      }
    }
    Dprev = Di;
    hprev = hr;
  }
  rep.count = negatives;
  return rep;
}

}  // namespace

CountReport count_bound_states_report(const Potential& v_in, LineDomain domain,
                                      CountMethod method, const CountOptions& opt) {
  if (!v_in.hermitian)
    throw ContractError("count_bound_states: potential is not Hermitian, bound-state count undefined");
  const Potential v = restrict_to(v_in, domain);
  switch (method) {
    case CountMethod::JostZeros: return jost_zeros(v, opt);
    case CountMethod::BirmanSchwinger: return birman_schwinger(v, opt);
    case CountMethod::DirectDiag: return direct_diag(v, opt);
  }
  throw ContractError("count_bound_states: unknown method");
}

int count_bound_states(const Potential& v, LineDomain domain, CountMethod method,
                       const CountOptions& opt) {
  return count_bound_states_report(v, domain, method, opt).count;
}

std::vector<CountReport> count_bound_states_all(const Potential& v, LineDomain domain,
                                                const CountOptions& opt) {
  std::vector<CountReport> r;
  for (auto m : {CountMethod::JostZeros, CountMethod::BirmanSchwinger, CountMethod::DirectDiag})
    r.push_back(count_bound_states_report(v, domain, m, opt));
  if (r[0].count != r[1].count || r[1].count != r[2].count) {
    std::ostringstream os;
    os << "count_bound_states: methods disagree (";
    for (std::size_t i = 0; i < r.size(); ++i)
      os << (i ? ", " : "") << to_string(r[i].method) << " = " << r[i].count;
    os << ")";
    throw CountDisagreement(os.str(), r);
  }
  return r;
}

}  // namespace semisep
