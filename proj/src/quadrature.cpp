#include "semisep/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace semisep {

bool Interval::finite() const { return std::isfinite(a) && std::isfinite(b); }

namespace {

// P_0..P_{n} at t.
void legendre_all(int n, double t, std::vector<double>& p) {
  p.assign(n + 1, 0.0);
  p[0] = 1.0;
  if (n >= 1) p[1] = t;
  for (int k = 1; k < n; ++k) p[k + 1] = ((2.0 * k + 1) * t * p[k] - k * p[k - 1]) / (k + 1);
}

RMatrix barycentric_diff(const std::vector<double>& t) {
  const int n = static_cast<int>(t.size());
  std::vector<double> lam(n, 1.0);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      if (k != j) lam[j] /= (t[j] - t[k]);
  RMatrix d = RMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double diag = 0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      d(i, j) = (lam[j] / lam[i]) / (t[i] - t[j]);
      diag -= d(i, j);
    }
    d(i, i) = diag;
  }
  return d;
}

void fill_reference(int n, Scheme scheme, std::vector<double>& x, std::vector<double>& w,
                    RMatrix& left, RMatrix& diff) {
  if (scheme == Scheme::GaussLegendre) {
    gauss_legendre(n, x, w);
    // Lagrange basis l_j(t) = w_j sum_k (2k+1)/2 P_k(t_j) P_k(t), exact by
    // discrete orthogonality of the Gauss rule.
    RMatrix pj(n, n), qi(n, n);
    std::vector<double> p;
    for (int j = 0; j < n; ++j) {
      legendre_all(n, x[j], p);
      for (int k = 0; k < n; ++k) pj(j, k) = p[k];
      // int_{-1}^{t} P_k = (P_{k+1} - P_{k-1}) / (2k+1), k >= 1
      qi(j, 0) = x[j] + 1.0;
      for (int k = 1; k < n; ++k) qi(j, k) = (p[k + 1] - p[k - 1]) / (2.0 * k + 1);
    }
    left.resize(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0;
        for (int k = 0; k < n; ++k) s += (2.0 * k + 1) / 2.0 * pj(j, k) * qi(i, k);
        left(i, j) = w[j] * s;
      }
  } else {
    x.resize(n);
    w.assign(n, 2.0 / n);
    for (int i = 0; i < n; ++i) x[i] = -1.0 + (2.0 * i + 1.0) / n;
    left = RMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < i; ++j) left(i, j) = 2.0 / n;
      left(i, i) = 1.0 / n;
    }
  }
  diff = barycentric_diff(x);
}

}  // namespace

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  if (n < 1) throw DomainError("gauss_legendre: n must be positive");
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = t;
      for (int k = 1; k < n; ++k) {
        double p2 = ((2.0 * k + 1) * t * p1 - k * p0) / (k + 1);
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) { p1 = t; p0 = 1; }
      dp = n * (t * p1 - p0) / (t * t - 1);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    {
      double p0 = 1, p1 = t;
      for (int k = 1; k < n; ++k) {
        double p2 = ((2.0 * k + 1) * t * p1 - k * p0) / (k + 1);
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) { p1 = t; p0 = 1; }
      dp = n * (t * p1 - p0) / (t * t - 1);
    }
    x[i] = -t;
    x[n - 1 - i] = t;
    w[i] = w[n - 1 - i] = 2.0 / ((1 - t * t) * dp * dp);
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
}

Quadrature build_grid_breaks(const std::vector<double>& breaks, int n_per_panel, Scheme scheme) {
  if (breaks.size() < 2) throw DomainError("build_grid: need at least one panel");
  // One midpoint per panel is the plain composite midpoint rule.
  if (n_per_panel < (scheme == Scheme::Trapezoid ? 1 : 2))
    throw DomainError("build_grid: n_per_panel must be >= 2 (>= 1 for the midpoint rule)");
  for (double b : breaks)
    if (!std::isfinite(b)) throw DomainError("build_grid: infinite endpoint, truncate first");
  for (std::size_t i = 1; i < breaks.size(); ++i)
    if (!(breaks[i] > breaks[i - 1])) throw DomainError("build_grid: breakpoints must increase");

  Quadrature q;
  q.interval_ = {breaks.front(), breaks.back()};
  q.breaks_ = breaks;
  q.n_per_panel_ = n_per_panel;
  q.scheme_ = scheme;
  fill_reference(n_per_panel, scheme, q.ref_nodes_, q.ref_weights_, q.ref_left_, q.ref_diff_);
  const std::size_t np = breaks.size() - 1;
  q.nodes_.reserve(np * n_per_panel);
  q.weights_.reserve(np * n_per_panel);
  for (std::size_t p = 0; p < np; ++p) {
    const double lo = breaks[p], hi = breaks[p + 1];
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (int i = 0; i < n_per_panel; ++i) {
      q.nodes_.push_back(mid + half * q.ref_nodes_[i]);
      q.weights_.push_back(half * q.ref_weights_[i]);
    }
  }
  return q;
}

Quadrature build_grid(const Interval& iv, int n_per_panel, int panels, Scheme scheme) {
  if (!iv.finite()) throw DomainError("build_grid: infinite endpoint, truncate first");
  if (!(iv.b > iv.a)) throw DomainError("build_grid: empty interval");
  if (panels < 1) throw DomainError("build_grid: panels must be >= 1");
  std::vector<double> br(panels + 1);
  for (int p = 0; p <= panels; ++p) br[p] = iv.a + (iv.b - iv.a) * p / panels;
  br.back() = iv.b;
  return build_grid_breaks(br, n_per_panel, scheme);
}

Quadrature build_grid_aligned(const Interval& iv, int n_per_panel, int panels,
                              const std::vector<double>& align, Scheme scheme) {
  if (!iv.finite()) throw DomainError("build_grid: infinite endpoint, truncate first");
  if (panels < 1) throw DomainError("build_grid: panels must be >= 1");
  std::vector<double> br;
  for (int p = 0; p <= panels; ++p) br.push_back(iv.a + (iv.b - iv.a) * p / panels);
  br.back() = iv.b;
  const double eps = 1e-9 * iv.length();
  for (double x : align) {
    if (!(x > iv.a + eps && x < iv.b - eps)) continue;
    bool near = false;
    for (double b : br) near = near || std::abs(b - x) < eps;
    if (!near) br.push_back(x);
  }
  std::sort(br.begin(), br.end());
  return build_grid_breaks(br, n_per_panel, scheme);
}

RMatrix Quadrature::left_partial(int p) const {
  return ref_left_ * (0.5 * (breaks_[p + 1] - breaks_[p]));
}

RMatrix Quadrature::right_partial(int p) const {
  const int n = n_per_panel_;
  const double half = 0.5 * (breaks_[p + 1] - breaks_[p]);
  RMatrix r(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r(i, j) = half * (ref_weights_[j] - ref_left_(i, j));
  return r;
}

RMatrix Quadrature::differentiation(int p) const {
  return ref_diff_ * (2.0 / (breaks_[p + 1] - breaks_[p]));
}

Quadrature Quadrature::refined() const {
  std::vector<double> br;
  for (std::size_t p = 0; p + 1 < breaks_.size(); ++p) {
    br.push_back(breaks_[p]);
    br.push_back(0.5 * (breaks_[p] + breaks_[p + 1]));
  }
  br.push_back(breaks_.back());
  return build_grid_breaks(br, n_per_panel_, scheme_);
}

// ---------------------------------------------------------------- truncation

namespace {

double chunk_integral(const std::function<double(double)>& f, double s, double e) {
  static const auto rule = [] {
    std::vector<double> x, w;
    gauss_legendre(16, x, w);
    return std::pair{x, w};
  }();
  const int panels = 8;
  double acc = 0;
  for (int p = 0; p < panels; ++p) {
    const double lo = s + (e - s) * p / panels, hi = s + (e - s) * (p + 1) / panels;
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (std::size_t i = 0; i < rule.first.size(); ++i)
      acc += rule.second[i] * half * std::abs(f(mid + half * rule.first[i]));
  }
  return acc;
}

// Mass of the envelope from `start` outward in direction dir (+1 or -1).
double tail_mass(const std::function<double(double)>& f, double start, int dir, double tol,
                 int max_chunks) {
  double len = std::max(1.0, std::abs(start));
  double pos = start, total = 0;
  for (int c = 0; c < max_chunks; ++c) {
    const double next = pos + dir * len;
    const double part = dir > 0 ? chunk_integral(f, pos, next) : chunk_integral(f, next, pos);
    total += part;
    if (!std::isfinite(total)) break;
    // The last chunk doubles as a bound on the remainder, which keeps the
    // estimate on the safe side for anything decaying at least like x^-2.
    if (part <= 1e-9 * tol || part == 0) return total + part;
    pos = next;
    len *= 2;
  }
  throw TruncationError("truncate_interval: envelope tail did not converge (non-integrable?)");
}

double find_cut(const std::function<double(double)>& f, double anchor, int dir, double tol,
                const TruncationOptions& opt, int max_chunks, double& mass) {
  double dist = opt.start;
  double prev = 0;
  double m = tail_mass(f, anchor, dir, tol, max_chunks);
  if (m <= tol) {
    mass = m;
    return anchor;
  }
  for (int it = 0; it < opt.max_doublings; ++it) {
    m = tail_mass(f, anchor + dir * dist, dir, tol, max_chunks);
    if (m <= tol) {
      double lo = prev, hi = dist, mhi = m;
      for (int b = 0; b < 200 && (hi - lo) > 1e-10 * std::max(1.0, hi); ++b) {
        const double mid = 0.5 * (lo + hi);
        const double mm = tail_mass(f, anchor + dir * mid, dir, tol, max_chunks);
        if (mm <= tol) {
          hi = mid;
          mhi = mm;
        } else {
          lo = mid;
        }
      }
      mass = mhi;
      return anchor + dir * hi;
    }
    prev = dist;
    dist *= 2;
  }
  throw TruncationError("truncate_interval: tail mass above tol after max doublings");
}

bool identically_zero(const std::function<double(double)>& f, const Interval& iv) {
  const double lo = std::isfinite(iv.a) ? iv.a : -1e3;
  const double hi = std::isfinite(iv.b) ? iv.b : 1e3;
  for (int i = 0; i <= 400; ++i) {
    const double x = lo + (hi - lo) * (i + 0.5) / 401;
    if (f(x) != 0.0) return false;
  }
  return true;
}

}  // namespace

TruncationReport truncate_interval(const std::function<double(double)>& envelope,
                                   const Interval& original, double tol,
                                   const TruncationOptions& opt) {
  if (!(tol > 0)) throw DomainError("truncate_interval: tol must be positive");
  if (!(original.b > original.a)) throw DomainError("truncate_interval: empty interval");
  TruncationReport rep{original, original, 0.0, tol};
  if (original.finite()) return rep;
  if (identically_zero(envelope, original)) {
    double a = std::isfinite(original.a) ? original.a : (std::isfinite(original.b) ? original.b - opt.min_length : -0.5 * opt.min_length);
    double b = std::isfinite(original.b) ? original.b : a + opt.min_length;
    if (!std::isfinite(original.a) && !std::isfinite(original.b)) b = 0.5 * opt.min_length;
    rep.truncated = {a, b};
    return rep;
  }
  const int max_chunks = 80;
  const bool left_inf = !std::isfinite(original.a), right_inf = !std::isfinite(original.b);
  const double side_tol = (left_inf && right_inf) ? tol / 2 : tol;
  double a = original.a, b = original.b, ma = 0, mb = 0;
  if (right_inf) {
    const double anchor = std::isfinite(original.a) ? original.a : 0.0;
    b = find_cut(envelope, anchor, +1, side_tol, opt, max_chunks, mb);
  }
  if (left_inf) {
    const double anchor = std::isfinite(original.b) ? original.b : 0.0;
    a = find_cut(envelope, anchor, -1, side_tol, opt, max_chunks, ma);
  }
  if (!(b > a)) {
    const double c = 0.5 * (a + b);
    a = c - 0.5 * opt.min_length;
    b = c + 0.5 * opt.min_length;
    if (std::isfinite(original.a)) { a = original.a; b = std::max(b, a + opt.min_length); }
    if (std::isfinite(original.b)) { b = original.b; a = std::min(a, b - opt.min_length); }
  }
  rep.truncated = {a, b};
  rep.tail_mass = ma + mb;
  return rep;
}

TruncationReport truncate_interval(const ExponentialEnvelope& env, const Interval& original,
                                   double tol) {
  if (!(tol > 0)) throw DomainError("truncate_interval: tol must be positive");
  if (!(env.rate > 0) || env.amplitude < 0)
    throw DomainError("truncate_interval: exponential envelope needs rate > 0, amplitude >= 0");
  TruncationReport rep{original, original, 0.0, tol};
  if (original.finite()) return rep;
  const bool left_inf = !std::isfinite(original.a), right_inf = !std::isfinite(original.b);
  const double side_tol = (left_inf && right_inf) ? tol / 2 : tol;
  // int_{c+s}^inf A e^{-r x} = (A/r) e^{-r s}
  double s = env.amplitude == 0 ? 0.0 : std::log(env.amplitude / (env.rate * side_tol)) / env.rate;
  s = std::max(s, 0.0);
  const double side_mass = env.amplitude / env.rate * std::exp(-env.rate * s);
  double a = original.a, b = original.b;
  if (right_inf) b = std::max(env.center + s, std::isfinite(a) ? a : -INFINITY);
  if (left_inf) a = std::min(env.center - s, std::isfinite(b) ? b : INFINITY);
  if (!(b > a)) b = a + 1.0;
  rep.truncated = {a, b};
  rep.tail_mass = side_mass * ((left_inf ? 1 : 0) + (right_inf ? 1 : 0));
  // A finite endpoint inside the envelope's tail reduces the true mass further.
  if (right_inf && std::isfinite(original.a) && original.a > env.center + s)
    rep.tail_mass = env.amplitude / env.rate * std::exp(-env.rate * (original.a - env.center));
  return rep;
}

}  // namespace semisep
