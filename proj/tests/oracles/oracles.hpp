#pragma once

// Test-side reference computations. Nothing here calls into the library
// beyond its type aliases, so a bug in a library route cannot hide in the
// oracle it is compared against.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace oracle {

using C = std::complex<double>;
using CM = Eigen::MatrixXcd;
inline constexpr C iu{0.0, 1.0};

// ------------------------------------------------------------ linear algebra

// Leibniz expansion, n <= 7.
inline C det_leibniz(const CM& m) {
  const int n = static_cast<int>(m.rows());
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  C acc = 0;
  do {
    int inv = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) inv += p[i] > p[j];
    C term = inv % 2 ? -1.0 : 1.0;
    for (int i = 0; i < n; ++i) term *= m(i, p[i]);
    acc += term;
  } while (std::next_permutation(p.begin(), p.end()));
  return acc;
}

inline Eigen::VectorXcd eigenvalues(const CM& m) {
  Eigen::ComplexEigenSolver<CM> es(m, false);
  return es.eigenvalues();
}

inline C eig_product(const CM& m) {
  C p = 1;
  for (auto l : eigenvalues(m)) p *= l;
  return p;
}

inline C det2_by_eigs(const CM& m) {
  C p = 1;
  for (auto l : eigenvalues(m)) p *= (1.0 - l) * std::exp(l);
  return p;
}

// Real roots of the characteristic polynomial of a Hermitian matrix:
// Faddeev-LeVerrier coefficients, sign changes on a fine mesh inside the
// Gershgorin bound, then bisection.
inline std::vector<double> charpoly_roots(const CM& h) {
  const int n = static_cast<int>(h.rows());
  std::vector<C> c(n + 1);  // p(x) = sum c[k] x^k, c[n] = 1
  c[n] = 1;
  CM M = CM::Zero(n, n), I = CM::Identity(n, n);
  for (int k = 1; k <= n; ++k) {
    M = h * M + c[n - k + 1] * I;
    c[n - k] = -(h * M).trace() / static_cast<double>(k);
  }
  auto p = [&](double x) {
    C acc = 0;
    for (int k = n; k >= 0; --k) acc = acc * x + c[k];
    return acc.real();
  };
  double r = 0;
  for (int i = 0; i < n; ++i) r = std::max(r, h.row(i).cwiseAbs().sum());
  r += 1;
  std::vector<double> roots;
  const int mesh = 20000;
  double x0 = -r, f0 = p(x0);
  for (int i = 1; i <= mesh; ++i) {
    const double x1 = -r + 2 * r * i / mesh, f1 = p(x1);
    if (f0 == 0) roots.push_back(x0);
    else if ((f0 < 0) != (f1 < 0)) {
      double lo = x0, hi = x1, flo = f0;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi), fm = p(mid);
        if ((fm < 0) == (flo < 0)) { lo = mid; flo = fm; } else { hi = mid; }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    x0 = x1;
    f0 = f1;
  }
  return roots;
}

// ------------------------------------------------------------ quadrature

// Composite Simpson with n (even) intervals.
template <class F>
auto simpson(F&& f, double a, double b, int n) {
  const double h = (b - a) / n;
  auto acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return acc * (h / 3.0);
}

// ------------------------------------------------------------ closed forms

// K(x,x') = e^{-mu|x-x'|} on (0, L): det(I - alpha K), with s^2 = mu^2 - 2 alpha mu.
inline C exp_green_det1(double mu, double L, C alpha) {
  const C s = std::sqrt(mu * mu - 2.0 * alpha * mu);
  if (std::abs(s) < 1e-12) return std::exp(-mu * L) * (1.0 + mu * L);
  const C c = (mu * mu + s * s) / (2.0 * mu * s);
  return std::exp(-mu * L) * (std::cosh(s * L) + c * std::sinh(s * L));
}

// Jost function of V = -depth on [c - w/2, c + w/2] by plane-wave
// amplitude matching: psi = A e^{iqx} + B e^{-iqx} in each region.
inline C square_well_jost(double depth, double width, double center, C k) {
  const double x0 = center - width / 2, x1 = center + width / 2;
  const C q = std::sqrt(k * k + depth);
  // (y, y') at x1 for y = e^{ikx}, carried back across the well by the
  // cos/sin transfer matrix; sin(qw)/q is kept finite at q = 0
  const C c = std::cos(q * width);
  const C sq = std::abs(q * width) < 1e-8 ? C(width) : std::sin(q * width) / q;
  const C y1 = std::exp(iu * k * x1), d1 = iu * k * y1;
  const C y0 = c * y1 - sq * d1, d0 = q * q * sq * y1 + c * d1;
  return std::exp(-iu * k * x0) * (y0 + d0 / (iu * k)) / 2.0;  // coefficient of e^{ikx} on the left
}

// J_nu(x) for real nu >= 0 by its power series.
inline double bessel_j(double nu, double x) {
  double term = std::pow(x / 2, nu) / std::tgamma(nu + 1), acc = term;
  for (int m = 1; m < 300; ++m) {
    term *= -(x * x / 4) / (m * (m + nu));
    acc += term;
    if (std::abs(term) < 1e-18 * std::abs(acc)) break;
  }
  return acc;
}

// n-th positive zero of J_0 by bracketing on a mesh.
inline double bessel_j0_zero(int n) {
  int found = 0;
  double x0 = 0.1, f0 = bessel_j(0, x0);
  for (double x1 = 0.2;; x1 += 0.1) {
    const double f1 = bessel_j(0, x1);
    if ((f0 < 0) != (f1 < 0) && ++found == n) {
      double lo = x0, hi = x1, flo = f0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi), fm = bessel_j(0, mid);
        if ((fm < 0) == (flo < 0)) { lo = mid; flo = fm; } else { hi = mid; }
      }
      return 0.5 * (lo + hi);
    }
    x0 = x1;
    f0 = f1;
  }
}

// Half-line V = -c e^{-x}, Dirichlet at 0: f_+(-kappa^2, 0)
// = Gamma(1 + 2 kappa) c^{-kappa} J_{2 kappa}(2 sqrt c).
inline double exp_well_jost(double c, double kappa) {
  return std::tgamma(1 + 2 * kappa) * std::pow(c, -kappa) * bessel_j(2 * kappa, 2 * std::sqrt(c));
}

// Number of Dirichlet bound states of -c e^{-x}: zeros of J_0 below 2 sqrt c.
inline int exp_well_count(double c) {
  int n = 0;
  while (bessel_j0_zero(n + 1) < 2 * std::sqrt(c)) ++n;
  return n;
}

// ------------------------------------------------------------ ODE shooting

// -Y'' + V Y = k^2 Y integrated from b down to a by classical RK4 with
// Y(b) = e^{ikb} I, Y'(b) = ik e^{ikb} I. `breaks` are jump points of V,
// used as step boundaries.
struct Shot {
  CM y, dy;  // at a
};

inline Shot shoot_left(const std::function<CM(double)>& V, int d, C k, double a, double b,
                       std::vector<double> breaks, int steps_per_unit) {
  breaks.push_back(a);
  breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::remove_if(breaks.begin(), breaks.end(),
                              [&](double x) { return x < a || x > b; }),
               breaks.end());
  const CM I = CM::Identity(d, d);
  CM y = std::exp(iu * k * b) * I, dy = iu * k * std::exp(iu * k * b) * I;
  auto rhs = [&](double x, const CM& yy) { return CM((V(x) - k * k * I) * yy); };
  for (int s = static_cast<int>(breaks.size()) - 1; s > 0; --s) {
    const double hi = breaks[s], lo = breaks[s - 1];
    const int n = std::max(4, static_cast<int>(std::ceil((hi - lo) * steps_per_unit)));
    const double h = -(hi - lo) / n;
    // Evaluate V strictly inside the piece so jumps never leak across.
    auto Vin = [&](double x) { return std::clamp(x, lo + 1e-13, hi - 1e-13); };
    double x = hi;
    for (int i = 0; i < n; ++i) {
      const CM k1y = dy, k1d = rhs(Vin(x), y);
      const CM k2y = dy + 0.5 * h * k1d, k2d = rhs(Vin(x + h / 2), y + 0.5 * h * k1y);
      const CM k3y = dy + 0.5 * h * k2d, k3d = rhs(Vin(x + h / 2), y + 0.5 * h * k2y);
      const CM k4y = dy + h * k3d, k4d = rhs(Vin(x + h), y + h * k3y);
      y += h / 6 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
      dy += h / 6 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
      x += h;
    }
  }
  return {y, dy};
}

// Full-line Jost function for V vanishing outside [a, b]:
// F = e^{-ika} (Y(a) + Y'(a)/(ik)) / 2.
inline CM jost_by_shooting(const std::function<CM(double)>& V, int d, C k, double a, double b,
                           const std::vector<double>& breaks = {}, int steps_per_unit = 4000) {
  const Shot s = shoot_left(V, d, k, a, b, breaks, steps_per_unit);
  return std::exp(-iu * k * a) * 0.5 * (s.y + s.dy / (iu * k));
}

// f_+(z, x) at x = a for the same problem.
inline CM jost_solution_by_shooting(const std::function<CM(double)>& V, int d, C k, double a,
                                    double b, const std::vector<double>& breaks = {},
                                    int steps_per_unit = 4000) {
  return shoot_left(V, d, k, a, b, breaks, steps_per_unit).y;
}

// ------------------------------------------------------------ generators

// Hand-rolled generators for the property tests.
struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  C complex(double r) { return {uniform(-r, r), uniform(-r, r)}; }
  CM matrix(int n, double r = 1.0) {
    CM m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = complex(r);
    return m;
  }
  CM hermitian(int n, double r = 1.0) {
    const CM m = matrix(n, r);
    return 0.5 * (m + m.adjoint());
  }
  CM strictly_lower(int n, double r = 1.0) {
    CM m = matrix(n, r);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) m(i, j) = 0;
    return m;
  }
};

}  // namespace oracle
