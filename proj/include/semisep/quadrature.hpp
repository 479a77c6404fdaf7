#pragma once

#include <functional>
#include <vector>

#include "semisep/numerics.hpp"

namespace semisep {

struct Interval {
  double a;
  double b;
  bool finite() const;
  double length() const { return b - a; }
  bool contains(double x) const { return x >= a && x <= b; }
};

enum class Scheme { GaussLegendre, Trapezoid };

// Composite rule with a fixed number of nodes per panel. Trapezoid is
// realized as the composite midpoint rule so that every node stays strictly
// inside the interval.
class Quadrature {
 public:
  Quadrature() = default;

  const Interval& interval() const { return interval_; }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& breakpoints() const { return breaks_; }
  Index size() const { return static_cast<Index>(nodes_.size()); }
  int panels() const { return static_cast<int>(breaks_.size()) - 1; }
  int n_per_panel() const { return n_per_panel_; }
  Scheme scheme() const { return scheme_; }

  int panel_of(Index node) const { return static_cast<int>(node / n_per_panel_); }
  Index panel_begin(int p) const { return static_cast<Index>(p) * n_per_panel_; }
  double panel_lo(int p) const { return breaks_[p]; }
  double panel_hi(int p) const { return breaks_[p + 1]; }

  // S(i,j) = integral over [panel_lo, x_i] of the j-th panel basis function.
  // Local indices, physical scaling of the given panel.
  RMatrix left_partial(int p) const;
  // Integral over [x_i, panel_hi].
  RMatrix right_partial(int p) const;
  // D(i,j) = derivative of the j-th basis function at x_i.
  RMatrix differentiation(int p) const;

  // Same structure with every panel split in two.
  Quadrature refined() const;

  template <class F>
  auto integrate(F&& f) const {
    auto acc = f(nodes_[0]) * weights_[0];
    for (std::size_t i = 1; i < nodes_.size(); ++i) acc += f(nodes_[i]) * weights_[i];
    return acc;
  }

  friend Quadrature build_grid(const Interval&, int, int, Scheme);
  friend Quadrature build_grid_breaks(const std::vector<double>&, int, Scheme);

 private:
  Interval interval_{0, 1};
  std::vector<double> nodes_, weights_, breaks_;
  int n_per_panel_ = 0;
  Scheme scheme_ = Scheme::GaussLegendre;
  // Reference-panel data on [-1, 1].
  std::vector<double> ref_nodes_, ref_weights_;
  RMatrix ref_left_, ref_diff_;
};

Quadrature build_grid(const Interval& iv, int n_per_panel, int panels,
                      Scheme scheme = Scheme::GaussLegendre);

// Panels given by explicit breakpoints (strictly increasing, finite).
Quadrature build_grid_breaks(const std::vector<double>& breaks, int n_per_panel,
                             Scheme scheme = Scheme::GaussLegendre);

// Uniform panels on `iv`, with every interior point of `align` that falls
// inside inserted as an extra breakpoint.
Quadrature build_grid_aligned(const Interval& iv, int n_per_panel, int panels,
                              const std::vector<double>& align,
                              Scheme scheme = Scheme::GaussLegendre);

// Gauss-Legendre rule on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

struct TruncationReport {
  Interval original;
  Interval truncated;
  double tail_mass = 0;
  double requested_tol = 0;
};

// Optional closed form for envelopes of the type A e^{-r|x - c|} on a tail.
struct ExponentialEnvelope {
  double amplitude;
  double rate;
  double center = 0;
};

struct TruncationOptions {
  double min_length = 1.0;   // used when the envelope vanishes identically
  double start = 1.0;        // first trial distance from the anchor
  int max_doublings = 60;
};

// Finite (a, b) with envelope mass on the discarded tails below tol.
TruncationReport truncate_interval(const std::function<double(double)>& envelope,
                                   const Interval& original, double tol,
                                   const TruncationOptions& opt = {});

TruncationReport truncate_interval(const ExponentialEnvelope& env, const Interval& original,
                                   double tol);

}  // namespace semisep
