#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "semisep/kernel.hpp"
#include "semisep/numerics.hpp"
#include "semisep/quadrature.hpp"

namespace semisep {

enum class Fhat { Fhat1, Fhat2 };
enum class VolterraMethod { BackSubstitution, PicardIteration };

struct VolterraOptions {
  double tol = 1e-13;   // Picard: relative step size
  int max_iter = 200;
};

struct VolterraSolution {
  Fhat which = Fhat::Fhat1;
  Complex alpha{0};
  std::vector<CMatrix> samples;  // d x n_j per node
  Quadrature grid;
  VolterraMethod method = VolterraMethod::BackSubstitution;
  int iterations_used = 0;
  double residual = 0;  // max nodewise defect of the discrete equation
};

// Fhat1(x) = F1(x) - alpha int_x^b H(x,x') Fhat1(x') dx'
// Fhat2(x) = F2(x) + alpha int_a^x H(x,x') Fhat2(x') dx'
VolterraSolution solve_volterra(const SemiSeparableKernel& k, Complex alpha, const Quadrature& grid,
                                Fhat which,
                                VolterraMethod method = VolterraMethod::BackSubstitution,
                                const VolterraOptions& opt = {});

VolterraSolution solve_volterra(const SemiSeparableKernel& k, const NodalFactors& f,
                                Complex alpha, const Quadrature& grid, Fhat which,
                                VolterraMethod method = VolterraMethod::BackSubstitution,
                                const VolterraOptions& opt = {});

enum class PropagatorRoute { ClosedForm_A37, ODE_A36a };

// Closed form: U(x; alpha) at a, every node, b.
// ODE: U(x, a; alpha) at the same points.
struct PropagatorU {
  Complex alpha{0};
  PropagatorRoute route = PropagatorRoute::ClosedForm_A37;
  Index n1 = 0, n2 = 0;
  std::vector<double> x;    // a, nodes..., b
  std::vector<CMatrix> U;
  const CMatrix& at_a() const { return U.front(); }
  const CMatrix& at_b() const { return U.back(); }
  const CMatrix& at_node(Index i) const { return U[static_cast<std::size_t>(i) + 1]; }
};

PropagatorU propagator(const SemiSeparableKernel& k, Complex alpha, const Quadrature& grid,
                       PropagatorRoute route = PropagatorRoute::ClosedForm_A37,
                       int ode_substeps = 2);

PropagatorU propagator_closed_form(const SemiSeparableKernel& k, const NodalFactors& f,
                                   const VolterraSolution& fhat1, const VolterraSolution& fhat2);

// U(x_to, x_from; alpha) by classical RK4 with `steps` uniform steps.
CMatrix propagate(const SemiSeparableKernel& k, Complex alpha, double x_from, double x_to,
                  int steps);

enum class DetKind { Det1, Det2 };
enum class DetRoute { ReducedH1, ReducedH2, PropagatorA, PropagatorB, Nystrom };

const char* to_string(DetRoute r);
const char* to_string(DetKind k);

struct DetOptions {
  double consistency_tol = 1e-6;
  double trace_tol = 1e-8;
  VolterraMethod method = VolterraMethod::BackSubstitution;
  VolterraOptions volterra{};
};

struct DetResult {
  Complex value{1};
  DetKind kind = DetKind::Det2;
  DetRoute route = DetRoute::ReducedH1;
  Complex alpha{0};
  Index grid_nodes = 0;
  double cross_route_spread = 0;
  std::map<DetRoute, Complex> routes;
  Complex trace_F1G1{0}, trace_F2G2{0};
  Complex trace_K{0};        // quadrature of tr K(x,x) under the Average convention
  double bridge_defect = 0;  // det1 only: |det1 - det2 e^{-alpha tr K}|, relative
  bool consistent = true;
  bool reliable = true;
  std::vector<std::string> warnings;
};

DetResult det2_semiseparable(const SemiSeparableKernel& k, Complex alpha, const Quadrature& grid,
                             const DetOptions& opt = {});
DetResult det1_semiseparable(const SemiSeparableKernel& k, Complex alpha, const Quadrature& grid,
                             const DetOptions& opt = {});

// Nystrom matrices of alpha H_a and alpha H_b with zero diagonal blocks.
enum class VolterraSide { Ha, Hb };
CMatrix volterra_nystrom_matrix(const SemiSeparableKernel& k, Complex alpha,
                                const Quadrature& grid, VolterraSide side);
std::pair<Complex, Complex> det2_volterra_is_one(const SemiSeparableKernel& k, Complex alpha,
                                                 const Quadrature& grid);

inline constexpr Index kNystromMaxSize = 4096;

// Block (i,j) = alpha sqrt(w_i) K(x_i,x_j) sqrt(w_j).
CMatrix nystrom_matrix(const SemiSeparableKernel& k, Complex alpha, const Quadrature& grid);
DetResult det2_nystrom(const SemiSeparableKernel& k, Complex alpha, const Quadrature& grid);
// sum_i w_i tr K(x_i, x_i) under the kernel's diagonal convention
Complex nystrom_trace(const SemiSeparableKernel& k, const Quadrature& grid);

// Factor exp(alpha^2/2 sum_i w_i^2 tr(D_i^2 - L_i U_i)), D_i the sampled
// diagonal and L_i, U_i the branch limits. Multiplying det2_nystrom by it
// removes the first-order error a diagonal jump causes in tr M^2.
Complex nystrom_jump_correction(const SemiSeparableKernel& k, Complex alpha, const Quadrature& grid);

// Jump-corrected Nystrom values on `levels` successive grid doublings of
// `grid`, Richardson-extrapolated in h^2, h^3, ... Meant for midpoint grids.
Complex det2_nystrom_extrapolated(const SemiSeparableKernel& k, Complex alpha,
                                  const Quadrature& grid, int levels = 2);

struct ResolventOptions {
  int ode_substeps = 4;
  double singular_threshold = 1e-10;
  double max_condition = 1e12;
};

// L(x,x'; alpha) with (I - alpha K)^{-1} = I + alpha L.
class ResolventKernel {
 public:
  ResolventKernel(const SemiSeparableKernel& k, Complex alpha, const Quadrature& grid,
                  const ResolventOptions& opt = {});
  CMatrix operator()(double x, double xp) const;
  const CMatrix& P() const { return p_; }
  const CMatrix& U_ba() const { return prop_.at_b(); }

 private:
  // U(x, a) and its inverse at arbitrary x.
  std::pair<CMatrix, CMatrix> u_at(double x) const;

  SemiSeparableKernel k_;
  Complex alpha_;
  ResolventOptions opt_;
  PropagatorU prop_;
  std::vector<CMatrix> inv_;
  CMatrix p_;
};

CMatrix resolvent_kernel(const SemiSeparableKernel& k, Complex alpha, const Quadrature& grid,
                         double x, double xp);

}  // namespace semisep
