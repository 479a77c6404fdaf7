#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "semisep/kernel.hpp"
#include "semisep/numerics.hpp"
#include "semisep/quadrature.hpp"
#include "semisep/reduction.hpp"

namespace semisep {

enum class LineDomain { FullLine, HalfLine };
enum class WeightClass { L1, L1_weighted };

// z with k = z^{1/2}, Im k >= 0.
struct SpectralPoint {
  Complex z{-1.0};
  Complex k{0.0, 1.0};
  static SpectralPoint make(Complex z, double z_min = 1e-8);
  SpectralPoint conjugate() const;  // z-bar, k -> -conj(k)
};

struct Potential {
  Index d = 1;
  LineDomain domain = LineDomain::FullLine;
  std::function<CMatrix(double)> V;
  std::function<double(double)> envelope;  // majorant of the trace norm of V(x)
  std::optional<ExponentialEnvelope> exp_envelope;
  std::optional<Interval> support;  // V vanishes outside, when known
  std::vector<double> breakpoints;  // jumps of V, aligned to panel boundaries
  bool hermitian = true;
  WeightClass weight_class = WeightClass::L1;
  std::string name;

  CMatrix operator()(double x) const;  // shape and finiteness checked
};

// Samples V on a coarse probe and checks the hermitian flag and the envelope.
void validate_potential(const Potential& v, double herm_tol = 1e-10);

namespace potentials {
Potential zero(Index d = 1, LineDomain dom = LineDomain::FullLine);
// V = -depth on [center - width/2, center + width/2]
Potential square_well(double depth, double width, double center,
                      LineDomain dom = LineDomain::FullLine);
// V = amplitude exp(-((x - center)/sigma)^2)
Potential gaussian(double amplitude, double sigma, double center,
                   LineDomain dom = LineDomain::FullLine);
// V = amplitude e^{-rate x} on (0, inf)
Potential exponential(double amplitude, double rate);
Potential matrix_diag(const std::vector<Potential>& channels);
// V = M p(x) with p a scalar profile.
Potential matrix_coupled(const CMatrix& amplitude, const Potential& profile);
// V1 + V2 on a common domain.
Potential sum(const Potential& a, const Potential& b);
}  // namespace potentials

struct GridSpec {
  int panels = 16;
  int nodes_per_panel = 16;
  double truncation_tol = 1e-12;
  Scheme scheme = Scheme::GaussLegendre;
};

struct PotentialGrid {
  Quadrature grid;
  TruncationReport truncation;
};

PotentialGrid make_grid(const Potential& v, const GridSpec& spec = {});

enum class JostSide { Plus, Minus };
enum class JostRoute { ViaB8, ViaB8a, ViaWronskian };
const char* to_string(JostRoute r);

struct JostData {
  JostSide which = JostSide::Plus;
  SpectralPoint z;
  Quadrature grid;
  std::vector<CMatrix> m;        // e^{-+ikx} f_{+-}(z,x), bounded
  std::vector<CMatrix> samples;  // f_{+-}(z,x)
  CMatrix jost_function;         // filled by jost_function(), else empty
  JostRoute route = JostRoute::ViaB8;
  double residual = 0;
};

// Volterra equation for the normalized Jost solution, solved panel by
// panel from the far end of the truncated interval.
JostData jost_solution(const Potential& v, const SpectralPoint& z, JostSide which,
                       const Quadrature& grid);

CMatrix jost_function(const Potential& v, const SpectralPoint& z, const Quadrature& grid,
                      JostRoute route = JostRoute::ViaB8);

struct JostRoutes {
  CMatrix b8, b8a, wronskian;
  double spread = 0;  // max pairwise Frobenius distance
};

struct JostRouteError : Error {
  JostRouteError(const std::string& m, JostRoutes r) : Error(m), routes(std::move(r)) {}
  JostRoutes routes;
};

// All three routes; throws JostRouteError when they disagree beyond tol.
JostRoutes jost_function_all(const Potential& v, const SpectralPoint& z, const Quadrature& grid,
                             double tol = 1e-7);

// m_+(z, 0) = f_+(z, 0) for a half-line potential.
CMatrix halfline_jost_value(const Potential& v, const SpectralPoint& z, const Quadrature& grid);

// Kernels restricted to the truncated interval of `grid`.
SemiSeparableKernel build_K_fullline(const Potential& v, const SpectralPoint& z,
                                     const Quadrature& grid);
SemiSeparableKernel build_Ktilde_system(const Potential& v, const SpectralPoint& z,
                                        const Quadrature& grid);
SemiSeparableKernel build_K_halfline(const Potential& v, const SpectralPoint& z,
                                     const Quadrature& grid);

struct TB2Result {
  Complex lhs, rhs;
};
TB2Result theorem_tB2_check(const Potential& v, const SpectralPoint& z, const Quadrature& grid);

struct TB3Result {
  Complex d2_system, d2_K, jost_side;
};
TB3Result theorem_tB3_check(const Potential& v, const SpectralPoint& z, const Quadrature& grid);

enum class CountMethod { JostZeros, BirmanSchwinger, DirectDiag };
const char* to_string(CountMethod m);

struct CountOptions {
  GridSpec grid{};
  // JostZeros
  double kappa_min = 1e-4;
  int points_per_decade = 120;
  double imag_tol = 1e-8;
  double resonance_window = 1e-6;
  // BirmanSchwinger
  double bs_lambda = 1e-6;
  double bs_lambda_check = 1e-5;
  // DirectDiag
  double lambda_cut = 1e-8;
  double fd_h = 0.005;
  double fd_pad = 2000.0;
  double fd_growth = 1.04;
  double fd_hmax = 2.0;
};

struct CountReport {
  CountMethod method = CountMethod::DirectDiag;
  int count = 0;
  bool inconclusive = false;
  std::vector<double> kappas;  // JostZeros: refined binding wave numbers
  std::vector<std::string> notes;
};

CountReport count_bound_states_report(const Potential& v, LineDomain domain, CountMethod method,
                                      const CountOptions& opt = {});
int count_bound_states(const Potential& v, LineDomain domain, CountMethod method,
                       const CountOptions& opt = {});

struct CountDisagreement : Error {
  CountDisagreement(const std::string& m, std::vector<CountReport> r)
      : Error(m), reports(std::move(r)) {}
  std::vector<CountReport> reports;
};
// Runs all three methods; throws CountDisagreement listing every count.
std::vector<CountReport> count_bound_states_all(const Potential& v, LineDomain domain,
                                                const CountOptions& opt = {});

// int_0^inf x tr V_-(x) dx
double bargmann_bound(const Potential& v, const Quadrature& grid);
double bargmann_bound(const Potential& v, const GridSpec& spec = {});

}  // namespace semisep
