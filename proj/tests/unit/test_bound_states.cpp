#include <doctest.h>

#include "oracles/oracles.hpp"
#include "semisep/schrodinger.hpp"

using namespace semisep;

namespace {

constexpr LineDomain kFull = LineDomain::FullLine;
constexpr LineDomain kHalf = LineDomain::HalfLine;

// even/odd matching for -depth on a box of the given width
int square_well_count(double depth, double width) {
  if (depth <= 0) return 0;
  return static_cast<int>(std::floor(width * std::sqrt(depth) / M_PI)) + 1;
}

// Dirichlet at 0 and -depth on (0, width): odd states of the doubled box
int halfline_box_count(double depth, double width) {
  if (depth <= 0) return 0;
  return static_cast<int>(std::floor(width * std::sqrt(depth) / M_PI + 0.5));
}

// well depth distance from a threshold, in units of the count formula
double threshold_gap(double depth, double width, double shift) {
  const double r = width * std::sqrt(depth) / M_PI + shift;
  return std::abs(r - std::round(r));
}

std::vector<int> counts(const Potential& v, LineDomain dom) {
  std::vector<int> out;
  for (auto m : {CountMethod::JostZeros, CountMethod::BirmanSchwinger, CountMethod::DirectDiag})
    out.push_back(count_bound_states(v, dom, m));
  return out;
}

}  // namespace

TEST_CASE("zero potential has no bound states") {
  for (int c : counts(potentials::zero(1), kFull)) CHECK(c == 0);
  for (int c : counts(potentials::zero(2, kHalf), kHalf)) CHECK(c == 0);
}

TEST_CASE("repulsive potentials have no bound states") {
  for (int c : counts(potentials::gaussian(2.0, 1.0, 0.0), kFull)) CHECK(c == 0);
  for (int c : counts(potentials::exponential(1.0, 1.0), kHalf)) CHECK(c == 0);
}

TEST_CASE("exponential well: threshold from the first zero of J_0") {
  const double cstar = std::pow(oracle::bessel_j0_zero(1) / 2, 2);
  CHECK(std::abs(cstar - 1.4458) < 1e-4);
  CHECK(oracle::exp_well_count(1.0) == 0);
  CHECK(oracle::exp_well_count(2.0) == 1);
  for (double c : {1.0, 2.0, 0.9 * cstar, 1.1 * cstar, 8.0}) {
    const Potential v = potentials::exponential(-c, 1.0);
    for (int n : counts(v, kHalf)) CHECK(n == oracle::exp_well_count(c));
  }
}

TEST_CASE("exponential well: Jost zeros sit at the binding wave numbers") {
  const Potential v = potentials::exponential(-8.0, 1.0);
  const auto rep = count_bound_states_report(v, kHalf, CountMethod::JostZeros);
  REQUIRE(rep.kappas.size() == static_cast<size_t>(oracle::exp_well_count(8.0)));
  for (double kappa : rep.kappas) CHECK(std::abs(oracle::exp_well_jost(8.0, kappa)) < 1e-8);
}

TEST_CASE("square well examples") {
  CHECK(square_well_count(1.0, 1.0) == 1);
  for (int n : counts(potentials::square_well(1.0, 1.0, 0.5), kFull)) CHECK(n == 1);
  // w sqrt(V0) = 10: four states
  for (int n : counts(potentials::square_well(25.0, 2.0, 0.0), kFull)) CHECK(n == 4);
}

TEST_CASE("property: random scalar square wells, three methods and the matching count") {
  oracle::Gen g(71);
  int done = 0;
  while (done < 10) {
    const double depth = g.uniform(0.2, 30), width = g.uniform(0.3, 3), center = g.uniform(-1, 1);
    if (threshold_gap(depth, width, 0) < 0.02) continue;
    ++done;
    const Potential v = potentials::square_well(depth, width, center);
    const auto all = count_bound_states_all(v, kFull);
    for (const auto& r : all) {
      CHECK(r.count == square_well_count(depth, width));
      CHECK_FALSE(r.inconclusive);
    }
  }
}

TEST_CASE("property: random half-line boxes against the Dirichlet count") {
  oracle::Gen g(72);
  int done = 0;
  while (done < 6) {
    const double depth = g.uniform(0.5, 30), width = g.uniform(0.5, 3);
    if (threshold_gap(depth, width, 0.5) < 0.02) continue;
    ++done;
    const Potential v = potentials::square_well(depth, width, width / 2, kHalf);
    for (int n : counts(v, kHalf)) CHECK(n == halfline_box_count(depth, width));
  }
}

TEST_CASE("property: d = 2 Hermitian wells decouple into eigen-channels") {
  oracle::Gen g(73);
  int done = 0;
  while (done < 5) {
    const CMatrix a = g.hermitian(2, 6.0);
    const double width = g.uniform(0.5, 2);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(a);
    bool near = false;
    int expect = 0;
    for (int j = 0; j < 2; ++j) {
      const double l = es.eigenvalues()(j);
      if (std::abs(l) < 0.05 || (l > 0 && threshold_gap(l, width, 0) < 0.02)) near = true;
      expect += square_well_count(l, width);
    }
    if (near) continue;
    ++done;
    // V = -a on the box
    const Potential v = potentials::matrix_coupled(a, potentials::square_well(1.0, width, 0.1));
    const auto all = count_bound_states_all(v, kFull);
    for (const auto& r : all) CHECK(r.count == expect);
  }
}

TEST_CASE("Gaussian wells: methods agree") {
  for (double amp : {0.5, 3.0, 12.0}) {
    const auto all = count_bound_states_all(potentials::gaussian(-amp, 1.0, 0.3), kFull);
    CHECK(all.size() == 3);
    CHECK(all[0].count >= 1);  // every attractive well binds in one dimension
  }
}

TEST_CASE("counting refuses non-Hermitian potentials and a full-line count of a half-line V") {
  CMatrix m(2, 2);
  m << -1.0, 1.0, 0.0, -1.0;
  const Potential nh = potentials::matrix_coupled(m, potentials::gaussian(1.0, 1.0, 0.0));
  for (auto meth : {CountMethod::JostZeros, CountMethod::BirmanSchwinger, CountMethod::DirectDiag})
    CHECK_THROWS_AS(count_bound_states(nh, kFull, meth), ContractError);
  CHECK_THROWS_AS(count_bound_states(potentials::exponential(-1.0, 1.0), kFull, CountMethod::DirectDiag),
                  DomainError);
}

TEST_CASE("count disagreement lists every method") {
  // a Birman-Schwinger cut far above zero misses the shallow state
  CountOptions opt;
  opt.bs_lambda = 0.9;
  opt.bs_lambda_check = 0;
  try {
    count_bound_states_all(potentials::square_well(0.05, 1.0, 0.0), kFull, opt);
    FAIL("expected CountDisagreement");
  } catch (const CountDisagreement& e) {
    CHECK(e.reports.size() == 3);
    const std::string w = e.what();
    CHECK(w.find("JostZeros") != std::string::npos);
    CHECK(w.find("BirmanSchwinger") != std::string::npos);
    CHECK(w.find("DirectDiag") != std::string::npos);
  }
}

TEST_CASE("Bargmann bound examples") {
  CHECK(bargmann_bound(potentials::exponential(1.0, 1.0)) == 0.0);
  CHECK(bargmann_bound(potentials::zero(1, kHalf)) == 0.0);
  for (double c : {0.5, 1.0, 3.0}) CHECK(std::abs(bargmann_bound(potentials::exponential(-c, 1.0)) - c) < 1e-10);
  const Potential mixed =
      potentials::matrix_diag({potentials::exponential(-1.0, 1.0), potentials::exponential(1.0, 1.0)});
  CHECK(std::abs(bargmann_bound(mixed) - 1.0) < 1e-10);
  // -depth on (0, w): depth w^2 / 2
  CHECK(std::abs(bargmann_bound(potentials::square_well(2.0, 1.5, 0.75, kHalf)) - 2.25) < 1e-10);
  CMatrix m(2, 2);
  m << -1.0, 1.0, 0.0, -1.0;
  const Potential nh = potentials::matrix_coupled(m, potentials::exponential(1.0, 1.0));
  CHECK_THROWS_AS(bargmann_bound(nh), ContractError);
}

TEST_CASE("property: the bound majorizes the count on random half-line potentials") {
  oracle::Gen g(74);
  for (int t = 0; t < 10; ++t) {
    Potential v;
    switch (t % 3) {
      case 0: v = potentials::exponential(-g.uniform(0.1, 10), g.uniform(0.5, 2)); break;
      case 1: v = potentials::square_well(g.uniform(0.1, 10), g.uniform(0.2, 3), g.uniform(1.5, 3), kHalf); break;
      default:
        v = potentials::sum(potentials::exponential(-g.uniform(0.1, 6), 1.0),
                            potentials::gaussian(g.uniform(-4, 4), 0.5, g.uniform(0.5, 2), kHalf));
    }
    const int n = count_bound_states(v, kHalf, CountMethod::DirectDiag);
    CHECK(n <= bargmann_bound(v) + 1e-12);
  }
}
