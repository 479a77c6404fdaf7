#pragma once

#include <vector>

#include "semisep/schrodinger.hpp"

namespace semisep::detail {

std::vector<CMatrix> sample_potential(const Potential& v, const Quadrature& grid);

// Normalized Jost solutions m_+ = e^{-ikx} f_+ and m_- = e^{ikx} f_-.
std::vector<CMatrix> solve_normalized_jost(const std::vector<CMatrix>& vs, Complex k,
                                           const Quadrature& grid, JostSide which);
double jost_defect(const std::vector<CMatrix>& vs, Complex k, const Quadrature& grid,
                   JostSide which, const std::vector<CMatrix>& sol);

// I - (2ik)^{-1} int V m_+
CMatrix jost_b8(const std::vector<CMatrix>& vs, Complex k, const Quadrature& grid,
                const std::vector<CMatrix>& mplus);

// m_+ at the left end of the grid interval.
CMatrix m_plus_at_left(const std::vector<CMatrix>& vs, Complex k, const Quadrature& grid,
                       const std::vector<CMatrix>& mplus);

}  // namespace semisep::detail
