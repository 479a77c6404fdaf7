#pragma once

#include <vector>

#include "semisep/kernel.hpp"
#include "semisep/quadrature.hpp"

namespace semisep::detail {

// Cumulative integrals at every node: over [x_i, b] when from_above,
// otherwise over [a, x_i]. Partial panels use the spectral integration
// matrices of the grid.
std::vector<CMatrix> partial_integrals(const Quadrature& grid, const std::vector<CMatrix>& vals,
                                       bool from_above);
CMatrix total_integral(const Quadrature& grid, const std::vector<CMatrix>& vals);

CMatrix c_at(const NodalFactors& f, std::size_t i);  // [F1 F2]
CMatrix b_at(const NodalFactors& f, std::size_t i);  // [G1; -G2]

}  // namespace semisep::detail
