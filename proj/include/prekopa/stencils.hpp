#pragma once
// Finite-difference weight generation on arbitrary node sets (Fornberg's
// recurrence) plus the order-4 endpoint-corrected midpoint quadrature rule
// used for half-offset grids.

#include <cstddef>
#include <vector>

namespace prekopa {

// Weights of the m-th derivative at z from samples at the given nodes:
// f^(m)(z) ~= sum_j w[m][j] f(nodes[j]). Returns orders 0..max_order.
std::vector<std::vector<double>> fornberg_weights(double z, const std::vector<double>& nodes,
                                                  int max_order);

// Quadrature weights on the half-offset grid x_i = a + (i-1/2)h, i = 1..m,
// h = (b-a)/m. For m >= 8 the end weights carry Euler-Maclaurin corrections
// built from 4-point one-sided derivative estimates, making the rule exact
// for cubics and O(h^4) for smooth integrands; below 8 nodes it degrades to
// the plain midpoint rule. Weights sum to (b-a) exactly in both regimes.
std::vector<double> midpoint_corrected_weights(double a, double b, int m);

}  // namespace prekopa
