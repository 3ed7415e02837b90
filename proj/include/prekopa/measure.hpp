#pragma once
// The probability measure mu_t with density phi(t,.)^{-beta}/Z, the functional
// phi(t) = Z^{-1/(beta-n)}, and means/variances under mu_t.

#include <vector>

#include "prekopa/fields.hpp"
#include "prekopa/geometry.hpp"

namespace prekopa {

struct MeasureState {
    double t = 0.0;
    double beta = 0.0;
    double Z = 0.0;  // raw quadrature of phi^{-beta} over V
    // Quadrature weight times phi^{-beta}/Z at each node; the interior set is
    // normalized by the discrete sum, so it adds to 1 exactly at build time.
    std::vector<double> interior_mu_weights;
    std::vector<double> boundary_mu_weights;
    // Nodal densities phi^{-beta}/Z (shared normalizer), used by assembly.
    std::vector<double> interior_density;
    std::vector<double> boundary_density;
};

// beta may be negative; that runs the whole machinery on phi^{+|beta|}, which
// is how the concave half of the theory is evaluated.
MeasureState build_measure(const Mesh& mesh, const FieldOracle& oracle, double t, double beta);

// Z^{-1/(beta-n)}; rejects beta = n.
double eval_phi(const Mesh& mesh, const FieldOracle& oracle, double t, double beta);

double mean_under_mu(const MeasureState& state, const std::vector<double>& g);
// Centered two-pass evaluation of mean(g^2) - mean(g)^2 (never negative).
double variance_under_mu(const MeasureState& state, const std::vector<double>& g);

// Boundary integral sum_j boundary_mu_weights[j] * g[j].
double boundary_integral_mu(const MeasureState& state, const std::vector<double>& g);

}  // namespace prekopa
