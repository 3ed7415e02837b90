#pragma once
// Weak-form assembly and solve of the Neumann problem L_t u = f, du/dnu = 0,
// with derivative reconstruction for the identity terms.
//
// The Dirichlet form a(u,v) = int <grad u, grad v> dmu_t is discretized as
// A = sum_cells gamma_cell s s^T with staggered (cell-midpoint) derivative
// stencils, so A is symmetric positive semidefinite with the constants as its
// exact kernel and the Neumann condition is natural.

#include <cstddef>
#include <vector>

#include "prekopa/fields.hpp"
#include "prekopa/geometry.hpp"
#include "prekopa/linalg.hpp"
#include "prekopa/measure.hpp"
#include "prekopa/types.hpp"

namespace prekopa {

struct WeakSystem {
    Csr A;                     // (n_interior + n_boundary) square
    std::vector<double> mass;  // interior mu_t weights (measure quadrature)
    // mu_t weights on the solver's own plain cell volumes. The form and the
    // right-hand side must share one volume representation, otherwise the
    // endpoint-corrected measure weights (which alternate near the ends)
    // inject O(1/r) truncation at the innermost rings.
    std::vector<double> solver_mass;
    std::size_t n_interior = 0;
    std::size_t n_boundary = 0;
    // Boundary values are recovered through the order-4 one-sided stencil of
    // du/dnu = 0: u_bnd[j] = sum_k elim[j].coeff_k * u_interior[node_k].
    std::vector<std::vector<std::pair<std::int32_t, double>>> elim;
    // Interior-only operator actually solved: the flux form with the wall
    // face omitted (its flux vanishes under the natural Neumann condition)
    // and node-centered volumes, which keeps the scheme pointwise consistent
    // up to the wall and the pole. Symmetric PSD, kernel = constants.
    Csr A_solve;
};

WeakSystem assemble(const Mesh& mesh, const MeasureState& state);

// Gradient/Hessian/Laplacian reconstructed on interior and boundary nodes:
// 5-point stencils in the radial/1D direction, spectral differentiation in
// the angle. lap is the trace of hess by construction.
struct DerivativeFields {
    std::vector<Vec2> grad, grad_bnd;
    std::vector<Sym2> hess, hess_bnd;
    std::vector<double> lap, lap_bnd;
};

DerivativeFields reconstruct_derivatives(const Mesh& mesh, const std::vector<double>& u_interior,
                                         const std::vector<double>& u_boundary);

struct SolveDiagnostics {
    double pre_projection_mean = 0.0;  // discrete mean of f before projection
    double gauge = 0.0;                // |int u dmu| after gauge fixing
    double bc_residual = 0.0;          // max |<grad u, nu>| on the boundary
    double strong_residual = 0.0;      // max |L_t u - f| on interior nodes
    std::size_t cg_iterations = 0;
    double cg_rel_residual = 0.0;
};

struct NeumannSolution {
    std::vector<double> u;      // interior nodal values, gauge int u dmu = 0
    std::vector<double> u_bnd;  // boundary nodal values
    DerivativeFields fields;
    SolveDiagnostics diag;
};

struct SolverOptions {
    double rel_tol = 1e-10;        // algebraic residual target
    double compat_tol = 1e-6;      // allowed |mean f| before projection
    std::size_t max_iterations = 0;  // 0 = pick from resolution
};

// f lives on interior nodes and is projected to exact discrete mean zero
// before the solve (compatibility); the pre-projection mean is reported.
NeumannSolution solve_neumann(const Mesh& mesh, const WeakSystem& system,
                              const MeasureState& state, const FieldOracle& oracle,
                              const std::vector<double>& f, SolverOptions opts = {});

// Strong-form L_t u = lap u - beta <grad phi, grad u>/phi on interior nodes,
// from reconstructed fields.
std::vector<double> apply_strong_operator(const Mesh& mesh, const FieldOracle& oracle, double t,
                                          double beta, const DerivativeFields& fields);

}  // namespace prekopa
