#include "prekopa/measure.hpp"

#include <cmath>
#include <stdexcept>

#include "prekopa/simd/kernels.hpp"

namespace prekopa {

namespace {

double power_neg_beta(double phi, double beta, const char* where) {
    if (!(phi > 0.0)) throw std::runtime_error(std::string(where) + ": phi must be positive");
    double p = std::exp(-beta * std::log(phi));
    if (!std::isfinite(p))
        throw std::runtime_error(std::string(where) + ": phi^{-beta} not finite");
    return p;
}

}  // namespace

MeasureState build_measure(const Mesh& mesh, const FieldOracle& oracle, double t, double beta) {
    MeasureState st;
    st.t = t;
    st.beta = beta;
    const std::size_t ni = mesh.n_interior(), nb = mesh.n_boundary();

    std::vector<double> raw(ni);
    for (std::size_t i = 0; i < ni; ++i)
        raw[i] = power_neg_beta(oracle.value(t, mesh.interior_nodes[i]), beta, "build_measure");
    st.Z = simd::dot(mesh.interior_weights.data(), raw.data(), ni);
    if (!(st.Z > 0.0) || !std::isfinite(st.Z))
        throw std::runtime_error("build_measure: partition function must be positive and finite");

    st.interior_mu_weights.resize(ni);
    st.interior_density.resize(ni);
    for (std::size_t i = 0; i < ni; ++i) {
        st.interior_density[i] = raw[i] / st.Z;
        st.interior_mu_weights[i] = mesh.interior_weights[i] * st.interior_density[i];
    }
    st.boundary_mu_weights.resize(nb);
    st.boundary_density.resize(nb);
    for (std::size_t j = 0; j < nb; ++j) {
        double p = power_neg_beta(oracle.value(t, mesh.boundary_nodes[j]), beta, "build_measure");
        st.boundary_density[j] = p / st.Z;
        st.boundary_mu_weights[j] = mesh.boundary_weights[j] * st.boundary_density[j];
    }
    return st;
}

double eval_phi(const Mesh& mesh, const FieldOracle& oracle, double t, double beta) {
    const double n = mesh.n;
    if (std::abs(beta - n) <= 1e-12 * std::max(1.0, std::abs(beta)))
        throw std::invalid_argument("eval_phi: beta = n is excluded (beta != n required)");
    std::vector<double> raw(mesh.n_interior());
    for (std::size_t i = 0; i < raw.size(); ++i)
        raw[i] = power_neg_beta(oracle.value(t, mesh.interior_nodes[i]), beta, "eval_phi");
    double Z = simd::dot(mesh.interior_weights.data(), raw.data(), raw.size());
    return std::exp(-std::log(Z) / (beta - n));
}

double mean_under_mu(const MeasureState& state, const std::vector<double>& g) {
    if (g.size() != state.interior_mu_weights.size())
        throw std::invalid_argument("mean_under_mu: size mismatch");
    return simd::dot(state.interior_mu_weights.data(), g.data(), g.size());
}

double variance_under_mu(const MeasureState& state, const std::vector<double>& g) {
    double m = mean_under_mu(state, g);
    std::vector<double> d(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) d[i] = g[i] - m;
    double var = simd::dot3(state.interior_mu_weights.data(), d.data(), d.data(), d.size());
    return var < 0.0 ? 0.0 : var;  // weights are positive; only rounding can go below 0
}

double boundary_integral_mu(const MeasureState& state, const std::vector<double>& g) {
    if (g.size() != state.boundary_mu_weights.size())
        throw std::invalid_argument("boundary_integral_mu: size mismatch");
    return simd::dot(state.boundary_mu_weights.data(), g.data(), g.size());
}

}  // namespace prekopa
