#include "prekopa/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "prekopa/errors.hpp"
#include "prekopa/simd/kernels.hpp"
#include "prekopa/stencils.hpp"

namespace prekopa {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kCellStencil = 4;   // density interpolation window per face
constexpr int kRecStencil = 5;    // reconstruction width
constexpr int kMinResolution = 8;

// One staggered face of the Dirichlet form between chain neighbors k, k+1:
// the two-point difference keeps the flux scheme pointwise consistent at the
// pole (wider radial stencils cannot cancel the angular 1/r part there). The
// density at the face midpoint is interpolated from a 4-node window.
void add_cell(TripletAccumulator& acc, TripletAccumulator* acc2,
              const std::vector<double>& coords, const std::vector<std::int32_t>& gids,
              const std::vector<double>& rho, std::size_t k, double geom_factor) {
    const std::size_t len = coords.size();
    const double mid = 0.5 * (coords[k] + coords[k + 1]);

    const std::size_t wi = std::min<std::size_t>(kCellStencil, len);
    std::size_t i0 = k >= 1 ? k - 1 : 0;
    if (i0 + wi > len) i0 = len - wi;
    std::vector<double> window(coords.begin() + i0, coords.begin() + i0 + wi);
    auto interp = fornberg_weights(mid, window, 0);
    double rho_mid = 0.0;
    for (std::size_t p = 0; p < wi; ++p) rho_mid += interp[0][p] * rho[i0 + p];
    if (!(rho_mid > 0.0)) rho_mid = 0.5 * (rho[k] + rho[k + 1]);

    const double d = 1.0 / (coords[k + 1] - coords[k]);
    const double gamma = geom_factor * rho_mid;
    const double s[2] = {-d, d};
    const std::int32_t g[2] = {gids[k], gids[k + 1]};
    for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q) {
            acc.add(g[p], g[q], gamma * s[p] * s[q]);
            if (acc2) acc2->add(g[p], g[q], gamma * s[p] * s[q]);
        }
}

// Zero-normal-derivative elimination stencil at the chain end holding the
// boundary node: derivative weights at the boundary coordinate determine the
// boundary value from the nearest interior nodes.
std::vector<std::pair<std::int32_t, double>> elimination_stencil(
    const std::vector<double>& coords, const std::vector<std::int32_t>& gids, bool at_back) {
    const std::size_t len = coords.size();
    const std::size_t w = std::min<std::size_t>(kRecStencil, len);
    const std::size_t w0 = at_back ? len - w : 0;
    const std::size_t bpos = at_back ? len - 1 : 0;
    std::vector<double> window(coords.begin() + w0, coords.begin() + w0 + w);
    auto fw = fornberg_weights(coords[bpos], window, 1);
    const std::size_t blocal = bpos - w0;
    const double wb = fw[1][blocal];
    std::vector<std::pair<std::int32_t, double>> out;
    for (std::size_t p = 0; p < w; ++p) {
        if (p == blocal) continue;
        out.push_back({gids[w0 + p], -fw[1][p] / wb});
    }
    return out;
}

// Dense periodic spectral differentiation matrices on an even uniform grid.
std::vector<double> spectral_d1(int m) {
    const double h = 2.0 * kPi / m;
    std::vector<double> d(static_cast<std::size_t>(m) * m, 0.0);
    for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k) {
            if (j == k) continue;
            int diff = j - k;
            double sign = (diff % 2 == 0) ? 1.0 : -1.0;
            d[static_cast<std::size_t>(j) * m + k] = 0.5 * sign / std::tan(0.5 * diff * h);
        }
    return d;
}

std::vector<double> spectral_d2(int m) {
    const double h = 2.0 * kPi / m;
    std::vector<double> d(static_cast<std::size_t>(m) * m, 0.0);
    for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k) {
            double& e = d[static_cast<std::size_t>(j) * m + k];
            if (j == k) {
                e = -kPi * kPi / (3.0 * h * h) - 1.0 / 6.0;
            } else {
                int diff = j - k;
                double sign = (diff % 2 == 0) ? 1.0 : -1.0;
                double s = std::sin(0.5 * diff * h);
                e = -0.5 * sign / (s * s);
            }
        }
    return d;
}

void apply_dense(const std::vector<double>& d, int m, const double* x, double* y) {
    for (int j = 0; j < m; ++j) {
        double s = 0.0;
        const double* row = d.data() + static_cast<std::size_t>(j) * m;
        for (int k = 0; k < m; ++k) s += row[k] * x[k];
        y[j] = s;
    }
}

struct ChainDerivatives {
    std::vector<double> d1, d2;
};

// 5-point derivative reconstruction along a 1D chain of (possibly nonuniform)
// coordinates.
ChainDerivatives chain_derivatives(const std::vector<double>& coords,
                                   const std::vector<double>& vals) {
    const std::size_t len = coords.size();
    ChainDerivatives out;
    out.d1.resize(len);
    out.d2.resize(len);
    const std::size_t w = std::min<std::size_t>(kRecStencil, len);
    for (std::size_t p = 0; p < len; ++p) {
        std::size_t w0 = p >= 2 ? p - 2 : 0;
        if (w0 + w > len) w0 = len - w;
        std::vector<double> window(coords.begin() + w0, coords.begin() + w0 + w);
        auto fw = fornberg_weights(coords[p], window, 2);
        double d1 = 0.0, d2 = 0.0;
        for (std::size_t q = 0; q < w; ++q) {
            d1 += fw[1][q] * vals[w0 + q];
            d2 += fw[2][q] * vals[w0 + q];
        }
        out.d1[p] = d1;
        out.d2[p] = d2;
    }
    return out;
}

// Diameter chain through the disk center: the ray at theta_j continued by the
// opposite ray. Positions 0..mr hold the negative side (boundary first),
// mr+1..2mr+1 the positive side (boundary last).
struct DiameterChain {
    std::vector<double> coords;
    std::vector<std::int32_t> gids;
};

DiameterChain diameter_chain(const Mesh& mesh, int j) {
    const int mr = mesh.resolution.m_r, mt = mesh.resolution.m_theta;
    const int jj = j + mt / 2;
    const double R = std::get<Disk>(mesh.domain).radius;
    const std::size_t ni = mesh.n_interior();
    DiameterChain c;
    c.coords.resize(2 * mr + 2);
    c.gids.resize(2 * mr + 2);
    c.coords[0] = -R;
    c.gids[0] = static_cast<std::int32_t>(ni + jj);
    for (int i = 0; i < mr; ++i) {
        c.coords[1 + i] = -mesh.radial[mr - 1 - i];
        c.gids[1 + i] = static_cast<std::int32_t>(mesh.node_index(mr - 1 - i, jj));
        c.coords[mr + 1 + i] = mesh.radial[i];
        c.gids[mr + 1 + i] = static_cast<std::int32_t>(mesh.node_index(i, j));
    }
    c.coords[2 * mr + 1] = R;
    c.gids[2 * mr + 1] = static_cast<std::int32_t>(ni + j);
    return c;
}

}  // namespace

WeakSystem assemble(const Mesh& mesh, const MeasureState& state) {
    const std::size_t ni = mesh.n_interior(), nb = mesh.n_boundary();
    if (state.interior_mu_weights.size() != ni)
        throw std::invalid_argument("assemble: mesh/state mismatch");
    for (double w : state.interior_mu_weights)
        if (!(w > 0.0) || !std::isfinite(w))
            throw std::runtime_error("assemble: degenerate measure weights");

    WeakSystem sys;
    sys.n_interior = ni;
    sys.n_boundary = nb;
    sys.mass = state.interior_mu_weights;
    sys.elim.resize(nb);
    TripletAccumulator acc(ni + nb);

    // Plain cell volumes for the solver side, normalized like mu_t.
    sys.solver_mass.resize(ni);
    {
        double total = 0.0;
        for (std::size_t i = 0; i < ni; ++i) {
            double vol = mesh.n == 1
                             ? mesh.h_r
                             : mesh.h_r * norm(mesh.interior_nodes[i] -
                                               std::get<Disk>(mesh.domain).center) *
                                   mesh.h_theta;
            sys.solver_mass[i] = vol * state.interior_density[i];
            total += sys.solver_mass[i];
        }
        for (double& v : sys.solver_mass) v /= total;
    }

    if (mesh.n == 1) {
        const auto& iv = std::get<Interval>(mesh.domain);
        const int m = mesh.resolution.m_r;
        std::vector<double> coords(m + 2);
        std::vector<std::int32_t> gids(m + 2);
        std::vector<double> rho(m + 2);
        coords[0] = iv.a;
        gids[0] = static_cast<std::int32_t>(ni);
        rho[0] = state.boundary_density[0];
        for (int i = 0; i < m; ++i) {
            coords[i + 1] = mesh.radial[i];
            gids[i + 1] = i;
            rho[i + 1] = state.interior_density[i];
        }
        coords[m + 1] = iv.b;
        gids[m + 1] = static_cast<std::int32_t>(ni + 1);
        rho[m + 1] = state.boundary_density[1];
        TripletAccumulator acc_solve(ni);
        for (int k = 0; k <= m; ++k) {
            bool wall = (k == 0 || k == m);
            add_cell(acc, wall ? nullptr : &acc_solve, coords, gids, rho, k,
                     coords[k + 1] - coords[k]);
        }
        sys.A = acc.build();
        sys.A_solve = acc_solve.build();
        sys.elim[0] = elimination_stencil(coords, gids, false);
        sys.elim[1] = elimination_stencil(coords, gids, true);
        return sys;
    }

    const int mr = mesh.resolution.m_r, mt = mesh.resolution.m_theta;
    const double dth = mesh.h_theta;
    TripletAccumulator acc_solve(ni);

    // Radial faces along each diameter. The pole cell has no inner face, so
    // the chain skips the segment between the two innermost nodes; ring-0
    // nodes stay coupled azimuthally and to ring 1.
    for (int j = 0; j < mt / 2; ++j) {
        DiameterChain chain = diameter_chain(mesh, j);
        const int jj = j + mt / 2;
        std::vector<double> rho(2 * mr + 2);
        rho[0] = state.boundary_density[jj];
        for (int i = 0; i < mr; ++i) {
            rho[1 + i] = state.interior_density[mesh.node_index(mr - 1 - i, jj)];
            rho[mr + 1 + i] = state.interior_density[mesh.node_index(i, j)];
        }
        rho[2 * mr + 1] = state.boundary_density[j];
        for (int k = 0; k <= 2 * mr; ++k) {
            if (k == mr) continue;  // no face across the pole
            const double s0 = chain.coords[k], s1 = chain.coords[k + 1];
            double geom = (s1 - s0) * std::abs(0.5 * (s0 + s1)) * dth;
            bool wall = (k == 0 || k == 2 * mr);
            add_cell(acc, wall ? nullptr : &acc_solve, chain.coords, chain.gids, rho, k, geom);
        }
    }

    // Angular flux cells on each interior ring (periodic staggered stencil).
    {
        std::vector<double> stencil_coords = {-dth, 0.0, dth, 2.0 * dth};
        auto fw = fornberg_weights(0.5 * dth, stencil_coords, 1);
        for (int i = 0; i < mr; ++i) {
            const double r = mesh.radial[i];
            const double radial_factor = mesh.h_r / r * dth;
            for (int j = 0; j < mt; ++j) {
                int idx[4] = {(j - 1 + mt) % mt, j, (j + 1) % mt, (j + 2) % mt};
                double rho_mid = 0.0;
                for (int p = 0; p < 4; ++p)
                    rho_mid += fw[0][p] * state.interior_density[mesh.node_index(i, idx[p])];
                if (!(rho_mid > 0.0))
                    rho_mid = 0.5 * (state.interior_density[mesh.node_index(i, idx[1])] +
                                     state.interior_density[mesh.node_index(i, idx[2])]);
                double gamma = radial_factor * rho_mid;
                for (int p = 0; p < 4; ++p)
                    for (int q = 0; q < 4; ++q) {
                        double v = gamma * fw[1][p] * fw[1][q];
                        acc.add(static_cast<std::int32_t>(mesh.node_index(i, idx[p])),
                                static_cast<std::int32_t>(mesh.node_index(i, idx[q])), v);
                        acc_solve.add(static_cast<std::int32_t>(mesh.node_index(i, idx[p])),
                                      static_cast<std::int32_t>(mesh.node_index(i, idx[q])), v);
                    }
            }
        }
    }

    sys.A = acc.build();
    sys.A_solve = acc_solve.build();
    for (int j = 0; j < mt / 2; ++j) {
        DiameterChain chain = diameter_chain(mesh, j);
        sys.elim[j + mt / 2] = elimination_stencil(chain.coords, chain.gids, false);
        sys.elim[j] = elimination_stencil(chain.coords, chain.gids, true);
    }
    return sys;
}

DerivativeFields reconstruct_derivatives(const Mesh& mesh, const std::vector<double>& u_interior,
                                         const std::vector<double>& u_boundary) {
    const std::size_t ni = mesh.n_interior(), nb = mesh.n_boundary();
    if (u_interior.size() != ni || u_boundary.size() != nb)
        throw std::invalid_argument("reconstruct_derivatives: size mismatch");

    DerivativeFields f;
    f.grad.resize(ni);
    f.hess.resize(ni);
    f.lap.resize(ni);
    f.grad_bnd.resize(nb);
    f.hess_bnd.resize(nb);
    f.lap_bnd.resize(nb);

    if (mesh.n == 1) {
        const int m = mesh.resolution.m_r;
        if (m < kMinResolution)
            throw UnderResolvedError("reconstruct_derivatives: need >= 8 nodes per direction");
        const auto& iv = std::get<Interval>(mesh.domain);
        std::vector<double> coords(m + 2), vals(m + 2);
        coords[0] = iv.a;
        vals[0] = u_boundary[0];
        for (int i = 0; i < m; ++i) {
            coords[i + 1] = mesh.radial[i];
            vals[i + 1] = u_interior[i];
        }
        coords[m + 1] = iv.b;
        vals[m + 1] = u_boundary[1];
        auto d = chain_derivatives(coords, vals);
        for (int i = 0; i < m; ++i) {
            f.grad[i] = {d.d1[i + 1], 0.0};
            f.hess[i] = {d.d2[i + 1], 0.0, 0.0};
            f.lap[i] = d.d2[i + 1];
        }
        f.grad_bnd[0] = {d.d1[0], 0.0};
        f.hess_bnd[0] = {d.d2[0], 0.0, 0.0};
        f.lap_bnd[0] = d.d2[0];
        f.grad_bnd[1] = {d.d1[m + 1], 0.0};
        f.hess_bnd[1] = {d.d2[m + 1], 0.0, 0.0};
        f.lap_bnd[1] = d.d2[m + 1];
        return f;
    }

    const auto& disk = std::get<Disk>(mesh.domain);
    const int mr = mesh.resolution.m_r, mt = mesh.resolution.m_theta;
    if (mr < kMinResolution || mt < kMinResolution)
        throw UnderResolvedError("reconstruct_derivatives: need >= 8 nodes per direction");

    // Radial derivatives along diameter chains (smooth through the center).
    const int rings = mr + 1;  // interior rings plus the boundary ring
    std::vector<double> u_r(static_cast<std::size_t>(rings) * mt);
    std::vector<double> u_rr(static_cast<std::size_t>(rings) * mt);
    {
        std::vector<double> vals(2 * mr + 2);
        for (int j = 0; j < mt / 2; ++j) {
            DiameterChain chain = diameter_chain(mesh, j);
            const int jj = j + mt / 2;
            vals[0] = u_boundary[jj];
            for (int i = 0; i < mr; ++i) {
                vals[1 + i] = u_interior[mesh.node_index(mr - 1 - i, jj)];
                vals[mr + 1 + i] = u_interior[mesh.node_index(i, j)];
            }
            vals[2 * mr + 1] = u_boundary[j];
            auto d = chain_derivatives(chain.coords, vals);
            for (int i = 0; i < mr; ++i) {
                // Positive side: d/dr = d/ds. Negative side: d/dr = -d/ds.
                u_r[static_cast<std::size_t>(i) * mt + j] = d.d1[mr + 1 + i];
                u_rr[static_cast<std::size_t>(i) * mt + j] = d.d2[mr + 1 + i];
                u_r[static_cast<std::size_t>(i) * mt + jj] = -d.d1[mr - i];
                u_rr[static_cast<std::size_t>(i) * mt + jj] = d.d2[mr - i];
            }
            u_r[static_cast<std::size_t>(mr) * mt + j] = d.d1[2 * mr + 1];
            u_rr[static_cast<std::size_t>(mr) * mt + j] = d.d2[2 * mr + 1];
            u_r[static_cast<std::size_t>(mr) * mt + jj] = -d.d1[0];
            u_rr[static_cast<std::size_t>(mr) * mt + jj] = d.d2[0];
        }
    }

    // Angular derivatives ring by ring (spectral).
    auto d1 = spectral_d1(mt);
    auto d2 = spectral_d2(mt);
    std::vector<double> row(mt), u_th(static_cast<std::size_t>(rings) * mt),
        u_thth(static_cast<std::size_t>(rings) * mt), u_rth(static_cast<std::size_t>(rings) * mt);
    for (int i = 0; i < rings; ++i) {
        for (int j = 0; j < mt; ++j)
            row[j] = (i < mr) ? u_interior[mesh.node_index(i, j)] : u_boundary[j];
        apply_dense(d1, mt, row.data(), u_th.data() + static_cast<std::size_t>(i) * mt);
        apply_dense(d2, mt, row.data(), u_thth.data() + static_cast<std::size_t>(i) * mt);
        apply_dense(d1, mt, u_r.data() + static_cast<std::size_t>(i) * mt,
                    u_rth.data() + static_cast<std::size_t>(i) * mt);
    }

    auto to_cartesian = [&](int i, int j, double r) {
        const double c = std::cos(mesh.theta[j]), s = std::sin(mesh.theta[j]);
        const std::size_t k = static_cast<std::size_t>(i) * mt + j;
        const double ur = u_r[k], urr = u_rr[k];
        const double ut = u_th[k] / r, utt = u_thth[k] / (r * r), urt = u_rth[k] / r;
        const double ut2 = u_th[k] / (r * r);
        Vec2 g{c * ur - s * ut, s * ur + c * ut};
        Sym2 H;
        H.xx = c * c * urr - 2.0 * c * s * urt + s * s * utt + s * s * ur / r + 2.0 * c * s * ut2;
        H.yy = s * s * urr + 2.0 * c * s * urt + c * c * utt + c * c * ur / r - 2.0 * c * s * ut2;
        H.xy = c * s * urr + (c * c - s * s) * urt - c * s * utt - c * s * ur / r -
               (c * c - s * s) * ut2;
        return std::pair<Vec2, Sym2>{g, H};
    };

    for (int i = 0; i < mr; ++i)
        for (int j = 0; j < mt; ++j) {
            auto [g, H] = to_cartesian(i, j, mesh.radial[i]);
            std::size_t k = mesh.node_index(i, j);
            f.grad[k] = g;
            f.hess[k] = H;
            f.lap[k] = H.trace();
        }
    for (int j = 0; j < mt; ++j) {
        auto [g, H] = to_cartesian(mr, j, disk.radius);
        f.grad_bnd[j] = g;
        f.hess_bnd[j] = H;
        f.lap_bnd[j] = H.trace();
    }
    return f;
}

NeumannSolution solve_neumann(const Mesh& mesh, const WeakSystem& system,
                              const MeasureState& state, const FieldOracle& oracle,
                              const std::vector<double>& f, SolverOptions opts) {
    const std::size_t ni = system.n_interior, nb = system.n_boundary;
    if (f.size() != ni) throw std::invalid_argument("solve_neumann: f size mismatch");

    NeumannSolution sol;
    double pre_mean = simd::dot(system.mass.data(), f.data(), ni);
    sol.diag.pre_projection_mean = pre_mean;
    double fscale = std::max(1.0, simd::max_abs(f.data(), ni));
    if (std::abs(pre_mean) > opts.compat_tol * fscale)
        throw std::runtime_error(
            "solve_neumann: incompatible right-hand side (int f dmu too far from 0)");

    // Discrete solvability needs mean zero in the solver's own quadrature.
    std::vector<double> fp = f;
    double solver_mean = simd::dot(system.solver_mass.data(), fp.data(), ni);
    simd::add_scalar(-solver_mean, fp.data(), ni);

    // A right-hand side at rounding level has no PDE content; iterating on it
    // would chase noise below the attainable residual floor.
    if (simd::max_abs(fp.data(), ni) <= 1e-13 * fscale) fp.assign(ni, 0.0);

    std::vector<double> b(ni);
    for (std::size_t i = 0; i < ni; ++i) b[i] = -system.solver_mass[i] * fp[i];

    std::size_t cap = opts.max_iterations;
    if (cap == 0)
        cap = 4000 + 80 * static_cast<std::size_t>(mesh.resolution.m_r + mesh.resolution.m_theta);
    CgResult cg = cg_solve_singular(system.A_solve, b, opts.rel_tol, cap);
    if (!cg.converged)
        throw std::runtime_error("solve_neumann: conjugate gradients did not reach tolerance");
    sol.diag.cg_iterations = cg.iterations;
    sol.diag.cg_rel_residual = cg.rel_residual;

    sol.u = std::move(cg.x);
    sol.u_bnd.resize(nb);
    for (std::size_t j = 0; j < nb; ++j) {
        double v = 0.0;
        for (const auto& [idx, w] : system.elim[j]) v += w * sol.u[idx];
        sol.u_bnd[j] = v;
    }

    // Gauge: int u dmu_t = 0.
    double gauge = simd::dot(system.mass.data(), sol.u.data(), ni);
    simd::add_scalar(-gauge, sol.u.data(), ni);
    simd::add_scalar(-gauge, sol.u_bnd.data(), nb);
    sol.diag.gauge = std::abs(simd::dot(system.mass.data(), sol.u.data(), ni));

    sol.fields = reconstruct_derivatives(mesh, sol.u, sol.u_bnd);

    double bc = 0.0;
    for (std::size_t j = 0; j < nb; ++j)
        bc = std::max(bc, std::abs(dot(sol.fields.grad_bnd[j], mesh.normals[j])));
    sol.diag.bc_residual = bc;

    std::vector<double> Lu = apply_strong_operator(mesh, oracle, state.t, state.beta, sol.fields);
    double sr = 0.0;
    for (std::size_t i = 0; i < ni; ++i) sr = std::max(sr, std::abs(Lu[i] - fp[i]));
    sol.diag.strong_residual = sr;
    return sol;
}

std::vector<double> apply_strong_operator(const Mesh& mesh, const FieldOracle& oracle, double t,
                                          double beta, const DerivativeFields& fields) {
    const std::size_t ni = mesh.n_interior();
    if (fields.lap.size() != ni)
        throw std::invalid_argument("apply_strong_operator: fields/mesh mismatch");
    std::vector<double> out(ni);
    for (std::size_t i = 0; i < ni; ++i) {
        Vec2 x = mesh.interior_nodes[i];
        double phi = oracle.value(t, x);
        out[i] = fields.lap[i] - beta * dot(oracle.grad_x(t, x), fields.grad[i]) / phi;
    }
    return out;
}

}  // namespace prekopa
