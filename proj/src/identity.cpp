#include "prekopa/identity.hpp"

#include <cmath>
#include <stdexcept>

#include "prekopa/simd/kernels.hpp"

namespace prekopa {

namespace {

void require_beta_not_n(double beta, int n, const char* where) {
    if (std::abs(beta - n) <= 1e-12 * std::max(1.0, std::abs(beta)))
        throw std::invalid_argument(std::string(where) + ": beta = n is excluded");
}

double integral_mu(const MeasureState& state, const std::vector<double>& g) {
    return simd::dot(state.interior_mu_weights.data(), g.data(), g.size());
}

}  // namespace

double term_hessian_X(const Mesh& mesh, const MeasureState& state, const FieldOracle& oracle,
                      const NeumannSolution& sol) {
    const double beta = state.beta;
    const int n = mesh.n;
    require_beta_not_n(beta, n, "term_hessian_X");
    std::vector<double> g(mesh.n_interior());
    for (std::size_t i = 0; i < g.size(); ++i) {
        Vec2 x = mesh.interior_nodes[i];
        Vec2 Xs = beta * sol.fields.grad[i];
        g[i] = hessian_quadratic_form(oracle, state.t, x, 1.0, Xs) / oracle.value(state.t, x);
    }
    return beta / (beta - n) * integral_mu(state, g);
}

double term_hs_defect(const Mesh& mesh, const MeasureState& state, const NeumannSolution& sol) {
    const double beta = state.beta;
    const int n = mesh.n;
    require_beta_not_n(beta, n, "term_hs_defect");
    std::vector<double> g(mesh.n_interior());
    for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = sol.fields.hess[i].frob2() - sol.fields.lap[i] * sol.fields.lap[i] / n;
    return beta * beta / (beta - n) * integral_mu(state, g);
}

double term_square(const Mesh& mesh, const MeasureState& state, const FieldOracle& oracle,
                   const NeumannSolution& sol) {
    const double beta = state.beta;
    const int n = mesh.n;
    require_beta_not_n(beta, n, "term_square");
    std::vector<double> dt_over_phi(mesh.n_interior());
    for (std::size_t i = 0; i < dt_over_phi.size(); ++i) {
        Vec2 x = mesh.interior_nodes[i];
        dt_over_phi[i] = oracle.dt(state.t, x) / oracle.value(state.t, x);
    }
    const double m = integral_mu(state, dt_over_phi);
    const double s = beta > n ? 1.0 : -1.0;
    const double a = std::sqrt(std::abs(beta - n) / n);
    const double b = s * std::sqrt(n / std::abs(beta - n)) * m;
    std::vector<double> g(mesh.n_interior());
    for (std::size_t i = 0; i < g.size(); ++i) {
        double q = a * sol.fields.lap[i] - b;
        g[i] = q * q;
    }
    return beta / std::abs(beta - n) * integral_mu(state, g);
}

double term_boundary(const Mesh& mesh, const MeasureState& state, const NeumannSolution& sol,
                     double bc_tol) {
    const double beta = state.beta;
    const int n = mesh.n;
    require_beta_not_n(beta, n, "term_boundary");
    if (mesh.n == 1) return 0.0;  // trivial tangent space

    double grad_scale = 0.0;
    for (const Vec2& g : sol.fields.grad_bnd) grad_scale = std::max(grad_scale, norm(g));
    if (sol.diag.bc_residual > bc_tol * std::max(1.0, grad_scale))
        throw std::runtime_error("term_boundary: boundary condition residual too large");

    const double radius = std::get<Disk>(mesh.domain).radius;
    std::vector<double> g(mesh.n_boundary());
    for (std::size_t j = 0; j < g.size(); ++j) {
        Vec2 grad = sol.fields.grad_bnd[j];
        Vec2 tang = grad - dot(grad, mesh.normals[j]) * mesh.normals[j];
        g[j] = dot(tang, tang) / radius;
    }
    return beta * beta / (beta - n) * boundary_integral_mu(state, g);
}

double phi2_via_eq3(const IdentityTerms& terms, double phi) { return terms.sum() * phi; }

double phi2_via_eq5(const Mesh& mesh, const MeasureState& state, const FieldOracle& oracle) {
    const double beta = state.beta;
    const int n = mesh.n;
    require_beta_not_n(beta, n, "phi2_via_eq5");
    if (std::abs(beta) <= 1e-12)
        throw std::invalid_argument("phi2_via_eq5: beta = 0 is excluded");
    std::vector<double> g(mesh.n_interior()), a(mesh.n_interior());
    for (std::size_t i = 0; i < g.size(); ++i) {
        Vec2 x = mesh.interior_nodes[i];
        double phi_val = oracle.value(state.t, x);
        g[i] = oracle.dt(state.t, x) / phi_val;
        a[i] = oracle.dtt(state.t, x) / phi_val;
    }
    const double m = integral_mu(state, g);
    const double var = variance_under_mu(state, g);
    const double rhs = integral_mu(state, a) - (beta + 1.0) * var + n / (beta - n) * m * m;
    // (beta-n)/beta * phi''/phi = rhs
    double phi = std::exp(-std::log(state.Z) / (beta - n));
    return beta / (beta - n) * rhs * phi;
}

FdSecondDerivative phi2_fd(const Mesh& mesh, const FieldOracle& oracle, double t, double beta,
                           double h_t) {
    if (!(h_t > 0.0)) throw std::invalid_argument("phi2_fd: h_t must be positive");
    Vec2 probe = mesh.interior_nodes.front();
    for (double s : {-2.0 * h_t, 2.0 * h_t})
        if (!oracle.box.contains(t + s, probe, mesh.n))
            throw std::invalid_argument("phi2_fd: stencil leaves the validity box");

    auto five_point = [&](double h) {
        double fm2 = eval_phi(mesh, oracle, t - 2 * h, beta);
        double fm1 = eval_phi(mesh, oracle, t - h, beta);
        double f0 = eval_phi(mesh, oracle, t, beta);
        double fp1 = eval_phi(mesh, oracle, t + h, beta);
        double fp2 = eval_phi(mesh, oracle, t + 2 * h, beta);
        return (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h);
    };
    double dh = five_point(h_t);
    double dh2 = five_point(0.5 * h_t);
    FdSecondDerivative out;
    out.value = (16.0 * dh2 - dh) / 15.0;
    out.sensitivity = std::abs(dh2 - dh);
    return out;
}

IdentityReport verify_identity(const Mesh& mesh, const FieldOracle& oracle, double t, double beta,
                               double h_t, SolverOptions solver_opts) {
    IdentityReport rep;
    rep.t = t;
    rep.beta = beta;
    rep.n = mesh.n;
    require_beta_not_n(beta, mesh.n, "verify_identity");
    if (std::abs(beta) <= 1e-12)
        throw std::invalid_argument("verify_identity: beta = 0 is excluded");
    if (h_t <= 0.0) h_t = 1e-3 * (1.0 + std::abs(t));

    rep.phi = eval_phi(mesh, oracle, t, beta);
    MeasureState state = build_measure(mesh, oracle, t, beta);
    rep.mu_weight_sum = simd::sum(state.interior_mu_weights.data(), mesh.n_interior());

    std::vector<double> f(mesh.n_interior());
    for (std::size_t i = 0; i < f.size(); ++i) {
        Vec2 x = mesh.interior_nodes[i];
        f[i] = oracle.dt(t, x) / oracle.value(t, x);
    }
    double m = mean_under_mu(state, f);
    simd::add_scalar(-m, f.data(), f.size());
    rep.f_max_abs = simd::max_abs(f.data(), f.size());

    WeakSystem system = assemble(mesh, state);
    NeumannSolution sol = solve_neumann(mesh, system, state, oracle, f, solver_opts);
    rep.solver = sol.diag;

    rep.terms.t1_hessian_x = term_hessian_X(mesh, state, oracle, sol);
    rep.terms.t2_hs_defect = term_hs_defect(mesh, state, sol);
    rep.terms.t3_square = term_square(mesh, state, oracle, sol);
    rep.terms.t4_boundary = term_boundary(mesh, state, sol);
    rep.phi2_eq3 = phi2_via_eq3(rep.terms, rep.phi);
    rep.phi2_eq5 = phi2_via_eq5(mesh, state, oracle);
    FdSecondDerivative fd = phi2_fd(mesh, oracle, t, beta, h_t);
    rep.phi2_fd = fd.value;
    rep.fd_sensitivity = fd.sensitivity;

    double denom = std::max(std::abs(rep.phi2_fd), 1e-9 * std::max(1.0, std::abs(rep.phi)));
    rep.res_fd_eq5 = std::abs(rep.phi2_eq5 - rep.phi2_fd) / denom;
    rep.res_fd_eq3 = std::abs(rep.phi2_eq3 - rep.phi2_fd) / denom;
    rep.res_eq5_eq3 = std::abs(rep.phi2_eq3 - rep.phi2_eq5) / denom;
    double vmax = std::max({rep.phi2_fd, rep.phi2_eq5, rep.phi2_eq3});
    double vmin = std::min({rep.phi2_fd, rep.phi2_eq5, rep.phi2_eq3});
    rep.spread = (vmax - vmin) / denom;

    double min_defect = 0.0;
    for (std::size_t i = 0; i < mesh.n_interior(); ++i) {
        double d = sol.fields.hess[i].frob2() -
                   sol.fields.lap[i] * sol.fields.lap[i] / mesh.n;
        min_defect = std::min(min_defect, d);
    }
    rep.min_cs_defect = min_defect;

    const double slack = 1e-8;
    const double terms[4] = {rep.terms.t1_hessian_x, rep.terms.t2_hs_defect,
                             rep.terms.t3_square, rep.terms.t4_boundary};
    if (oracle.convexity == Convexity::convex && beta > mesh.n) {
        rep.sign_applicable = true;
        for (int k = 0; k < 4; ++k) rep.term_sign_ok[k] = terms[k] >= -slack;
    } else if (oracle.convexity == Convexity::concave && beta < 0.0) {
        rep.sign_applicable = true;
        for (int k = 0; k < 4; ++k) rep.term_sign_ok[k] = terms[k] <= slack;
    }
    rep.sign_certificate = rep.term_sign_ok[0] && rep.term_sign_ok[1] && rep.term_sign_ok[2] &&
                           rep.term_sign_ok[3];
    return rep;
}

IbpResiduals check_ibp_identities(const Mesh& mesh, const MeasureState& state,
                                  const FieldOracle& oracle, const NeumannSolution& sol,
                                  const std::vector<double>& f_projected) {
    const double beta = state.beta;
    const std::size_t ni = mesh.n_interior(), nb = mesh.n_boundary();
    const double t = state.t;

    std::vector<double> lu = apply_strong_operator(mesh, oracle, t, beta, sol.fields);
    std::vector<double> hess2(ni), drift2(ni), hess_quad(ni), dtp(ni), drift(ni), gdt(ni);
    for (std::size_t i = 0; i < ni; ++i) {
        Vec2 x = mesh.interior_nodes[i];
        double phi = oracle.value(t, x);
        Vec2 g = sol.fields.grad[i];
        double dg = dot(oracle.grad_x(t, x), g) / phi;
        hess2[i] = sol.fields.hess[i].frob2();
        drift[i] = dg;
        drift2[i] = dg * dg;
        hess_quad[i] = oracle.hess_x(t, x).quad(g) / phi;
        dtp[i] = oracle.dt(t, x) / phi;
        gdt[i] = dot(oracle.grad_x_dt(t, x), g) / phi;
    }
    std::vector<double> bnd_flux(nb), bnd_ii(nb);
    double radius = mesh.n == 2 ? std::get<Disk>(mesh.domain).radius : 1.0;
    for (std::size_t j = 0; j < nb; ++j) {
        Vec2 g = sol.fields.grad_bnd[j];
        bnd_flux[j] = dot(sol.fields.hess_bnd[j].apply(g), mesh.normals[j]);
        if (mesh.n == 2) {
            Vec2 tang = g - dot(g, mesh.normals[j]) * mesh.normals[j];
            bnd_ii[j] = dot(tang, tang) / radius;
        }
    }

    auto rel = [](double lhs, double rhs, std::initializer_list<double> scales) {
        double s = 0.0;
        for (double v : scales) s = std::max(s, std::abs(v));
        if (s == 0.0) return 0.0;
        return std::abs(lhs - rhs) / s;
    };

    IbpResiduals res;
    {
        std::vector<double> lu2(ni);
        for (std::size_t i = 0; i < ni; ++i) lu2[i] = lu[i] * lu[i];
        double a1 = integral_mu(state, lu2);
        double b1 = integral_mu(state, hess2);
        double b2 = beta * integral_mu(state, hess_quad);
        double b3 = -beta * integral_mu(state, drift2);
        double b4 = -boundary_integral_mu(state, bnd_flux);
        res.int_lu_sq = rel(a1, b1 + b2 + b3 + b4, {a1, b1, b2, b3, b4});
    }
    {
        std::vector<double> f2(ni), lapf(ni), lap2(ni);
        for (std::size_t i = 0; i < ni; ++i) {
            f2[i] = f_projected[i] * f_projected[i];
            lapf[i] = sol.fields.lap[i] * f_projected[i];
            lap2[i] = sol.fields.lap[i] * sol.fields.lap[i];
        }
        double l1 = beta * beta * integral_mu(state, drift2);
        double r1 = integral_mu(state, f2) + integral_mu(state, lap2);
        double r2 = -2.0 * integral_mu(state, lapf);
        res.dem = rel(l1, r1 + r2, {l1, r1, r2});
    }
    {
        std::vector<double> lhs_g(ni), rhs_g(ni);
        for (std::size_t i = 0; i < ni; ++i) {
            lhs_g[i] = dtp[i] * drift[i];
            rhs_g[i] = dtp[i] * sol.fields.lap[i];
        }
        double l = (beta + 1.0) * integral_mu(state, lhs_g);
        double r1 = integral_mu(state, gdt);
        double r2 = integral_mu(state, rhs_g);
        res.ibp = rel(l, r1 + r2, {l, r1, r2});
    }
    {
        double l = boundary_integral_mu(state, bnd_flux);
        std::vector<double> neg_ii(nb);
        for (std::size_t j = 0; j < nb; ++j) neg_ii[j] = -bnd_ii[j];
        double r = boundary_integral_mu(state, neg_ii);
        res.second_form = rel(l, r, {l, r});
        double pw = 0.0;
        for (std::size_t j = 0; j < nb; ++j)
            pw = std::max(pw, std::abs(bnd_flux[j] + bnd_ii[j]));
        res.second_form_pointwise = pw;
    }
    return res;
}

Certificate certify_theorem2(TheoremCase which, const Mesh& mesh, const FieldOracle& oracle,
                             const std::vector<double>& t_grid,
                             const std::vector<double>& betas, double sign_slack, double h_t) {
    const int n = mesh.n;
    if (which == TheoremCase::convex_i) {
        if (oracle.convexity != Convexity::convex)
            throw std::invalid_argument("Theorem 2(i) requires a convex oracle");
        for (double b : betas)
            if (!(b > n))
                throw std::invalid_argument("Theorem 2(i) requires beta > n");
    } else {
        if (oracle.convexity != Convexity::concave)
            throw std::invalid_argument("Theorem 2(ii) requires a concave oracle");
        for (double b : betas)
            if (!(b > 0.0))
                throw std::invalid_argument("Theorem 2(ii) requires beta > 0");
    }

    Certificate cert;
    cert.which = which;
    cert.pass = true;
    for (double beta_user : betas) {
        const double beta = which == TheoremCase::convex_i ? beta_user : -beta_user;
        for (double t : t_grid) {
            IdentityReport rep = verify_identity(mesh, oracle, t, beta, h_t);
            CertificateRow row;
            row.beta = beta_user;
            row.t = t;
            row.phi = rep.phi;
            row.terms = rep.terms;
            row.phi2 = rep.phi2_eq3;
            row.phi2_fd = rep.phi2_fd;
            if (which == TheoremCase::convex_i) {
                row.terms_ok = rep.terms.t1_hessian_x >= -sign_slack &&
                               rep.terms.t2_hs_defect >= -sign_slack &&
                               rep.terms.t3_square >= -sign_slack &&
                               rep.terms.t4_boundary >= -sign_slack;
                row.phi2_ok = row.phi2 >= -sign_slack * row.phi;
            } else {
                row.terms_ok = rep.terms.t1_hessian_x <= sign_slack &&
                               rep.terms.t2_hs_defect <= sign_slack &&
                               rep.terms.t3_square <= sign_slack &&
                               rep.terms.t4_boundary <= sign_slack;
                row.phi2_ok = row.phi2 <= sign_slack * row.phi;
            }
            cert.pass = cert.pass && row.terms_ok && row.phi2_ok;
            cert.rows.push_back(row);
        }
    }
    return cert;
}

LimitSweep beta_limit_sweep(const Mesh& mesh, const FieldOracle& oracle, double t,
                            const std::vector<double>& betas) {
    const int n = mesh.n;
    for (std::size_t k = 0; k + 1 < betas.size(); ++k)
        if (!(betas[k] < betas[k + 1]))
            throw std::invalid_argument("beta_limit_sweep: betas must be increasing");
    for (double b : betas)
        if (!(b > n)) throw std::invalid_argument("beta_limit_sweep: betas must exceed n");

    LimitSweep sweep;
    {
        std::vector<double> e(mesh.n_interior());
        for (std::size_t i = 0; i < e.size(); ++i)
            e[i] = std::exp(-oracle.value(t, mesh.interior_nodes[i]));
        double I = simd::dot(mesh.interior_weights.data(), e.data(), e.size());
        sweep.target_convex = -std::log(I);
        sweep.target_concave = std::log(I);
    }

    for (double beta : betas) {
        for (const Vec2& x : mesh.interior_nodes) {
            double v = oracle.value(t, x);
            if (!(1.0 + v / beta > 0.0) || !(1.0 - v / beta > 0.0))
                throw std::runtime_error(
                    "beta_limit_sweep: positive-part clamp triggered (integrand base <= 0)");
        }
        FieldOracle shifted = oracle;
        shifted.value = [&oracle, beta, sign = +1.0](double tt, Vec2 xx) {
            return 1.0 + sign * oracle.value(tt, xx) / beta;
        };
        double f_cvx = eval_phi(mesh, shifted, t, beta);
        shifted.value = [&oracle, beta, sign = -1.0](double tt, Vec2 xx) {
            return 1.0 + sign * oracle.value(tt, xx) / beta;
        };
        double f_ccv = eval_phi(mesh, shifted, t, -beta);

        LimitRow row;
        row.beta = beta;
        row.value_convex = (beta - n) * (f_cvx - 1.0);
        row.value_concave = (beta + n) * (f_ccv - 1.0);
        row.err_convex = std::abs(row.value_convex - sweep.target_convex);
        row.err_concave = std::abs(row.value_concave - sweep.target_concave);
        row.gap_convex = std::abs(f_cvx - 1.0);
        row.gap_concave = std::abs(f_ccv - 1.0);
        sweep.rows.push_back(row);
    }

    std::vector<double> bs, e1, e2, g1, g2;
    for (const LimitRow& r : sweep.rows) {
        bs.push_back(r.beta);
        e1.push_back(r.err_convex);
        e2.push_back(r.err_concave);
        g1.push_back(r.gap_convex);
        g2.push_back(r.gap_concave);
    }
    sweep.err_slope_convex = fit_loglog_slope(bs, e1);
    sweep.err_slope_concave = fit_loglog_slope(bs, e2);
    sweep.gap_slope_convex = fit_loglog_slope(bs, g1);
    sweep.gap_slope_concave = fit_loglog_slope(bs, g2);
    return sweep;
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y, double floor) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(y[i] > floor) || !(x[i] > 0.0)) continue;
        double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    if (m < 2) return std::nan("");
    double denom = m * sxx - sx * sx;
    return (m * sxy - sx * sy) / denom;
}

}  // namespace prekopa
