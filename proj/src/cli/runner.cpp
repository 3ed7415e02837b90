#include "prekopa/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <vector>

#include "prekopa/errors.hpp"
#include "prekopa/identity.hpp"
#include "prekopa/simd/kernels.hpp"

namespace prekopa {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

constexpr double kSpreadFloor = 1e-8;
constexpr double kIbpFloor = 1e-12;

std::string flag(bool ok) { return ok ? "pass" : "fail"; }

struct Emitter {
    std::vector<std::string> summary;
    std::vector<std::string> table;

    void kv(const std::string& key, const std::string& value) {
        summary.push_back(key + " = " + value);
    }
    void kv(const std::string& key, double value) { kv(key, fmt17(value)); }
    void row(const std::vector<std::string>& cells) {
        std::string line;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) line += ",";
            line += cells[i];
        }
        table.push_back(line);
    }
    void write(const std::string& dir) const {
        std::filesystem::create_directories(dir);
        std::ofstream s(dir + "/summary.txt", std::ios::binary);
        for (const auto& line : summary) s << line << "\n";
        std::ofstream t(dir + "/table.csv", std::ios::binary);
        for (const auto& line : table) t << line << "\n";
        if (!s || !t) throw std::runtime_error("cannot write report files under '" + dir + "'");
    }
};

void echo_config(Emitter& em, const RunConfig& cfg, Resolution res) {
    em.kv("run.mode", mode_name(cfg.mode));
    if (const auto* iv = std::get_if<Interval>(&cfg.domain)) {
        em.kv("config.domain.kind", "interval");
        em.kv("config.domain.a", iv->a);
        em.kv("config.domain.b", iv->b);
    } else {
        const auto& disk = std::get<Disk>(cfg.domain);
        em.kv("config.domain.kind", "disk");
        em.kv("config.domain.center", fmt17(disk.center.x) + "," + fmt17(disk.center.y));
        em.kv("config.domain.radius", disk.radius);
    }
    em.kv("config.n", static_cast<double>(cfg.n));
    em.kv("config.oracle.name", cfg.oracle_name);
    for (const auto& [k, vals] : cfg.oracle_params) {
        std::string joined;
        for (std::size_t i = 0; i < vals.size(); ++i)
            joined += (i ? "," : "") + fmt17(vals[i]);
        em.kv("config.oracle." + k, joined);
    }
    if (cfg.mode == RunMode::verify || cfg.mode == RunMode::ibp_check)
        em.kv("config.beta", cfg.beta);
    else {
        std::string joined;
        for (std::size_t i = 0; i < cfg.beta_values.size(); ++i)
            joined += (i ? "," : "") + fmt17(cfg.beta_values[i]);
        em.kv("config.beta_values", joined);
    }
    {
        std::string joined;
        for (std::size_t i = 0; i < cfg.t_values.size(); ++i)
            joined += (i ? "," : "") + fmt17(cfg.t_values[i]);
        em.kv("config.t_values", joined);
    }
    em.kv("mesh.resolution", cfg.n == 1 ? fmt17(res.m_r)
                                        : fmt17(res.m_r) + "," + fmt17(res.m_theta));
    em.kv("config.tol.identity_rel", cfg.tol.identity_rel);
    em.kv("config.tol.solver_residual", cfg.tol.solver_residual);
    em.kv("config.tol.sign_slack", cfg.tol.sign_slack);
    em.kv("config.tol.ibp_rel", cfg.tol.ibp_rel);
    em.kv("config.tol.limit_abs", cfg.tol.limit_abs);
    em.kv("kernels.backend", simd::backend_name(simd::active_backend()));
}

// Ratio check with a floor: tiny residuals on both grids count as converged.
bool refinement_ok(double coarse, double fine, double floor, double* ratio) {
    if (coarse <= floor && fine <= floor) {
        *ratio = std::numeric_limits<double>::infinity();
        return true;
    }
    *ratio = coarse / std::max(fine, 1e-300);
    return *ratio >= 3.0;
}

int run_verify(const RunConfig& cfg, Resolution res, Emitter& em, bool quiet) {
    FieldOracle oracle = cfg.make_field_oracle();
    Mesh coarse = build_mesh(cfg.domain, res);
    Mesh fine = build_mesh(cfg.domain, {2 * res.m_r, 2 * res.m_theta});
    SolverOptions sopts;
    sopts.rel_tol = cfg.tol.solver_residual;

    em.row({"t", "phi", "phi2_fd", "phi2_eq5", "phi2_eq3", "term1_hessian_x", "term2_hs_defect",
            "term3_square", "term4_boundary", "res_fd_eq5", "res_fd_eq3", "res_eq5_eq3", "spread",
            "spread_fine", "refine_ratio", "fd_sensitivity", "strong_residual", "bc_residual",
            "gauge", "cs_min_defect", "mu_weight_sum", "cg_iterations", "sign_certificate",
            "pass"});

    bool all_pass = true;
    for (double t : cfg.t_values) {
        IdentityReport rc = verify_identity(coarse, oracle, t, cfg.beta, cfg.h_t, sopts);
        IdentityReport rf = verify_identity(fine, oracle, t, cfg.beta, cfg.h_t, sopts);
        double ratio = 0.0;
        bool refined = refinement_ok(rc.spread, rf.spread, kSpreadFloor, &ratio);
        bool pass = rc.spread <= cfg.tol.identity_rel && refined;
        all_pass = all_pass && pass;
        if (!quiet)
            std::cout << "verify t=" << fmt17(t) << " spread=" << fmt17(rc.spread)
                      << " ratio=" << fmt17(ratio) << " " << flag(pass) << "\n";
        em.row({fmt17(t), fmt17(rc.phi), fmt17(rc.phi2_fd), fmt17(rc.phi2_eq5),
                fmt17(rc.phi2_eq3), fmt17(rc.terms.t1_hessian_x), fmt17(rc.terms.t2_hs_defect),
                fmt17(rc.terms.t3_square), fmt17(rc.terms.t4_boundary), fmt17(rc.res_fd_eq5),
                fmt17(rc.res_fd_eq3), fmt17(rc.res_eq5_eq3), fmt17(rc.spread), fmt17(rf.spread),
                fmt17(ratio), fmt17(rc.fd_sensitivity), fmt17(rc.solver.strong_residual),
                fmt17(rc.solver.bc_residual), fmt17(rc.solver.gauge), fmt17(rc.min_cs_defect),
                fmt17(rc.mu_weight_sum), fmt17(static_cast<double>(rc.solver.cg_iterations)),
                rc.sign_applicable ? flag(rc.sign_certificate) : "n/a", flag(pass)});
        em.kv("result.t=" + fmt17(t) + ".spread", rc.spread);
        em.kv("result.t=" + fmt17(t) + ".spread_fine", rf.spread);
        em.kv("result.t=" + fmt17(t) + ".refine_ratio", ratio);
        em.kv("result.t=" + fmt17(t) + ".pass", flag(pass));
    }
    em.kv("run.pass", flag(all_pass));
    return all_pass ? 0 : 2;
}

int run_ibp(const RunConfig& cfg, Resolution res, Emitter& em, bool quiet) {
    FieldOracle oracle = cfg.make_field_oracle();
    Mesh coarse = build_mesh(cfg.domain, res);
    Mesh fine = build_mesh(cfg.domain, {2 * res.m_r, 2 * res.m_theta});
    SolverOptions sopts;
    sopts.rel_tol = cfg.tol.solver_residual;

    auto residuals_at = [&](const Mesh& mesh, double t) {
        MeasureState state = build_measure(mesh, oracle, t, cfg.beta);
        std::vector<double> f(mesh.n_interior());
        for (std::size_t i = 0; i < f.size(); ++i) {
            Vec2 x = mesh.interior_nodes[i];
            f[i] = oracle.dt(t, x) / oracle.value(t, x);
        }
        double m = mean_under_mu(state, f);
        for (double& v : f) v -= m;
        WeakSystem system = assemble(mesh, state);
        NeumannSolution sol = solve_neumann(mesh, system, state, oracle, f, sopts);
        return check_ibp_identities(mesh, state, oracle, sol, f);
    };

    em.row({"t", "int_lu_sq", "dem", "ibp", "second_form", "second_form_pointwise",
            "int_lu_sq_fine", "dem_fine", "ibp_fine", "second_form_fine", "ratio_int_lu_sq",
            "ratio_dem", "ratio_ibp", "ratio_second_form", "pass"});

    bool all_pass = true;
    for (double t : cfg.t_values) {
        IbpResiduals rc = residuals_at(coarse, t);
        IbpResiduals rf = residuals_at(fine, t);
        double ratios[4] = {0.0, 0.0, 0.0, 0.0};
        bool ok = true;
        const double cvals[4] = {rc.int_lu_sq, rc.dem, rc.ibp, rc.second_form};
        const double fvals[4] = {rf.int_lu_sq, rf.dem, rf.ibp, rf.second_form};
        for (int k = 0; k < 4; ++k) {
            ok = ok && cvals[k] <= cfg.tol.ibp_rel;
            ok = ok && refinement_ok(cvals[k], fvals[k], kIbpFloor, &ratios[k]);
        }
        all_pass = all_pass && ok;
        if (!quiet)
            std::cout << "ibp t=" << fmt17(t) << " residuals=" << fmt17(rc.int_lu_sq) << ","
                      << fmt17(rc.dem) << "," << fmt17(rc.ibp) << "," << fmt17(rc.second_form)
                      << " " << flag(ok) << "\n";
        em.row({fmt17(t), fmt17(rc.int_lu_sq), fmt17(rc.dem), fmt17(rc.ibp),
                fmt17(rc.second_form), fmt17(rc.second_form_pointwise), fmt17(rf.int_lu_sq),
                fmt17(rf.dem), fmt17(rf.ibp), fmt17(rf.second_form), fmt17(ratios[0]),
                fmt17(ratios[1]), fmt17(ratios[2]), fmt17(ratios[3]), flag(ok)});
        em.kv("result.t=" + fmt17(t) + ".pass", flag(ok));
    }
    em.kv("run.pass", flag(all_pass));
    return all_pass ? 0 : 2;
}

int run_certify(const RunConfig& cfg, Resolution res, Emitter& em, bool quiet) {
    FieldOracle oracle = cfg.make_field_oracle();
    Mesh mesh = build_mesh(cfg.domain, res);
    TheoremCase which =
        cfg.mode == RunMode::certify_i ? TheoremCase::convex_i : TheoremCase::concave_ii;
    Certificate cert = certify_theorem2(which, mesh, oracle, cfg.t_values, cfg.beta_values,
                                        cfg.tol.sign_slack, cfg.h_t);

    em.row({"beta", "t", "phi", "term1_hessian_x", "term2_hs_defect", "term3_square",
            "term4_boundary", "phi2", "phi2_fd", "sign_certificate", "phi2_certificate"});
    for (const CertificateRow& row : cert.rows) {
        em.row({fmt17(row.beta), fmt17(row.t), fmt17(row.phi), fmt17(row.terms.t1_hessian_x),
                fmt17(row.terms.t2_hs_defect), fmt17(row.terms.t3_square),
                fmt17(row.terms.t4_boundary), fmt17(row.phi2), fmt17(row.phi2_fd),
                flag(row.terms_ok), flag(row.phi2_ok)});
        if (!quiet && !(row.terms_ok && row.phi2_ok))
            std::cout << "certify beta=" << fmt17(row.beta) << " t=" << fmt17(row.t)
                      << " fail\n";
    }
    em.kv("run.rows", static_cast<double>(cert.rows.size()));
    em.kv("run.pass", flag(cert.pass));
    if (!quiet) std::cout << "certify " << flag(cert.pass) << "\n";
    return cert.pass ? 0 : 2;
}

int run_limit(const RunConfig& cfg, Resolution res, Emitter& em, bool quiet) {
    FieldOracle oracle = cfg.make_field_oracle();
    Mesh mesh = build_mesh(cfg.domain, res);
    LimitSweep sweep = beta_limit_sweep(mesh, oracle, cfg.t_values.front(), cfg.beta_values);

    em.row({"beta", "value_convex", "value_concave", "err_convex", "err_concave", "gap_convex",
            "gap_concave"});
    for (const LimitRow& r : sweep.rows)
        em.row({fmt17(r.beta), fmt17(r.value_convex), fmt17(r.value_concave),
                fmt17(r.err_convex), fmt17(r.err_concave), fmt17(r.gap_convex),
                fmt17(r.gap_concave)});

    const LimitRow& last = sweep.rows.back();
    bool err_ok = last.err_convex <= cfg.tol.limit_abs && last.err_concave <= cfg.tol.limit_abs;
    bool slope_ok = std::abs(sweep.gap_slope_convex + 1.0) <= 0.2 &&
                    std::abs(sweep.gap_slope_concave + 1.0) <= 0.2;
    bool pass = err_ok && slope_ok;

    em.kv("result.target_convex", sweep.target_convex);
    em.kv("result.target_concave", sweep.target_concave);
    em.kv("result.err_slope_convex", sweep.err_slope_convex);
    em.kv("result.err_slope_concave", sweep.err_slope_concave);
    em.kv("result.gap_slope_convex", sweep.gap_slope_convex);
    em.kv("result.gap_slope_concave", sweep.gap_slope_concave);
    em.kv("result.err_at_max_beta", std::max(last.err_convex, last.err_concave));
    em.kv("run.pass", flag(pass));
    if (!quiet)
        std::cout << "limit err@betamax=" << fmt17(std::max(last.err_convex, last.err_concave))
                  << " gap_slopes=" << fmt17(sweep.gap_slope_convex) << ","
                  << fmt17(sweep.gap_slope_concave) << " " << flag(pass) << "\n";
    return pass ? 0 : 2;
}

}  // namespace

int run(const RunConfig& cfg, const RunOptions& opts) {
    Resolution res = cfg.resolution;
    if (opts.res_override.m_r > 0) res = opts.res_override;
    const std::string out_dir = opts.out_dir.empty() ? cfg.out_dir : opts.out_dir;

    Emitter em;
    echo_config(em, cfg, res);

    const bool needs_reconstruction = cfg.mode != RunMode::beta_limit;
    const bool under_resolved =
        needs_reconstruction && (res.m_r < 8 || (cfg.n == 2 && res.m_theta < 8));
    int code = 0;
    if (under_resolved) {
        em.kv("run.error", "refinement check cannot pass: resolution below the stencil minimum");
        em.kv("run.pass", "fail");
        if (!opts.quiet)
            std::cout << "verification failed: resolution below the reconstruction minimum\n";
        code = 2;
    } else {
        try {
            switch (cfg.mode) {
                case RunMode::verify: code = run_verify(cfg, res, em, opts.quiet); break;
                case RunMode::ibp_check: code = run_ibp(cfg, res, em, opts.quiet); break;
                case RunMode::certify_i:
                case RunMode::certify_ii: code = run_certify(cfg, res, em, opts.quiet); break;
                case RunMode::beta_limit: code = run_limit(cfg, res, em, opts.quiet); break;
            }
        } catch (const UnderResolvedError& e) {
            em.kv("run.error", e.what());
            em.kv("run.pass", "fail");
            code = 2;
        }
    }
    em.write(out_dir);
    return code;
}

}  // namespace prekopa
