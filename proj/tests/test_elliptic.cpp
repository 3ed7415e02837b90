#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "prekopa/elliptic.hpp"
#include "prekopa/errors.hpp"
#include "prekopa/simd/kernels.hpp"

using namespace prekopa;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> sample_interior(const Mesh& mesh, double (*f)(Vec2)) {
    std::vector<double> v(mesh.n_interior());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(mesh.interior_nodes[i]);
    return v;
}

std::vector<double> sample_boundary(const Mesh& mesh, double (*f)(Vec2)) {
    std::vector<double> v(mesh.n_boundary());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = f(mesh.boundary_nodes[j]);
    return v;
}

// Manufactured disk solution of lap u = r cos(theta), du/dr(1) = 0.
double disk_u_exact(Vec2 p) {
    double r = norm(p);
    double c = r > 0 ? p.x / r : 0.0;
    return (r * r * r / 8.0 - 3.0 * r / 8.0) * c;
}
double disk_f(Vec2 p) { return p.x; }

double l2_error_vs_exact(const Mesh& mesh, const MeasureState& st,
                         const std::vector<double>& u, double (*exact)(Vec2)) {
    std::vector<double> ue = sample_interior(mesh, exact);
    double mean = simd::dot(st.interior_mu_weights.data(), ue.data(), ue.size());
    double err2 = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        double d = u[i] - (ue[i] - mean);
        err2 += st.interior_mu_weights[i] * d * d;
    }
    return std::sqrt(err2);
}

}  // namespace

TEST_CASE("weak system invariants") {
    Mesh mesh = build_mesh(Disk{{0.0, 0.0}, 1.0}, {12, 24});
    FieldOracle oracle = anisotropic_convex(2, 1.0, {1.0, 0.0});
    MeasureState st = build_measure(mesh, oracle, 0.2, 5.0);
    WeakSystem sys = assemble(mesh, st);
    const std::size_t N = sys.n_interior + sys.n_boundary;

    // Entrywise symmetry.
    for (std::size_t r = 0; r < N; ++r)
        for (std::int32_t k = sys.A.row_ptr[r]; k < sys.A.row_ptr[r + 1]; ++k) {
            double v = sys.A.val[k];
            double vt = sys.A.entry(sys.A.col[k], r);
            CHECK(std::abs(v - vt) <= 1e-12 * std::max(1.0, std::abs(v)));
        }

    // Constants in the kernel: row sums vanish.
    std::vector<double> ones(N, 1.0), Aones(N);
    sys.A.multiply(ones.data(), Aones.data());
    CHECK(simd::max_abs(Aones.data(), N) <= 1e-10);

    // Nonnegative quadratic form.
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> u(N), Au(N);
    for (int trial = 0; trial < 100; ++trial) {
        for (double& x : u) x = dist(rng);
        sys.A.multiply(u.data(), Au.data());
        double q = simd::dot(u.data(), Au.data(), N);
        CHECK(q >= -1e-10);
    }
}

TEST_CASE("interval weak system is the weighted second-difference form") {
    Mesh mesh = build_mesh(Interval{0.0, 1.0}, {16, 0});
    FieldOracle one = constant_field(1, 1.0);
    MeasureState st = build_measure(mesh, one, 0.0, 2.0);
    WeakSystem sys = assemble(mesh, st);
    const std::size_t N = sys.n_interior + 2;
    std::vector<double> ones(N, 1.0), Aones(N);
    sys.A.multiply(ones.data(), Aones.data());
    CHECK(simd::max_abs(Aones.data(), N) <= 1e-12);
    // The quadratic form of a sampled linear function is int |u'|^2 dmu = 1.
    std::vector<double> lin(N);
    for (std::size_t i = 0; i < sys.n_interior; ++i) lin[i] = mesh.interior_nodes[i].x;
    lin[sys.n_interior] = 0.0;
    lin[sys.n_interior + 1] = 1.0;
    std::vector<double> Al(N);
    sys.A.multiply(lin.data(), Al.data());
    CHECK(simd::dot(lin.data(), Al.data(), N) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("zero right-hand side gives the zero solution exactly") {
    Mesh mesh = build_mesh(Interval{0.0, 1.0}, {32, 0});
    FieldOracle one = constant_field(1, 1.0);
    MeasureState st = build_measure(mesh, one, 0.0, 2.0);
    WeakSystem sys = assemble(mesh, st);
    std::vector<double> f(mesh.n_interior(), 0.0);
    NeumannSolution sol = solve_neumann(mesh, sys, st, one, f);
    CHECK(simd::max_abs(sol.u.data(), sol.u.size()) == 0.0);
    CHECK(simd::max_abs(sol.u_bnd.data(), sol.u_bnd.size()) == 0.0);
    for (const Vec2& g : sol.fields.grad) CHECK(norm(g) == 0.0);
}

TEST_CASE("1d manufactured Neumann solution converges") {
    FieldOracle one = constant_field(1, 1.0);
    auto solve_at = [&](int m) {
        Mesh mesh = build_mesh(Interval{0.0, 1.0}, {m, 0});
        MeasureState st = build_measure(mesh, one, 0.0, 2.0);
        WeakSystem sys = assemble(mesh, st);
        std::vector<double> f(mesh.n_interior());
        for (std::size_t i = 0; i < f.size(); ++i)
            f[i] = std::cos(kPi * mesh.interior_nodes[i].x);
        double mean = mean_under_mu(st, f);
        for (double& v : f) v -= mean;
        NeumannSolution sol = solve_neumann(mesh, sys, st, one, f);
        auto exact = [](Vec2 p) { return -std::cos(kPi * p.x) / (kPi * kPi); };
        return std::pair{l2_error_vs_exact(mesh, st, sol.u, exact), sol.diag};
    };
    auto [e32, d32] = solve_at(32);
    auto [e64, d64] = solve_at(64);
    CHECK(e64 <= 5e-5);
    CHECK(e32 / e64 >= 3.0);
    CHECK(d64.bc_residual <= 1e-10);  // boundary values satisfy the stencil exactly
    CHECK(d64.cg_rel_residual <= 1e-10);
    CHECK(d64.gauge <= 1e-12);
}

TEST_CASE("disk manufactured Neumann solution converges") {
    FieldOracle one = constant_field(2, 1.0);
    auto solve_at = [&](Resolution res) {
        Mesh mesh = build_mesh(Disk{{0.0, 0.0}, 1.0}, res);
        MeasureState st = build_measure(mesh, one, 0.0, 1.0);
        WeakSystem sys = assemble(mesh, st);
        std::vector<double> f = sample_interior(mesh, disk_f);
        double mean = mean_under_mu(st, f);
        for (double& v : f) v -= mean;
        NeumannSolution sol = solve_neumann(mesh, sys, st, one, f);
        return std::tuple{l2_error_vs_exact(mesh, st, sol.u, disk_u_exact), sol.diag, mesh, sol};
    };
    auto [e1, d1, mesh1, sol1] = solve_at({16, 32});
    auto [e2, d2, mesh2, sol2] = solve_at({32, 64});
    CHECK(e2 <= 1e-4);
    CHECK(e1 / e2 >= 3.0);
    CHECK(d2.bc_residual <= 1e-3);
    CHECK(d2.gauge <= 1e-12);

    // The strong residual converges in max norm (order 1 at the pole ring).
    CHECK(d1.strong_residual / d2.strong_residual >= 1.8);
}

TEST_CASE("derivative reconstruction reproduces polynomials") {
    Mesh mesh = build_mesh(Disk{{0.0, 0.0}, 1.0}, {32, 64});
    auto ui = sample_interior(mesh, [](Vec2 p) { return p.x; });
    auto ub = sample_boundary(mesh, [](Vec2 p) { return p.x; });
    DerivativeFields f = reconstruct_derivatives(mesh, ui, ub);
    for (std::size_t i = 0; i < mesh.n_interior(); ++i) {
        CHECK(std::abs(f.grad[i].x - 1.0) <= 1e-10);
        CHECK(std::abs(f.grad[i].y) <= 1e-10);
        CHECK(std::abs(f.hess[i].xx) <= 1e-8);
        CHECK(std::abs(f.hess[i].xy) <= 1e-8);
        CHECK(std::abs(f.hess[i].yy) <= 1e-8);
    }
    auto qi = sample_interior(mesh, [](Vec2 p) { return 0.5 * dot(p, p); });
    auto qb = sample_boundary(mesh, [](Vec2 p) { return 0.5 * dot(p, p); });
    DerivativeFields g = reconstruct_derivatives(mesh, qi, qb);
    for (std::size_t i = 0; i < mesh.n_interior(); ++i) {
        CHECK(std::abs(g.hess[i].xx - 1.0) <= 1e-8);
        CHECK(std::abs(g.hess[i].yy - 1.0) <= 1e-8);
        CHECK(std::abs(g.hess[i].xy) <= 1e-8);
        CHECK(std::abs(g.lap[i] - 2.0) <= 1e-8);
        CHECK(g.lap[i] == g.hess[i].trace());
    }
}

TEST_CASE("reconstructed Hessian matches the symbolic one for the disk solution") {
    auto hess_err_at = [](Resolution res) {
        Mesh mesh = build_mesh(Disk{{0.0, 0.0}, 1.0}, res);
        auto ui = sample_interior(mesh, disk_u_exact);
        auto ub = sample_boundary(mesh, disk_u_exact);
        DerivativeFields f = reconstruct_derivatives(mesh, ui, ub);
        double worst = 0.0;
        for (std::size_t i = 0; i < mesh.n_interior(); ++i) {
            Vec2 p = mesh.interior_nodes[i];
            double r = norm(p), th = std::atan2(p.y, p.x);
            double c = std::cos(th), s = std::sin(th);
            double g = r * r * r / 8.0 - 3.0 * r / 8.0;
            double gp = 3.0 * r * r / 8.0 - 3.0 / 8.0;
            double gpp = 6.0 * r / 8.0;
            double urr = gpp * c, ur = gp * c, ut = -g * s, utt = -g * c, urt = -gp * s;
            Sym2 H;
            H.xx = c * c * urr - 2 * c * s * urt / r + s * s * utt / (r * r) + s * s * ur / r +
                   2 * c * s * ut / (r * r);
            H.yy = s * s * urr + 2 * c * s * urt / r + c * c * utt / (r * r) + c * c * ur / r -
                   2 * c * s * ut / (r * r);
            H.xy = c * s * urr + (c * c - s * s) * urt / r - c * s * utt / (r * r) -
                   c * s * ur / r - (c * c - s * s) * ut / (r * r);
            worst = std::max({worst, std::abs(f.hess[i].xx - H.xx),
                              std::abs(f.hess[i].xy - H.xy), std::abs(f.hess[i].yy - H.yy)});
        }
        return worst;
    };
    // The solution is a cubic polynomial: stencils reproduce it to rounding.
    CHECK(hess_err_at({16, 32}) <= 1e-9);
    CHECK(hess_err_at({32, 64}) <= 1e-9);
}

TEST_CASE("Hessian reconstruction converges on a transcendental field") {
    auto hess_err_at = [](Resolution res) {
        Mesh mesh = build_mesh(Disk{{0.0, 0.0}, 1.0}, res);
        auto fn = [](Vec2 p) { return std::sin(1.1 * p.x + 0.3) * std::cos(0.7 * p.y); };
        std::vector<double> ui(mesh.n_interior()), ub(mesh.n_boundary());
        for (std::size_t i = 0; i < ui.size(); ++i) ui[i] = fn(mesh.interior_nodes[i]);
        for (std::size_t j = 0; j < ub.size(); ++j) ub[j] = fn(mesh.boundary_nodes[j]);
        DerivativeFields f = reconstruct_derivatives(mesh, ui, ub);
        double worst = 0.0;
        for (std::size_t i = 0; i < mesh.n_interior(); ++i) {
            Vec2 p = mesh.interior_nodes[i];
            double sx = std::sin(1.1 * p.x + 0.3), cx = std::cos(1.1 * p.x + 0.3);
            double sy = std::sin(0.7 * p.y), cy = std::cos(0.7 * p.y);
            Sym2 H{-1.21 * sx * cy, -0.77 * cx * sy, -0.49 * sx * cy};
            worst = std::max({worst, std::abs(f.hess[i].xx - H.xx),
                              std::abs(f.hess[i].xy - H.xy), std::abs(f.hess[i].yy - H.yy)});
        }
        return worst;
    };
    double e1 = hess_err_at({16, 32});
    double e2 = hess_err_at({32, 64});
    CHECK(e2 <= 1e-4);
    CHECK(e1 / e2 >= 3.0);
}

TEST_CASE("reconstruction requires at least 8 nodes per direction") {
    Mesh mesh = build_mesh(Interval{0.0, 1.0}, {6, 0});
    std::vector<double> ui(mesh.n_interior(), 0.0), ub(2, 0.0);
    CHECK_THROWS_AS(reconstruct_derivatives(mesh, ui, ub), UnderResolvedError);
}

TEST_CASE("weak-strong integration by parts closes under refinement") {
    FieldOracle oracle = anisotropic_convex(2, 1.0, {1.0, 0.0});
    auto residual_at = [&](Resolution res) {
        Mesh mesh = build_mesh(Disk{{0.0, 0.0}, 1.0}, res);
        MeasureState st = build_measure(mesh, oracle, 0.1, 5.0);
        WeakSystem sys = assemble(mesh, st);
        auto uf = [](Vec2 p) { return std::sin(1.3 * p.x + 0.4) * std::cos(0.9 * p.y); };
        auto vf = [](Vec2 p) { return std::exp(0.5 * p.x - 0.2 * p.y); };
        auto ui = sample_interior(mesh, uf);
        auto ub = sample_boundary(mesh, uf);
        auto vi = sample_interior(mesh, vf);
        auto vb = sample_boundary(mesh, vf);
        DerivativeFields fu = reconstruct_derivatives(mesh, ui, ub);
        std::vector<double> lu = apply_strong_operator(mesh, oracle, 0.1, 5.0, fu);

        double lhs = 0.0;
        for (std::size_t i = 0; i < mesh.n_interior(); ++i)
            lhs += st.interior_mu_weights[i] * lu[i] * vi[i];
        const std::size_t N = sys.n_interior + sys.n_boundary;
        std::vector<double> uall(N), vall(N), Au(N);
        for (std::size_t i = 0; i < sys.n_interior; ++i) {
            uall[i] = ui[i];
            vall[i] = vi[i];
        }
        for (std::size_t j = 0; j < sys.n_boundary; ++j) {
            uall[sys.n_interior + j] = ub[j];
            vall[sys.n_interior + j] = vb[j];
        }
        sys.A.multiply(uall.data(), Au.data());
        double dirichlet = simd::dot(vall.data(), Au.data(), N);
        double bnd = 0.0;
        for (std::size_t j = 0; j < mesh.n_boundary(); ++j)
            bnd += st.boundary_mu_weights[j] * vb[j] * dot(fu.grad_bnd[j], mesh.normals[j]);
        return std::abs(lhs + dirichlet - bnd);
    };
    double r1 = residual_at({32, 64});
    double r2 = residual_at({64, 128});
    CHECK(r1 / r2 >= 3.0);
    CHECK(r2 <= 1e-3);
}

TEST_CASE("the operator is self-adjoint on Neumann-compatible fields") {
    FieldOracle oracle = anisotropic_convex(2, 1.0, {1.0, 0.0});
    // Smooth-at-the-pole Neumann fields: mode-k parts carry r^k profiles with
    // zero slope at r = 1, and the angular content is mixed enough that no
    // parity cancellation hides quadrature error.
    auto uf = [](Vec2 p) {
        double r2 = dot(p, p);
        return std::cos(M_PI * r2) + (r2 - 3.0) / 8.0 * (p.x + 0.6 * p.y);
    };
    auto vf = [](Vec2 p) {
        double r2 = dot(p, p);
        return 0.5 * std::cos(M_PI * r2) + 0.3 * (r2 - 2.0) * (p.x * p.x - p.y * p.y) +
               0.2 * (r2 - 3.0) / 8.0 * p.x;
    };
    auto residual_at = [&](Resolution res) {
        Mesh mesh = build_mesh(Disk{{0.0, 0.0}, 1.0}, res);
        MeasureState st = build_measure(mesh, oracle, 0.0, 5.0);
        std::vector<double> ui(mesh.n_interior()), vi(mesh.n_interior());
        std::vector<double> ub(mesh.n_boundary()), vb(mesh.n_boundary());
        for (std::size_t i = 0; i < ui.size(); ++i) {
            ui[i] = uf(mesh.interior_nodes[i]);
            vi[i] = vf(mesh.interior_nodes[i]);
        }
        for (std::size_t j = 0; j < ub.size(); ++j) {
            ub[j] = uf(mesh.boundary_nodes[j]);
            vb[j] = vf(mesh.boundary_nodes[j]);
        }
        DerivativeFields fu = reconstruct_derivatives(mesh, ui, ub);
        DerivativeFields fv = reconstruct_derivatives(mesh, vi, vb);
        auto lu = apply_strong_operator(mesh, oracle, 0.0, 5.0, fu);
        auto lv = apply_strong_operator(mesh, oracle, 0.0, 5.0, fv);
        double a = 0.0, b = 0.0;
        for (std::size_t i = 0; i < mesh.n_interior(); ++i) {
            a += st.interior_mu_weights[i] * lu[i] * vi[i];
            b += st.interior_mu_weights[i] * lv[i] * ui[i];
        }
        return std::abs(a - b);
    };
    double r1 = residual_at({32, 64});
    double r2 = residual_at({64, 128});
    CHECK(r2 <= 1e-4);
    CHECK(r1 / r2 >= 3.0);
}

TEST_CASE("strong operator basics") {
    Mesh mesh = build_mesh(Disk{{0.0, 0.0}, 1.0}, {16, 32});
    FieldOracle one = constant_field(2, 1.0);
    auto ci = sample_interior(mesh, [](Vec2) { return 3.14; });
    auto cb = sample_boundary(mesh, [](Vec2) { return 3.14; });
    DerivativeFields f = reconstruct_derivatives(mesh, ci, cb);
    auto lu = apply_strong_operator(mesh, one, 0.0, 7.0, f);
    CHECK(simd::max_abs(lu.data(), lu.size()) <= 1e-9);

    // Drift vanishes for constant phi: L reduces to the Laplacian.
    auto qi = sample_interior(mesh, [](Vec2 p) { return 0.5 * dot(p, p); });
    auto qb = sample_boundary(mesh, [](Vec2 p) { return 0.5 * dot(p, p); });
    DerivativeFields g = reconstruct_derivatives(mesh, qi, qb);
    auto lq = apply_strong_operator(mesh, one, 0.0, 7.0, g);
    for (std::size_t i = 0; i < lq.size(); ++i) CHECK(lq[i] == doctest::Approx(2.0).epsilon(1e-7));
}
