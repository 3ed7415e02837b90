#include "prekopa/fields.hpp"

#include <cmath>
#include <stdexcept>

namespace prekopa {

void FieldOracle::require_inside(double t, Vec2 x) const {
    if (!box.contains(t, x, n))
        throw std::invalid_argument("oracle '" + name + "': point outside validity box");
}

FieldOracle quadratic_convex(int n, double c, double t0, Vec2 x0) {
    if (!(c > 0.0)) throw std::invalid_argument("quadratic_convex: c must be positive");
    FieldOracle o;
    o.name = "quadratic_convex";
    o.n = n;
    o.convexity = Convexity::convex;
    o.value = [=](double t, Vec2 x) {
        Vec2 d = x - x0;
        return c + (t - t0) * (t - t0) + dot(d, d);
    };
    o.dt = [=](double t, Vec2) { return 2.0 * (t - t0); };
    o.dtt = [](double, Vec2) { return 2.0; };
    o.grad_x = [=](double, Vec2 x) { return 2.0 * (x - x0); };
    o.hess_x = [n](double, Vec2) { return Sym2{2.0, 0.0, n == 2 ? 2.0 : 0.0}; };
    o.grad_x_dt = [](double, Vec2) { return Vec2::zero(); };
    return o;
}

FieldOracle quadratic_concave(int n, double c, double t0, Vec2 x0) {
    if (!(c > 0.0)) throw std::invalid_argument("quadratic_concave: c must be positive");
    FieldOracle o;
    o.name = "quadratic_concave";
    o.n = n;
    o.convexity = Convexity::concave;
    // phi > 0 needs (t-t0)^2 + |x-x0|^2 < c; use the inscribed box with a
    // safety factor.
    double half = 0.45 * std::sqrt(c / (n + 1.0)) * 2.0;
    o.box.t_min = t0 - half;
    o.box.t_max = t0 + half;
    o.box.x_min = x0 - Vec2{half, half};
    o.box.x_max = x0 + Vec2{half, half};
    o.value = [=](double t, Vec2 x) {
        Vec2 d = x - x0;
        return c - (t - t0) * (t - t0) - dot(d, d);
    };
    o.dt = [=](double t, Vec2) { return -2.0 * (t - t0); };
    o.dtt = [](double, Vec2) { return -2.0; };
    o.grad_x = [=](double, Vec2 x) { return -2.0 * (x - x0); };
    o.hess_x = [n](double, Vec2) { return Sym2{-2.0, 0.0, n == 2 ? -2.0 : 0.0}; };
    o.grad_x_dt = [](double, Vec2) { return Vec2::zero(); };
    return o;
}

FieldOracle separable_exponential(int n, double b0, Vec2 b1, double b2) {
    FieldOracle o;
    o.name = "separable_exponential";
    o.n = n;
    o.convexity = Convexity::neither;
    auto b = [=](Vec2 x) { return b0 + dot(b1, x) + b2 * dot(x, x); };
    auto db = [=](Vec2 x) { return b1 + (2.0 * b2) * x; };
    o.value = [=](double t, Vec2 x) { return std::exp(t) * b(x); };
    o.dt = o.value;
    o.dtt = o.value;
    o.grad_x = [=](double t, Vec2 x) { return std::exp(t) * db(x); };
    o.hess_x = [=](double t, Vec2 x) {
        (void)x;
        double e = std::exp(t);
        return Sym2{2.0 * b2 * e, 0.0, n == 2 ? 2.0 * b2 * e : 0.0};
    };
    o.grad_x_dt = o.grad_x;
    return o;
}

FieldOracle anisotropic_convex(int n, double c, Vec2 v) {
    if (!(c > 0.0)) throw std::invalid_argument("anisotropic_convex: c must be positive");
    FieldOracle o;
    o.name = "anisotropic_convex";
    o.n = n;
    o.convexity = Convexity::convex;
    o.value = [=](double t, Vec2 x) {
        double s = t + dot(v, x);
        return c + s * s + dot(x, x);
    };
    o.dt = [=](double t, Vec2 x) { return 2.0 * (t + dot(v, x)); };
    o.dtt = [](double, Vec2) { return 2.0; };
    o.grad_x = [=](double t, Vec2 x) { return 2.0 * (t + dot(v, x)) * v + 2.0 * x; };
    o.hess_x = [=](double, Vec2) {
        return Sym2{2.0 * v.x * v.x + 2.0, 2.0 * v.x * v.y, n == 2 ? 2.0 * v.y * v.y + 2.0 : 0.0};
    };
    o.grad_x_dt = [=](double, Vec2) { return 2.0 * v; };
    return o;
}

FieldOracle constant_field(int n, double c) {
    if (!(c > 0.0)) throw std::invalid_argument("constant_field: c must be positive");
    FieldOracle o;
    o.name = "constant";
    o.n = n;
    o.convexity = Convexity::neither;
    o.value = [=](double, Vec2) { return c; };
    o.dt = [](double, Vec2) { return 0.0; };
    o.dtt = [](double, Vec2) { return 0.0; };
    o.grad_x = [](double, Vec2) { return Vec2::zero(); };
    o.hess_x = [](double, Vec2) { return Sym2{}; };
    o.grad_x_dt = [](double, Vec2) { return Vec2::zero(); };
    return o;
}

namespace {

double scalar_param(const std::map<std::string, std::vector<double>>& params,
                    const std::string& key, double fallback) {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    if (it->second.size() != 1)
        throw std::invalid_argument("oracle parameter '" + key + "' must be a scalar");
    return it->second[0];
}

Vec2 vector_param(const std::map<std::string, std::vector<double>>& params,
                  const std::string& key, int n, Vec2 fallback) {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    if (static_cast<int>(it->second.size()) != n)
        throw std::invalid_argument("oracle parameter '" + key + "' must have " +
                                    std::to_string(n) + " components");
    Vec2 v{it->second[0], 0.0};
    if (n == 2) v.y = it->second[1];
    return v;
}

}  // namespace

FieldOracle make_oracle(const std::string& name, int n,
                        const std::map<std::string, std::vector<double>>& params) {
    for (const auto& [key, _] : params) {
        if (key != "c" && key != "t0" && key != "x0" && key != "v" && key != "b0" &&
            key != "b1" && key != "b2")
            throw std::invalid_argument("unknown oracle parameter '" + key + "'");
    }
    if (name == "quadratic_convex")
        return quadratic_convex(n, scalar_param(params, "c", 1.0), scalar_param(params, "t0", 0.0),
                                vector_param(params, "x0", n, {}));
    if (name == "quadratic_concave")
        return quadratic_concave(n, scalar_param(params, "c", 4.0),
                                 scalar_param(params, "t0", 0.0), vector_param(params, "x0", n, {}));
    if (name == "separable_exponential")
        return separable_exponential(n, scalar_param(params, "b0", 1.0),
                                     vector_param(params, "b1", n, {}),
                                     scalar_param(params, "b2", 0.0));
    if (name == "anisotropic_convex")
        return anisotropic_convex(n, scalar_param(params, "c", 1.0),
                                  vector_param(params, "v", n, {1.0, 0.0}));
    if (name == "constant") return constant_field(n, scalar_param(params, "c", 1.0));
    throw std::invalid_argument("unknown oracle '" + name + "'");
}

double hessian_quadratic_form(const FieldOracle& oracle, double t, Vec2 x, double X0, Vec2 Xs) {
    oracle.require_inside(t, x);
    double q = X0 * X0 * oracle.dtt(t, x);
    q += 2.0 * X0 * dot(oracle.grad_x_dt(t, x), Xs);
    q += oracle.hess_x(t, x).quad(Xs);
    return q;
}

double validate_derivatives(const FieldOracle& oracle, const std::vector<double>& ts,
                            const std::vector<Vec2>& xs, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("validate_derivatives: h must be positive");
    double worst = 0.0;
    auto record = [&](double fd, double decl) {
        double denom = std::max(1.0, std::abs(decl));
        worst = std::max(worst, std::abs(fd - decl) / denom);
    };
    const Vec2 ex{1.0, 0.0}, ey{0.0, 1.0};
    for (double t : ts) {
        for (Vec2 x : xs) {
            for (double s : {-2.0 * h, 2.0 * h}) {
                oracle.require_inside(t + s, x);
                oracle.require_inside(t, x + s * ex);
                if (oracle.n == 2) oracle.require_inside(t, x + s * ey);
            }
            auto f = [&](double tt, Vec2 xx) { return oracle.value(tt, xx); };
            record((f(t + h, x) - f(t - h, x)) / (2 * h), oracle.dt(t, x));
            record((f(t + h, x) - 2 * f(t, x) + f(t - h, x)) / (h * h), oracle.dtt(t, x));

            Vec2 g = oracle.grad_x(t, x);
            record((f(t, x + h * ex) - f(t, x - h * ex)) / (2 * h), g.x);
            if (oracle.n == 2) record((f(t, x + h * ey) - f(t, x - h * ey)) / (2 * h), g.y);

            Sym2 H = oracle.hess_x(t, x);
            record((f(t, x + h * ex) - 2 * f(t, x) + f(t, x - h * ex)) / (h * h), H.xx);
            if (oracle.n == 2) {
                record((f(t, x + h * ey) - 2 * f(t, x) + f(t, x - h * ey)) / (h * h), H.yy);
                double fd_xy = (f(t, x + h * ex + h * ey) - f(t, x + h * ex - h * ey) -
                                f(t, x - h * ex + h * ey) + f(t, x - h * ex - h * ey)) /
                               (4 * h * h);
                record(fd_xy, H.xy);
            }

            Vec2 gdt = oracle.grad_x_dt(t, x);
            double fd_tx = (f(t + h, x + h * ex) - f(t + h, x - h * ex) - f(t - h, x + h * ex) +
                            f(t - h, x - h * ex)) /
                           (4 * h * h);
            record(fd_tx, gdt.x);
            if (oracle.n == 2) {
                double fd_ty = (f(t + h, x + h * ey) - f(t + h, x - h * ey) -
                                f(t - h, x + h * ey) + f(t - h, x - h * ey)) /
                               (4 * h * h);
                record(fd_ty, gdt.y);
            }
        }
    }
    return worst;
}

}  // namespace prekopa
