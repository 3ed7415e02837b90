#pragma once
// Test fields phi(t,x) with the closed-form derivatives the identity needs,
// plus finite-difference validation of those derivatives.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "prekopa/types.hpp"

namespace prekopa {

enum class Convexity { convex, concave, neither };

// Admissible (t,x) region: phi must stay positive inside it.
struct ValidityBox {
    double t_min = -10.0, t_max = 10.0;
    Vec2 x_min{-10.0, -10.0}, x_max{10.0, 10.0};

    bool contains(double t, Vec2 x, int n) const {
        if (t < t_min || t > t_max) return false;
        if (x.x < x_min.x || x.x > x_max.x) return false;
        if (n == 2 && (x.y < x_min.y || x.y > x_max.y)) return false;
        return true;
    }
};

struct FieldOracle {
    std::string name;
    int n = 1;
    Convexity convexity = Convexity::neither;
    ValidityBox box;

    std::function<double(double, Vec2)> value;
    std::function<double(double, Vec2)> dt;
    std::function<double(double, Vec2)> dtt;
    std::function<Vec2(double, Vec2)> grad_x;
    std::function<Sym2(double, Vec2)> hess_x;
    std::function<Vec2(double, Vec2)> grad_x_dt;

    void require_inside(double t, Vec2 x) const;
};

// Catalog constructors. Parameter conventions:
//   quadratic_convex:       c + (t-t0)^2 + |x-x0|^2
//   quadratic_concave:      c - (t-t0)^2 - |x-x0|^2   (box shrunk to phi > 0)
//   separable_exponential:  e^t * (b0 + <b1,x> + b2|x|^2), positive b required
//   anisotropic_convex:     c + (t + <v,x>)^2 + |x|^2
//   constant:               c
FieldOracle quadratic_convex(int n, double c = 1.0, double t0 = 0.0, Vec2 x0 = {});
FieldOracle quadratic_concave(int n, double c = 4.0, double t0 = 0.0, Vec2 x0 = {});
FieldOracle separable_exponential(int n, double b0 = 1.0, Vec2 b1 = {}, double b2 = 0.0);
FieldOracle anisotropic_convex(int n, double c = 1.0, Vec2 v = {1.0, 0.0});
FieldOracle constant_field(int n, double c = 1.0);

// Lookup by catalog name with a parameter map (scalar params plus the vector
// params x0, v, b1 given componentwise as e.g. "v" -> {1,0}).
FieldOracle make_oracle(const std::string& name, int n,
                        const std::map<std::string, std::vector<double>>& params);

// <Hess_{(t,x)} phi * X, X> with X = (X0, Xs); assembled from the declared
// second derivatives.
double hessian_quadratic_form(const FieldOracle& oracle, double t, Vec2 x, double X0, Vec2 Xs);

// Worst relative discrepancy between declared derivatives and central finite
// differences of phi over the sample points. Reports, never throws, unless a
// stencil leaves the validity box.
double validate_derivatives(const FieldOracle& oracle, const std::vector<double>& ts,
                            const std::vector<Vec2>& xs, double h);

}  // namespace prekopa
