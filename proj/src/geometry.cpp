#include "prekopa/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "prekopa/stencils.hpp"

namespace prekopa {

namespace {
constexpr double kPi = std::numbers::pi;
}

int domain_dim(const Domain& d) { return std::holds_alternative<Interval>(d) ? 1 : 2; }

double domain_volume(const Domain& d) {
    if (const auto* iv = std::get_if<Interval>(&d)) return iv->b - iv->a;
    const auto& disk = std::get<Disk>(d);
    return kPi * disk.radius * disk.radius;
}

double boundary_measure(const Domain& d) {
    if (std::holds_alternative<Interval>(d)) return 2.0;
    return 2.0 * kPi * std::get<Disk>(d).radius;
}

std::size_t Mesh::node_index(int i_r, int j_theta) const {
    if (n == 1) return static_cast<std::size_t>(i_r);
    return static_cast<std::size_t>(i_r) * theta.size() + static_cast<std::size_t>(j_theta);
}

Mesh build_mesh(const Domain& domain, Resolution res) {
    Mesh mesh;
    mesh.domain = domain;
    mesh.n = domain_dim(domain);
    mesh.resolution = res;

    if (const auto* iv = std::get_if<Interval>(&domain)) {
        if (!(iv->a < iv->b)) throw std::invalid_argument("build_mesh: interval needs a < b");
        if (res.m_r < 4) throw std::invalid_argument("build_mesh: resolution must be >= 4");
        const int m = res.m_r;
        mesh.h_r = (iv->b - iv->a) / m;
        mesh.interior_weights = midpoint_corrected_weights(iv->a, iv->b, m);
        mesh.radial.resize(m);
        for (int i = 0; i < m; ++i) {
            mesh.radial[i] = iv->a + (i + 0.5) * mesh.h_r;
            mesh.interior_nodes.push_back({mesh.radial[i], 0.0});
        }
        mesh.boundary_nodes = {{iv->a, 0.0}, {iv->b, 0.0}};
        mesh.boundary_weights = {1.0, 1.0};
        mesh.normals = {{-1.0, 0.0}, {1.0, 0.0}};
        return mesh;
    }

    const auto& disk = std::get<Disk>(domain);
    if (!(disk.radius > 0.0)) throw std::invalid_argument("build_mesh: disk needs radius > 0");
    if (res.m_r < 4 || res.m_theta < 4)
        throw std::invalid_argument("build_mesh: resolution must be >= 4");
    if (res.m_theta % 2 != 0)
        throw std::invalid_argument("build_mesh: angular resolution must be even");

    const int mr = res.m_r, mt = res.m_theta;
    mesh.h_r = disk.radius / mr;
    mesh.h_theta = 2.0 * kPi / mt;
    std::vector<double> wr = midpoint_corrected_weights(0.0, disk.radius, mr);

    mesh.radial.resize(mr);
    mesh.theta.resize(mt);
    for (int i = 0; i < mr; ++i) mesh.radial[i] = (i + 0.5) * mesh.h_r;
    for (int j = 0; j < mt; ++j) mesh.theta[j] = j * mesh.h_theta;

    mesh.interior_nodes.reserve(static_cast<std::size_t>(mr) * mt);
    mesh.interior_weights.reserve(static_cast<std::size_t>(mr) * mt);
    for (int i = 0; i < mr; ++i) {
        const double r = mesh.radial[i];
        const double w = wr[i] * r * mesh.h_theta;  // Jacobian r folded in
        for (int j = 0; j < mt; ++j) {
            mesh.interior_nodes.push_back({disk.center.x + r * std::cos(mesh.theta[j]),
                                           disk.center.y + r * std::sin(mesh.theta[j])});
            mesh.interior_weights.push_back(w);
        }
    }
    for (int j = 0; j < mt; ++j) {
        double c = std::cos(mesh.theta[j]), s = std::sin(mesh.theta[j]);
        mesh.boundary_nodes.push_back(
            {disk.center.x + disk.radius * c, disk.center.y + disk.radius * s});
        mesh.boundary_weights.push_back(disk.radius * mesh.h_theta);
        mesh.normals.push_back({c, s});
    }
    return mesh;
}

Vec2 outer_normal(const Domain& domain, Vec2 x) {
    if (const auto* iv = std::get_if<Interval>(&domain)) {
        const double tol = 1e-9 * (1.0 + std::abs(iv->a) + std::abs(iv->b));
        if (std::abs(x.x - iv->a) <= tol) return {-1.0, 0.0};
        if (std::abs(x.x - iv->b) <= tol) return {1.0, 0.0};
        throw std::invalid_argument("outer_normal: point not on interval boundary");
    }
    const auto& disk = std::get<Disk>(domain);
    Vec2 d = x - disk.center;
    double r = norm(d);
    if (std::abs(r - disk.radius) > 1e-9 * disk.radius)
        throw std::invalid_argument("outer_normal: point not on disk boundary");
    return (1.0 / disk.radius) * d;
}

double second_fundamental_form(const Domain& domain, Vec2 x, Vec2 X, double tol) {
    Vec2 nu = outer_normal(domain, x);
    if (std::holds_alternative<Interval>(domain)) {
        if (std::abs(X.x) > tol)
            throw std::invalid_argument(
                "second_fundamental_form: interval tangent space is trivial");
        return 0.0;
    }
    if (std::abs(dot(X, nu)) > tol * std::max(1.0, norm(X)))
        throw std::invalid_argument("second_fundamental_form: X not tangent to the boundary");
    return dot(X, X) / std::get<Disk>(domain).radius;
}

}  // namespace prekopa
