#pragma once
// Spatial domains (interval, disk), quadrature meshes, and boundary geometry
// (outer normal, second fundamental form).

#include <variant>
#include <vector>

#include "prekopa/types.hpp"

namespace prekopa {

struct Interval {
    double a, b;
};

// Center/radius; the boundary circle is smooth with second fundamental form
// |X|^2 / radius on tangent vectors.
struct Disk {
    Vec2 center;
    double radius;
};

using Domain = std::variant<Interval, Disk>;

int domain_dim(const Domain& d);
double domain_volume(const Domain& d);
double boundary_measure(const Domain& d);  // counting measure (=2) in 1D

struct Resolution {
    int m_r = 0;      // interval node count, or radial count for the disk
    int m_theta = 0;  // angular count (disk only, must be even)
};

// Interior nodes are half-offset (strictly inside the open domain), with
// order-4 endpoint-corrected midpoint weights; disk angular nodes are uniform
// with trapezoid weights (spectral for periodic integrands). Boundary nodes
// carry surface-measure weights (counting measure on interval endpoints).
struct Mesh {
    Domain domain;
    int n = 0;  // spatial dimension
    Resolution resolution;

    std::vector<Vec2> interior_nodes;
    std::vector<double> interior_weights;
    std::vector<Vec2> boundary_nodes;
    std::vector<double> boundary_weights;
    std::vector<Vec2> normals;

    // Structured coordinates backing the node lists.
    std::vector<double> radial;      // interval x-coordinates or disk radii
    std::vector<double> theta;       // disk angles (empty for interval)
    double h_r = 0.0, h_theta = 0.0;

    std::size_t n_interior() const { return interior_nodes.size(); }
    std::size_t n_boundary() const { return boundary_nodes.size(); }
    // Interior node index for structured (i_r, j_theta); interval ignores j.
    std::size_t node_index(int i_r, int j_theta) const;
};

Mesh build_mesh(const Domain& domain, Resolution res);

Vec2 outer_normal(const Domain& domain, Vec2 x);

// II_x(X,X) for X tangent to the boundary at x (|<X,nu>| checked against
// tol * max(1,|X|)). Interval boundaries have trivial tangent space: X must
// vanish and the value is 0.
double second_fundamental_form(const Domain& domain, Vec2 x, Vec2 X, double tol = 1e-8);

}  // namespace prekopa
