#pragma once

#include <array>
#include <cmath>

namespace prekopa {

// Spatial vector for n = 1 or 2; the second component is 0 when n = 1.
struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}
    static Vec2 zero() { return {0.0, 0.0}; }
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }

// Symmetric 2x2 matrix; for n = 1 only xx is meaningful.
struct Sym2 {
    double xx = 0.0, xy = 0.0, yy = 0.0;

    Vec2 apply(Vec2 v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
    double quad(Vec2 v) const { return dot(apply(v), v); }
    double trace() const { return xx + yy; }
    double frob2() const { return xx * xx + 2.0 * xy * xy + yy * yy; }
};

}  // namespace prekopa
