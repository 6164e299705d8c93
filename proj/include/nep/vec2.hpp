#pragma once

#include <cmath>

namespace nep {

/// Plain 2-D vector, double precision. Value type used for points,
/// tangents and normals throughout.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double xx, double yy) : x(xx), y(yy) {}

    constexpr Vec2 operator+(const Vec2& r) const { return {x + r.x, y + r.y}; }
    constexpr Vec2 operator-(const Vec2& r) const { return {x - r.x, y - r.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    friend constexpr Vec2 operator*(double s, const Vec2& v) { return {v.x * s, v.y * s}; }
    Vec2& operator+=(const Vec2& r) { x += r.x; y += r.y; return *this; }
    Vec2& operator-=(const Vec2& r) { x -= r.x; y -= r.y; return *this; }

    constexpr double dot(const Vec2& r) const { return x * r.x + y * r.y; }
    constexpr double cross(const Vec2& r) const { return x * r.y - y * r.x; }
    constexpr double norm_sq() const { return x * x + y * y; }
    double norm() const { return std::sqrt(x * x + y * y); }

    /// Rotated by +90 degrees.
    constexpr Vec2 perp() const { return {-y, x}; }

    Vec2 normalized(double eps = 1e-300) const {
        const double n = norm();
        return n <= eps ? Vec2{0.0, 0.0} : Vec2{x / n, y / n};
    }
};

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

/// v' = v - 2 (v.n) n, n assumed unit length.
inline Vec2 reflect_across_unit_normal(const Vec2& v, const Vec2& n) {
    return v - (2.0 * v.dot(n)) * n;
}

}  // namespace nep
