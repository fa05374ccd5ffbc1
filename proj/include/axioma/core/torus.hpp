#ifndef AXIOMA_CORE_TORUS_HPP
#define AXIOMA_CORE_TORUS_HPP

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>

#include "axioma/core/errors.hpp"

namespace axioma {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Reduce t into [0,1).
inline double wrap01(double t) {
    double r = t - std::floor(t);
    return r >= 1.0 ? 0.0 : r;
}

// Reduce t into [-1/2, 1/2).
inline double wrap_centered(double t) {
    double r = t - std::floor(t + 0.5);
    return r;
}

// sin(2 pi t) and cos(2 pi t) with exact values at multiples of 1/4.
// The argument is reduced to |r| <= 1/8 first, so rational fixed points
// such as 1/2 produce exact zeros.
inline void sincos2pi(double t, double& s, double& c) {
    double u = t - std::floor(t);
    double q = std::nearbyint(u * 4.0);
    double r = u - q * 0.25;
    int quadrant = static_cast<int>(q) & 3;
    double sr = std::sin(two_pi * r);
    double cr = std::cos(two_pi * r);
    switch (quadrant) {
        case 0: s = sr; c = cr; break;
        case 1: s = cr; c = -sr; break;
        case 2: s = -sr; c = -cr; break;
        default: s = -cr; c = sr; break;
    }
}

// A point on T^n, n in {1,2}. Unused coordinates are kept at zero.
struct TorusPoint {
    int n = 2;
    Vec2 c = Vec2::Zero();

    TorusPoint() = default;
    TorusPoint(int dim, const Vec2& coords) : n(dim), c(coords) { reduce(); }
    static TorusPoint on_circle(double x) { return TorusPoint(1, Vec2(x, 0.0)); }
    static TorusPoint on_torus(double x, double y) { return TorusPoint(2, Vec2(x, y)); }

    void reduce() {
        c[0] = wrap01(c[0]);
        c[1] = n == 2 ? wrap01(c[1]) : 0.0;
    }
    double operator[](int i) const { return c[i]; }
};

// Componentwise minimal-image displacement b - a.
inline Vec2 torus_delta(const Vec2& a, const Vec2& b, int n) {
    Vec2 d(wrap_centered(b[0] - a[0]), n == 2 ? wrap_centered(b[1] - a[1]) : 0.0);
    return d;
}

inline double torus_distance(const Vec2& a, const Vec2& b, int n) {
    return torus_delta(a, b, n).norm();
}

inline double torus_distance(const TorusPoint& a, const TorusPoint& b) {
    return torus_distance(a.c, b.c, a.n);
}

inline Vec2 wrap_point(const Vec2& x, int n) {
    return Vec2(wrap01(x[0]), n == 2 ? wrap01(x[1]) : 0.0);
}

// A covector; the pairing with vectors is the Euclidean dot product.
using Covector = Vec2;

struct CotangentPoint {
    TorusPoint base;
    Covector fiber = Covector::Zero();
};

// Quintic smoothstep: 0 for t <= 0, 1 for t >= 1, C^2 in between.
inline double smoothstep5(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}

inline double smoothstep5_derivative(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return 30.0 * t * t * (1.0 - t) * (1.0 - t);
}

// Antiderivative of smoothstep5 vanishing at t = 0 (linear beyond t = 1).
inline double smoothstep5_integral(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 0.5 + (t - 1.0);
    double t3 = t * t * t;
    return t3 * t * (2.5 - 3.0 * t + t * t);
}

// Fiber angle of a covector on S*T^2, normalised to [0,1).
inline double covector_angle(const Covector& xi) {
    return wrap01(std::atan2(xi[1], xi[0]) / two_pi);
}

inline Covector covector_from_angle(double theta) {
    double s, c;
    sincos2pi(theta, s, c);
    return Covector(c, s);
}

}  // namespace axioma

#endif
