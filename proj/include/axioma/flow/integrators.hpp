#ifndef AXIOMA_FLOW_INTEGRATORS_HPP
#define AXIOMA_FLOW_INTEGRATORS_HPP

// Fixed-step RK4 for the flow, its Jacobian, and the cotangent lift
// eta' = -DV(x)^T eta. Coordinates are unwrapped during a run and reduced
// mod 1 on output.

#include <cmath>
#include <limits>

#include "axioma/core/torus.hpp"
#include "axioma/flow/vector_field.hpp"

namespace axioma {

inline constexpr double default_step = 1e-3;

inline int step_count(double t, double step) {
    if (!(step > 0.0)) throw PreconditionError("integration step must be positive");
    if (!std::isfinite(t)) throw PreconditionError("integration time must be finite");
    double n = std::ceil(std::abs(t) / step - 1e-9);
    return std::max(1, static_cast<int>(n));
}

inline Vec2 rk4_step(const VectorFieldSpec& spec, const Vec2& x, double h) {
    Vec2 k1 = evaluate_field(spec, x).v;
    Vec2 k2 = evaluate_field(spec, Vec2(x + 0.5 * h * k1)).v;
    Vec2 k3 = evaluate_field(spec, Vec2(x + 0.5 * h * k2)).v;
    Vec2 k4 = evaluate_field(spec, Vec2(x + h * k3)).v;
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Unwrapped RK4 endpoint; coordinates are not reduced.
inline Vec2 flow_unwrapped(const VectorFieldSpec& spec, Vec2 x, double t, double step = default_step) {
    if (t == 0.0) return x;
    int n = step_count(t, step);
    double h = t / n;
    for (int i = 0; i < n; ++i) x = rk4_step(spec, x, h);
    return x;
}

inline TorusPoint integrate_flow(const VectorFieldSpec& spec, const TorusPoint& x, double t,
                                 double step = default_step) {
    if (t == 0.0) return x;
    return TorusPoint(x.n, flow_unwrapped(spec, x.c, t, step));
}

// Flow of the offset d in the chart centred at `anchor` (no wrapping).
inline Vec2 integrate_offset(const VectorFieldSpec& spec, const Vec2& anchor, Vec2 d, double t,
                             double step = default_step) {
    if (t == 0.0) return d;
    int n = step_count(t, step);
    double h = t / n;
    auto f = [&](const Vec2& y) { return evaluate_field_anchored(spec, anchor, y).v; };
    for (int i = 0; i < n; ++i) {
        Vec2 k1 = f(d);
        Vec2 k2 = f(d + 0.5 * h * k1);
        Vec2 k3 = f(d + 0.5 * h * k2);
        Vec2 k4 = f(d + h * k3);
        d += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return d;
}

// Calls visit(time, unwrapped position) at t = 0 and after every step; stops
// early when visit returns false. Returns the final unwrapped position.
template <class Visit>
Vec2 trace_orbit(const VectorFieldSpec& spec, Vec2 x, double t, double step, Visit&& visit) {
    if (!visit(0.0, x) || t == 0.0) return x;
    int n = step_count(t, step);
    double h = t / n;
    for (int i = 1; i <= n; ++i) {
        x = rk4_step(spec, x, h);
        if (!visit(i * h, x)) break;
    }
    return x;
}

struct FlowWithJacobian {
    TorusPoint x;
    Mat2 jacobian = Mat2::Identity();
};

// phi^t(x) together with D phi^t(x) from the variational equation J' = DV J.
inline FlowWithJacobian flow_jacobian(const VectorFieldSpec& spec, const TorusPoint& x0, double t,
                                      double step = default_step) {
    Vec2 x = x0.c;
    Mat2 J = Mat2::Identity();
    if (t != 0.0) {
        int n = step_count(t, step);
        double h = t / n;
        for (int i = 0; i < n; ++i) {
            FieldValue f1 = evaluate_field(spec, x);
            Vec2 x2 = x + 0.5 * h * f1.v;
            Mat2 j1 = f1.dv * J;
            FieldValue f2 = evaluate_field(spec, x2);
            Mat2 j2 = f2.dv * (J + 0.5 * h * j1);
            Vec2 x3 = x + 0.5 * h * f2.v;
            FieldValue f3 = evaluate_field(spec, x3);
            Mat2 j3 = f3.dv * (J + 0.5 * h * j2);
            Vec2 x4 = x + h * f3.v;
            FieldValue f4 = evaluate_field(spec, x4);
            Mat2 j4 = f4.dv * (J + h * j3);
            x += (h / 6.0) * (f1.v + 2.0 * f2.v + 2.0 * f3.v + f4.v);
            J += (h / 6.0) * (j1 + 2.0 * j2 + 2.0 * j3 + j4);
        }
    }
    if (x0.n == 1) {
        J(0, 1) = J(1, 0) = 0.0;
        J(1, 1) = 1.0;
    }
    return {TorusPoint(x0.n, x), J};
}

namespace detail {

inline void check_fiber(const Covector& eta) {
    double r = eta.norm();
    if (!std::isfinite(r) || r < 1e-280 || r > 1e280)
        throw NumericalDegeneracy("cotangent fiber left the representable range");
}

// One RK4 step of (x, eta) with field evaluator `eval(x)`.
template <class Eval>
void lift_step(Eval&& eval, Vec2& x, Covector& eta, double h) {
    FieldValue f1 = eval(x);
    Covector e1 = -f1.dv.transpose() * eta;
    FieldValue f2 = eval(Vec2(x + 0.5 * h * f1.v));
    Covector e2 = -f2.dv.transpose() * (eta + 0.5 * h * e1);
    FieldValue f3 = eval(Vec2(x + 0.5 * h * f2.v));
    Covector e3 = -f3.dv.transpose() * (eta + 0.5 * h * e2);
    FieldValue f4 = eval(Vec2(x + h * f3.v));
    Covector e4 = -f4.dv.transpose() * (eta + h * e3);
    x += (h / 6.0) * (f1.v + 2.0 * f2.v + 2.0 * f3.v + f4.v);
    eta += (h / 6.0) * (e1 + 2.0 * e2 + 2.0 * e3 + e4);
}

}  // namespace detail

// Phi^t(x, xi) = (phi^t x, (D phi^t)^{-T} xi).
inline CotangentPoint cotangent_lift(const VectorFieldSpec& spec, const CotangentPoint& p, double t,
                                     double step = default_step) {
    Covector eta = p.fiber;
    if (p.base.n == 1) eta[1] = 0.0;
    if (eta.norm() == 0.0) throw PreconditionError("cotangent lift needs a nonzero fiber");
    if (t == 0.0) return {p.base, eta};
    Vec2 x = p.base.c;
    int n = step_count(t, step);
    double h = t / n;
    auto eval = [&](const Vec2& y) { return evaluate_field(spec, y); };
    for (int i = 0; i < n; ++i) {
        detail::lift_step(eval, x, eta, h);
        detail::check_fiber(eta);
    }
    return {TorusPoint(p.base.n, x), eta};
}

// Unit cotangent flow: the lift renormalised to |xi| = 1 after each step.
inline CotangentPoint unit_lift(const VectorFieldSpec& spec, const CotangentPoint& p, double t,
                                double step = default_step) {
    Covector eta = p.fiber;
    if (p.base.n == 1) eta[1] = 0.0;
    double r = eta.norm();
    if (r == 0.0) throw PreconditionError("unit lift needs a nonzero fiber");
    eta /= r;
    if (t == 0.0) return {p.base, eta};
    Vec2 x = p.base.c;
    int n = step_count(t, step);
    double h = t / n;
    auto eval = [&](const Vec2& y) { return evaluate_field(spec, y); };
    for (int i = 0; i < n; ++i) {
        detail::lift_step(eval, x, eta, h);
        detail::check_fiber(eta);
        eta /= eta.norm();
    }
    return {TorusPoint(p.base.n, x), eta};
}

// Visits the unit lift as visit(time, unwrapped x, unit fiber, log growth of
// |xi| so far). Stops early when visit returns false.
template <class Visit>
void trace_unit_lift(const VectorFieldSpec& spec, Vec2 x, Covector eta, double t, double step, Visit&& visit) {
    double r = eta.norm();
    if (r == 0.0) throw PreconditionError("unit lift needs a nonzero fiber");
    eta /= r;
    double log_growth = 0.0;
    if (!visit(0.0, x, eta, log_growth) || t == 0.0) return;
    int n = step_count(t, step);
    double h = t / n;
    auto eval = [&](const Vec2& y) { return evaluate_field(spec, y); };
    for (int i = 1; i <= n; ++i) {
        detail::lift_step(eval, x, eta, h);
        detail::check_fiber(eta);
        double nr = eta.norm();
        log_growth += std::log(nr);
        eta /= nr;
        if (!visit(i * h, x, eta, log_growth)) break;
    }
}

// Lift of an offset chart point (anchor + d, eta); returns the new offset and fiber.
inline void cotangent_lift_offset(const VectorFieldSpec& spec, const Vec2& anchor, Vec2& d, Covector& eta,
                                  double t, double step = default_step) {
    if (t == 0.0) return;
    int n = step_count(t, step);
    double h = t / n;
    auto eval = [&](const Vec2& y) { return evaluate_field_anchored(spec, anchor, y); };
    for (int i = 0; i < n; ++i) {
        detail::lift_step(eval, d, eta, h);
        detail::check_fiber(eta);
    }
}

}  // namespace axioma

#endif
