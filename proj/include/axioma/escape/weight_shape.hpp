#ifndef AXIOMA_ESCAPE_WEIGHT_SHAPE_HPP
#define AXIOMA_ESCAPE_WEIGHT_SHAPE_HPP

// Weight shape f~ on S*M. On the unstable-dual cone it is the forward growth
// integral of |xi|, on the stable-dual cone the backward one, on the neutral
// cone |xi(V)|, and 1 elsewhere, glued by a partition of unity.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "axioma/escape/order_function.hpp"

namespace axioma {

struct WeightOptions {
    double T = 2.0;
    double step = 2e-3;
    // Width of the partition-of-unity transition outside each cone; capped at
    // the gap between cones so no cone sees another cone's piece.
    double blend = 0.1;
    // Time step of the centred difference along the lift.
    double fd_step = 1e-5;
};

// Unit cotangent point plus the log growth of |xi| relative to where it started.
struct LiftedPoint {
    SigmaPoint q;
    double log_growth = 0.0;
};

inline Covector unit_covector(const SigmaPoint& q, int dim) {
    Covector eta = covector_from_angle(q.theta);
    if (dim == 1) eta = Covector(eta[0] < 0.0 ? -1.0 : 1.0, 0.0);
    return eta;
}

// Exactly lifted point Phi~^t(q) with the accumulated log growth, in one RK4 step
// when |t| is small.
inline LiftedPoint lift_point(const VectorFieldSpec& spec, const SigmaPoint& q, double t, double step) {
    LiftedPoint out{q, 0.0};
    trace_unit_lift(spec, q.x, unit_covector(q, spec.dim), t, step,
                    [&](double, const Vec2& x, const Covector& eta, double g) {
                        out.q = {wrap_point(x, spec.dim), covector_angle(eta)};
                        out.log_growth = g;
                        return true;
                    });
    return out;
}

class WeightShape {
public:
    WeightShape(const VectorFieldSpec& spec, ConeRegions cones, WeightOptions opt)
        : spec_(spec), cones_(std::move(cones)), opt_(opt) {
        if (!(opt.T > 0.0)) throw PreconditionError("weight shape needs T > 0");
        width_ = std::min(opt.blend, 2.0 * cones_.radius());
    }

    const WeightOptions& options() const { return opt_; }
    const ConeRegions& cones() const { return cones_; }
    double blend_width() const { return width_; }

    // Growth integrals int_0^T |Phi^{+-t} xi| dt for a unit xi.
    double forward_integral(const SigmaPoint& q) const { return growth_integral(q, opt_.T); }
    double backward_integral(const SigmaPoint& q) const { return growth_integral(q, -opt_.T); }
    double neutral(const SigmaPoint& q) const {
        double h = std::abs(unit_covector(q, spec_.dim).dot(evaluate_field(spec_, q.x).v));
        return std::max(h, 1e-12);
    }

    struct Weights {
        double u = 0.0, s = 0.0, o = 0.0, rest = 0.0;
    };
    Weights weights(const SigmaPoint& q) const {
        auto d = cones_.distances(q);
        auto bump = [&](double out) { return out <= 0.0 ? 1.0 : 1.0 - smoothstep5(out / width_); };
        Weights w{bump(cones_.outside_u(d)), bump(cones_.outside_s(d)), bump(cones_.outside_o(d)), 0.0};
        w.rest = 1.0 - std::max({w.u, w.s, w.o});
        return w;
    }

    double value(const SigmaPoint& q) const {
        Weights w = weights(q);
        double num = w.rest, den = w.rest;
        if (w.u > 0.0) {
            num += w.u * forward_integral(q);
            den += w.u;
        }
        if (w.s > 0.0) {
            num += w.s * backward_integral(q);
            den += w.s;
        }
        if (w.o > 0.0) {
            num += w.o * neutral(q);
            den += w.o;
        }
        return num / den;
    }

    // X_H(log f) at a point with |xi| >= 1: the log growth of |xi| plus the
    // change of log f~, by a centred difference along the lift.
    double log_derivative(const SigmaPoint& q) const {
        double h = opt_.fd_step;
        LiftedPoint a = lift_point(spec_, q, h, h), b = lift_point(spec_, q, -h, h);
        return (a.log_growth - b.log_growth + std::log(value(a.q)) - std::log(value(b.q))) / (2.0 * h);
    }

private:
    double growth_integral(const SigmaPoint& q, double t) const {
        // Trapezoid rule on exp(log growth).
        double sum = 0.0, prev = 1.0;
        const double h = std::abs(t) / step_count(t, opt_.step);
        bool first = true;
        trace_unit_lift(spec_, q.x, unit_covector(q, spec_.dim), t, opt_.step,
                        [&](double, const Vec2&, const Covector&, double g) {
                            double v = std::exp(g);
                            if (!first) sum += 0.5 * h * (prev + v);
                            first = false;
                            prev = v;
                            return true;
                        });
        return sum;
    }

    VectorFieldSpec spec_;
    ConeRegions cones_;
    WeightOptions opt_;
    double width_ = 0.05;
};

struct WeightReport {
    double gamma = 0.0;
    double min_on_u = std::numeric_limits<double>::infinity();   // min X(log f) on N^u
    double max_on_s = -std::numeric_limits<double>::infinity();  // max X(log f) on N^s
    double max_abs_on_o = 0.0;                                   // max |X(log f)| on N^o
    double min_value = std::numeric_limits<double>::infinity();
    int samples_u = 0, samples_s = 0, samples_o = 0, samples = 0;
    int violations = 0;
};

// Samples the sign conditions X(log f) >= gamma/2 on N^u, <= -gamma/2 on
// N^s and |X(log f)| <= 1e-6 on N^o, and measures gamma.
inline WeightReport measure_weight(const WeightShape& w, int samples, std::uint64_t seed = 9) {
    WeightReport rep;
    std::mt19937_64 rng(seed);
    const auto& cones = w.cones();
    const int dim = cones.clouds().dim;
    for (const auto& q : detail::stratified_samples(cones, dim, samples, rng)) {
        ++rep.samples;
        rep.min_value = std::min(rep.min_value, w.value(q));
        ConeRegion r = cones.classify(q);
        if (r == ConeRegion::none) continue;
        double d = w.log_derivative(q);
        if (r == ConeRegion::u) {
            ++rep.samples_u;
            rep.min_on_u = std::min(rep.min_on_u, d);
        } else if (r == ConeRegion::s) {
            ++rep.samples_s;
            rep.max_on_s = std::max(rep.max_on_s, d);
        } else {
            ++rep.samples_o;
            rep.max_abs_on_o = std::max(rep.max_abs_on_o, std::abs(d));
        }
    }
    rep.gamma = 2.0 * std::min(rep.min_on_u, -rep.max_on_s);
    if (rep.samples_o > 0 && rep.max_abs_on_o > 1e-6) ++rep.violations;
    if (!(rep.min_value > 0.0)) ++rep.violations;
    return rep;
}

// Builds f~ and measures gamma; gamma <= 0 means T is too small.
inline std::pair<WeightShape, WeightReport> build_weight_shape(const VectorFieldSpec& spec, const ConeRegions& cones,
                                                               const WeightOptions& opt = {}, int samples = 2000,
                                                               std::uint64_t seed = 9) {
    WeightShape w(spec, cones, opt);
    WeightReport rep = measure_weight(w, samples, seed);
    if (!(rep.gamma > 0.0) || !std::isfinite(rep.gamma))
        throw CheckFailure("weight shape has gamma = " + std::to_string(rep.gamma) + "; increase T (now " +
                           std::to_string(opt.T) + ")");
    if (rep.violations > 0) throw CheckFailure("weight shape violates the neutral-cone or positivity condition");
    return {w, rep};
}

}  // namespace axioma

#endif
