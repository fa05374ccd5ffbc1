#ifndef AXIOMA_FLOW_VECTOR_FIELD_HPP
#define AXIOMA_FLOW_VECTOR_FIELD_HPP

// Trigonometric-polynomial vector fields on T^1 and T^2 with exact Jacobians,
// plus the built-in catalog.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "axioma/core/torus.hpp"
#include "axioma/flow/trig_poly.hpp"

namespace axioma {

struct VectorFieldSpec {
    int dim = 2;
    std::string tag = "inline";
    std::array<std::vector<FourierTerm>, 2> components;
    // Set when V = -grad f for the stored potential f.
    std::optional<std::vector<FourierTerm>> potential;

    bool is_gradient() const { return potential.has_value(); }

    int max_frequency() const {
        int m = 0;
        for (const auto& comp : components)
            for (const auto& t : comp) m = std::max(m, std::max(std::abs(t.k[0]), std::abs(t.k[1])));
        return m;
    }

    TrigPoly component_poly(int i) const { return TrigPoly::from_terms(components[i]); }

    // The field -V, used for time-reversal checks.
    VectorFieldSpec reversed() const {
        VectorFieldSpec r = *this;
        r.tag = tag + "_reversed";
        for (auto& comp : r.components)
            for (auto& t : comp) {
                t.a = -t.a;
                t.b = -t.b;
            }
        if (r.potential)
            for (auto& t : *r.potential) {
                t.a = -t.a;
                t.b = -t.b;
            }
        return r;
    }

    void validate() const {
        if (dim != 1 && dim != 2) throw ConfigError("field dimension must be 1 or 2");
        if (dim == 1) {
            if (!components[1].empty()) throw ConfigError("T^1 field has a second component");
            for (const auto& t : components[0])
                if (t.k[1] != 0) throw ConfigError("T^1 field uses a y-frequency");
        }
        for (const auto& comp : components)
            for (const auto& t : comp)
                if (!std::isfinite(t.a) || !std::isfinite(t.b))
                    throw ConfigError("non-finite Fourier coefficient");
    }
};

struct FieldValue {
    Vec2 v = Vec2::Zero();
    Mat2 dv = Mat2::Zero();
};

namespace detail {

inline void accumulate_term(const FourierTerm& t, double s, double c, int i, FieldValue& out) {
    out.v[i] += t.a * c + t.b * s;
    double dphase = -t.a * s + t.b * c;
    out.dv(i, 0) += two_pi * t.k[0] * dphase;
    out.dv(i, 1) += two_pi * t.k[1] * dphase;
}

}  // namespace detail

// V(x) and DV(x), DV(i,j) = d V^i / d x_j.
inline FieldValue evaluate_field(const VectorFieldSpec& spec, const Vec2& x) {
    FieldValue out;
    for (int i = 0; i < spec.dim; ++i)
        for (const auto& t : spec.components[i]) {
            double s, c;
            sincos2pi(t.k[0] * x[0] + t.k[1] * x[1], s, c);
            detail::accumulate_term(t, s, c, i, out);
        }
    return out;
}

inline FieldValue evaluate_field(const VectorFieldSpec& spec, const TorusPoint& x) {
    return evaluate_field(spec, x.c);
}

// Evaluation at anchor + d with the phase split into an exactly reduced anchor
// part and a small offset part. Keeps relative accuracy for tiny offsets around
// fixed points located at rational anchors.
// True when both specs give the same field (compared at fixed probe points).
inline bool same_field(const VectorFieldSpec& a, const VectorFieldSpec& b) {
    if (a.dim != b.dim) return false;
    for (Vec2 p : {Vec2(0.1234, 0.5678), Vec2(0.731, 0.219), Vec2(0.377, 0.911)})
        if ((evaluate_field(a, p).v - evaluate_field(b, p).v).norm() > 1e-12) return false;
    return true;
}

inline FieldValue evaluate_field_anchored(const VectorFieldSpec& spec, const Vec2& anchor, const Vec2& d) {
    FieldValue out;
    for (int i = 0; i < spec.dim; ++i)
        for (const auto& t : spec.components[i]) {
            double sp, cp;
            sincos2pi(t.k[0] * anchor[0] + t.k[1] * anchor[1], sp, cp);
            double theta = two_pi * (t.k[0] * d[0] + t.k[1] * d[1]);
            double sd = std::sin(theta);
            // cos(theta) - 1 without cancellation.
            double h = std::sin(0.5 * theta);
            double cm1 = -2.0 * h * h;
            double s = sp + (sp * cm1 + cp * sd);
            double c = cp + (cp * cm1 - sp * sd);
            detail::accumulate_term(t, s, c, i, out);
        }
    return out;
}

// V = -grad f for a trigonometric potential f.
inline VectorFieldSpec gradient_field(const std::vector<FourierTerm>& f, int dim, const std::string& tag) {
    VectorFieldSpec spec;
    spec.dim = dim;
    spec.tag = tag;
    TrigPoly p = TrigPoly::from_terms(f);
    for (int i = 0; i < dim; ++i) spec.components[i] = (p.derivative(i) * -1.0).real_terms(1e-300);
    spec.potential = f;
    return spec;
}

inline double evaluate_potential(const VectorFieldSpec& spec, const Vec2& x) {
    if (!spec.potential) throw PreconditionError("field has no potential");
    return TrigPoly::from_terms(*spec.potential).evaluate(x);
}

// Built-in catalog. `param` is the tag-specific parameter: the rotation vector
// for `rotation`, and (a, 0) for the contraction rate of `limit_cycle`.
inline VectorFieldSpec catalog_field(const std::string& tag, const Vec2& param = Vec2(std::nan(""), 0.0)) {
    auto has = [&] { return !std::isnan(param[0]); };
    if (tag == "grad_cos1") {
        return gradient_field({{{1, 0}, 1.0, 0.0}}, 1, tag);
    }
    if (tag == "grad_cos2") {
        return gradient_field({{{1, 0}, 1.0, 0.0}, {{0, 1}, 1.0, 0.0}}, 2, tag);
    }
    if (tag == "rotation") {
        Vec2 w = has() ? param : Vec2(1.0, 0.0);
        VectorFieldSpec spec;
        spec.dim = 2;
        spec.tag = tag;
        spec.components[0] = {{{0, 0}, w[0], 0.0}};
        spec.components[1] = {{{0, 0}, w[1], 0.0}};
        return spec;
    }
    if (tag == "limit_cycle") {
        // V = (1, -a sin 2 pi y): the circle y = 0 attracts with Floquet exponent
        // -2 pi a, the circle y = 1/2 repels.
        double a = has() ? param[0] : 1.0;
        VectorFieldSpec spec;
        spec.dim = 2;
        spec.tag = tag;
        spec.components[0] = {{{0, 0}, 1.0, 0.0}};
        spec.components[1] = {{{0, 1}, 0.0, -a}};
        return spec;
    }
    if (tag == "torus_saddle_connection") {
        // V = (2 pi sin 2 pi x, -2 pi cos 2 pi x sin 2 pi y). Saddles at (0,0) and
        // (1/2,0) joined along y = 0, source (0,1/2), sink (1/2,1/2).
        VectorFieldSpec spec;
        spec.dim = 2;
        spec.tag = tag;
        spec.components[0] = {{{1, 0}, 0.0, two_pi}};
        spec.components[1] = {{{1, 1}, 0.0, -0.5 * two_pi}, {{1, -1}, 0.0, 0.5 * two_pi}};
        return spec;
    }
    if (tag == "t2_cancel_pair") {
        // f = cos 2 pi x + cos 2 pi y + cos(4 pi x)/4 + cos(2 pi (2x+y))/8 + cos(2 pi (2x-y))/8.
        return gradient_field({{{1, 0}, 1.0, 0.0},
                               {{0, 1}, 1.0, 0.0},
                               {{2, 0}, 0.25, 0.0},
                               {{2, 1}, 0.125, 0.0},
                               {{2, -1}, 0.125, 0.0}},
                              2, tag);
    }
    if (tag == "cellular") {
        // Hamiltonian H = sin 2 pi x sin 2 pi y; V = (dH/dy, -dH/dx). Has centers.
        VectorFieldSpec spec;
        spec.dim = 2;
        spec.tag = tag;
        spec.components[0] = {{{1, 1}, 0.0, 0.5 * two_pi}, {{1, -1}, 0.0, 0.5 * two_pi}};
        spec.components[1] = {{{1, 1}, 0.0, -0.5 * two_pi}, {{1, -1}, 0.0, 0.5 * two_pi}};
        return spec;
    }
    if (tag == "flat_constant") {
        // f = 0: every point is a degenerate critical point.
        VectorFieldSpec spec = gradient_field({{{0, 0}, 1.0, 0.0}}, 2, tag);
        return spec;
    }
    throw ConfigError("unknown catalog field '" + tag + "'");
}

inline const std::vector<std::string>& catalog_tags() {
    static const std::vector<std::string> tags{"grad_cos1",      "grad_cos2", "rotation",
                                               "limit_cycle",    "torus_saddle_connection",
                                               "t2_cancel_pair", "cellular",  "flat_constant"};
    return tags;
}

}  // namespace axioma

#endif
