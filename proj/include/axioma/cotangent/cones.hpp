#ifndef AXIOMA_COTANGENT_CONES_HPP
#define AXIOMA_COTANGENT_CONES_HPP

// Conical neighbourhoods of the dual distributions and an empirical check of
// their stability and expansion under the time-one cotangent map.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>

#include "axioma/cotangent/frames.hpp"
#include "axioma/lyapunov/filtration.hpp"

namespace axioma {

enum class ConeKind { u, uo, s, so };

inline const char* to_string(ConeKind k) {
    switch (k) {
        case ConeKind::u: return "u";
        case ConeKind::uo: return "uo";
        case ConeKind::s: return "s";
        default: return "so";
    }
}

struct ConeSpec {
    ConeKind kind = ConeKind::u;
    double delta = 1.0;

    void validate() const {
        if (!(delta > 0.0 && delta <= 1.0)) throw PreconditionError("cone aperture must lie in (0, 1]");
    }
};

// Smallest delta whose closed cone contains xi; +inf when xi has no part in
// the cone's own direction.
inline double cone_ratio(ConeKind kind, const FiberParts& p) {
    double num = 0.0, den = 0.0;
    switch (kind) {
        case ConeKind::u: num = p.s2() + p.o2(); den = p.u2(); break;
        case ConeKind::uo: num = p.s2(); den = p.u2() + p.o2(); break;
        case ConeKind::s: num = p.u2() + p.o2(); den = p.s2(); break;
        case ConeKind::so: num = p.u2(); den = p.s2() + p.o2(); break;
    }
    if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return num / den;
}

inline bool in_cone(const ConeSpec& c, const DistributionFrame& f, const Covector& xi) {
    c.validate();
    FiberParts p = f.decompose(xi);
    if (p.u2() + p.s2() + p.o2() == 0.0) return false;
    return cone_ratio(c.kind, p) < c.delta;
}

// Time-one map and its derivative at a point.
struct ConeStep {
    Vec2 image = Vec2::Zero();
    Mat2 jacobian = Mat2::Identity();
};

// Everything the cone check needs about a neighbourhood V of a basic set.
struct ConeDynamics {
    double lambda = 0.0;
    int dim = 2;
    std::function<ConeStep(const Vec2&)> step;
    std::function<DistributionFrame(const Vec2&)> frame;
    std::function<bool(const Vec2&)> inside;
    std::function<Vec2(std::mt19937_64&)> sample;
    // Points of K carrying a neutral direction (orbits), for the isometry diagnostic.
    std::vector<Vec2> neutral_points;
};

namespace detail {

// Draws y = p + a e_s + b e_u near K with |b| log-uniform down to 1e-300, so
// forward iterates of y stay near K for a spread of times.
inline Vec2 chart_sample(const SetSplitting& sp, double radius, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, sp.points.size() - 1);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::size_t i = pick(rng);
    Vec2 y = sp.points[i];
    for (const auto& e : sp.es[i]) y += 0.7 * radius * unit(rng) * e;
    for (const auto& e : sp.eu[i]) {
        double mag = std::exp(std::log(0.7 * radius) + (std::log(1e-300) - std::log(0.7 * radius)) * std::abs(unit(rng)));
        y += (unit(rng) < 0.0 ? -mag : mag) * e;
    }
    if (sp.orbit()) {
        Vec2 v = evaluate_field(sp.spec, sp.points[i]).v;
        if (v.norm() > 0.0) y += 0.1 * radius * unit(rng) * v.normalized();
    }
    return y;
}

}  // namespace detail

// V = N ∩ phi^{-1}(N) with N the radius-ball of K, for the true flow.
inline RegionMask cone_neighborhood(const ExtendedFrames& frames, int grid_res = 64) {
    const SetSplitting& sp = frames.splitting();
    const double r = frames.radius();
    const BasicSetRecord k = sp.set;
    const VectorFieldSpec spec = sp.spec;
    Grid g{spec.dim, grid_res};
    return RegionMask::from_predicate(
        g, spec,
        [k, r, spec](const Vec2& x) {
            if (distance_to_set(k, x) >= r) return false;
            Vec2 y = integrate_flow(spec, TorusPoint(spec.dim, x), 1.0).c;
            return distance_to_set(k, y) < r;
        },
        "cone-V");
}

inline ConeDynamics flow_cone_dynamics(const ExtendedFrames& frames) {
    ConeDynamics d;
    const SetSplitting& sp = frames.splitting();
    d.lambda = sp.set.lambda;
    d.dim = sp.dim();
    VectorFieldSpec spec = sp.spec;
    BasicSetRecord k = sp.set;
    double r = frames.radius();
    int n = spec.dim;
    d.step = [spec, n](const Vec2& x) {
        FlowWithJacobian f = flow_jacobian(spec, TorusPoint(n, x), 1.0);
        return ConeStep{f.x.c, f.jacobian};
    };
    auto fr = std::make_shared<ExtendedFrames>(frames);
    d.frame = [fr](const Vec2& x) { return fr->at(x); };
    d.inside = [k, r, spec, n](const Vec2& x) {
        if (distance_to_set(k, wrap_point(x, n)) >= r) return false;
        Vec2 y = integrate_flow(spec, TorusPoint(n, x), 1.0).c;
        return distance_to_set(k, y) < r;
    };
    d.sample = [fr, r](std::mt19937_64& rng) { return detail::chart_sample(fr->splitting(), r, rng); };
    if (sp.orbit()) d.neutral_points = sp.points;
    return d;
}

// The linear map x -> A x on R^2 near the origin, with constant frames from
// the eigenvectors of A (a saddle, sink or source).
inline ConeDynamics linear_cone_dynamics(const Mat2& A, double lambda, double radius) {
    ConeDynamics d;
    d.lambda = lambda;
    d.dim = 2;
    Eigen2 e = eigenvalues2(A);
    if (!e.real) throw PreconditionError("linear cone model needs real multipliers");
    std::vector<Vec2> es, eu;
    for (double mu : {e.mu[0].real(), e.mu[1].real()}) {
        if (std::abs(mu) == 1.0) throw PreconditionError("linear cone model must be hyperbolic");
        (std::abs(mu) > 1.0 ? eu : es).push_back(eigenvector2(A, mu));
    }
    DistributionFrame f = frame_from_tangents(Vec2::Zero(), 2, false, int(es.size()), int(eu.size()), es, eu,
                                              Vec2::Zero(), FrameProvenance::on_set);
    d.step = [A](const Vec2& x) { return ConeStep{A * x, A}; };
    d.frame = [f](const Vec2& x) {
        DistributionFrame g = f;
        g.x = x;
        return g;
    };
    d.inside = [A, radius](const Vec2& x) { return x.norm() < radius && (A * x).norm() < radius; };
    SetSplitting sp;
    sp.points = {Vec2::Zero()};
    sp.es = {es};
    sp.eu = {eu};
    d.sample = [sp, radius](std::mt19937_64& rng) { return detail::chart_sample(sp, radius, rng); };
    return d;
}

struct ConeSample {
    Vec2 x = Vec2::Zero();
    int depth = 0;
    ConeKind kind = ConeKind::u;
    double delta = 0.0;
    Covector xi = Covector::Zero();
    double factor = 0.0;  // measured delta'/delta, for contraction samples
    double growth = 0.0;  // |Phi^1 xi|^2 / |xi|^2, for growth samples
    bool growth_sample = false;
};

struct ConeCheckReport {
    bool passed = false;
    int m_delta0 = -1;
    double delta0 = 0.1;
    double lambda = 0.0;
    double factor_bound = 0.0;   // e^{-lambda/3}
    double growth_bound = 0.0;   // e^{lambda/3}
    double worst_factor = 0.0;   // over samples of depth >= m_delta0
    double min_growth = std::numeric_limits<double>::infinity();
    double neutral_ratio = std::numeric_limits<double>::quiet_NaN();
    int contraction_samples = 0;
    int growth_samples = 0;
    int violations = 0;  // at depth >= m_delta0 (all depths when failed)
    int max_depth = 0;
    std::optional<ConeSample> worst;
};

namespace detail {

// Random unit covector in the span of the given vectors.
inline Covector random_in_span(const std::vector<Covector>& a, const std::vector<Covector>& b, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Covector v = Covector::Zero();
    for (const auto* part : {&a, &b})
        for (const auto& w : *part) v += g(rng) * w;
    double n = v.norm();
    return n > 0.0 ? Covector(v / n) : v;
}

}  // namespace detail

// Samples x in V ∩ phi(V) ∩ ... ∩ phi^{m-1}(V) (depth m >= 1: x and its m-1
// preimages lie in V) and covectors on the boundaries of C_u^delta and
// C_uo^delta for delta in [delta0, 1]; checks the image lies in the cone of
// aperture e^{-lambda/3} delta at phi(x). Growth samples lie on the boundary of
// the complement of C_so^delta and must satisfy |Phi xi|^2 >= e^{lambda/3}|xi|^2.
// m_delta0 is the smallest depth from which every sample passes.
inline ConeCheckReport cone_contraction_check(const ConeDynamics& dyn, double delta0, int m_max, int boundary_samples = 1000,
                                              std::uint64_t seed = 11) {
    if (!(delta0 > 0.0 && delta0 <= 1.0)) throw PreconditionError("delta0 must lie in (0, 1]");
    if (m_max < 1) throw PreconditionError("m_max must be at least 1");
    ConeCheckReport rep;
    rep.delta0 = delta0;
    rep.lambda = dyn.lambda;
    rep.factor_bound = std::exp(-dyn.lambda / 3.0);
    rep.growth_bound = std::exp(dyn.lambda / 3.0);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<ConeSample> all;
    int attempts = 0;
    while (int(all.size()) < 2 * boundary_samples && attempts < 50 * boundary_samples) {
        ++attempts;
        Vec2 x = dyn.sample(rng);
        if (!dyn.inside(x)) continue;
        DistributionFrame fx = dyn.frame(x);
        for (int depth = 1; depth <= m_max && int(all.size()) < 2 * boundary_samples; ++depth) {
            ConeStep st = dyn.step(x);
            DistributionFrame fy = dyn.frame(st.image);
            Mat2 jt = st.jacobian.transpose();
            auto push = [&](const Covector& xi) {
                Covector out = jt.partialPivLu().solve(xi);
                if (dyn.dim == 1) out[1] = 0.0;
                return out;
            };
            double delta = delta0 * std::pow(1.0 / delta0, unit(rng));
            // Contraction of C_u and C_uo.
            for (ConeKind kind : {ConeKind::u, ConeKind::uo}) {
                const auto& own_a = fx.u;
                const auto& own_b = kind == ConeKind::uo ? fx.o : std::vector<Covector>{};
                const auto& rest_a = fx.s;
                const auto& rest_b = kind == ConeKind::u ? fx.o : std::vector<Covector>{};
                Covector a = detail::random_in_span(own_a, own_b, rng);
                Covector b = detail::random_in_span(rest_a, rest_b, rng);
                if (a.norm() == 0.0 || b.norm() == 0.0) continue;
                // Scale b so that xi sits on the cone boundary.
                Covector xi = a + std::sqrt(delta / cone_ratio(kind, fx.decompose(a + b))) * b;
                double r1 = cone_ratio(kind, fy.decompose(push(xi)));
                ConeSample s{x, depth, kind, delta, xi, r1 / delta, 0.0, false};
                all.push_back(s);
            }
            // Growth off C_so^delta: |xi_u|^2 = delta (|xi_s|^2 + |xi_o|^2).
            {
                Covector a = detail::random_in_span(fx.u, {}, rng);
                Covector b = detail::random_in_span(fx.s, fx.o, rng);
                if (a.norm() > 0.0) {
                    Covector xi = a;
                    if (b.norm() > 0.0) {
                        FiberParts p = fx.decompose(a + b);
                        xi = std::sqrt(delta * (p.s2() + p.o2()) / p.u2()) * a + b;
                    }
                    ConeSample s{x, depth, ConeKind::so, delta, xi, 0.0, push(xi).squaredNorm() / xi.squaredNorm(), true};
                    all.push_back(s);
                }
            }
            rep.max_depth = std::max(rep.max_depth, depth);
            x = st.image;
            if (!dyn.inside(x)) break;
            fx = std::move(fy);
        }
    }

    auto fails = [&](const ConeSample& s) {
        return s.growth_sample ? s.growth < rep.growth_bound : !(s.factor <= rep.factor_bound);
    };
    int worst_depth_failing = 0;
    for (const auto& s : all)
        if (fails(s)) worst_depth_failing = std::max(worst_depth_failing, s.depth);
    rep.m_delta0 = worst_depth_failing + 1;
    rep.passed = rep.m_delta0 <= m_max && !all.empty();
    for (const auto& s : all) {
        bool counted = !rep.passed || s.depth >= rep.m_delta0;
        if (!counted) continue;
        (s.growth_sample ? rep.growth_samples : rep.contraction_samples)++;
        if (fails(s)) ++rep.violations;
        double badness = s.growth_sample ? rep.growth_bound / s.growth : s.factor / rep.factor_bound;
        double worst_bad = !rep.worst ? -1.0
                                      : (rep.worst->growth_sample ? rep.growth_bound / rep.worst->growth
                                                                  : rep.worst->factor / rep.factor_bound);
        if (badness > worst_bad) rep.worst = s;
        if (s.growth_sample) rep.min_growth = std::min(rep.min_growth, s.growth);
        else rep.worst_factor = std::max(rep.worst_factor, s.factor);
    }
    if (!rep.passed) rep.m_delta0 = -1;
    // Neutral direction: ratio |Phi^1 xi_o| / |xi_o| on K.
    for (const auto& p : dyn.neutral_points) {
        DistributionFrame f = dyn.frame(p);
        if (f.o.empty()) continue;
        ConeStep st = dyn.step(p);
        Covector out = st.jacobian.transpose().partialPivLu().solve(f.o[0]);
        rep.neutral_ratio = out.norm() / f.o[0].norm();
        break;
    }
    return rep;
}

}  // namespace axioma

#endif
