#ifndef AXIOMA_ESCAPE_ESCAPE_HPP
#define AXIOMA_ESCAPE_ESCAPE_HPP

// Escape function G_m = m log sqrt(1 + f^2) with f = chi(|xi|^2) |xi| f~, its
// derivative along the lifted flow and the sampled decay check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "axioma/core/parallel.hpp"
#include "axioma/escape/weight_shape.hpp"

namespace axioma {

// Everything needed to evaluate G_m at (q, r) and at the lifted points
// Phi^{+-h}(q, r) for any radius r.
struct EscapeSample {
    SigmaPoint q;
    ConeRegion region = ConeRegion::none;
    bool near_sets = false;
    double E[3] = {0, 0, 0};       // sphere energy at q, Phi~^h q, Phi~^{-h} q
    double E_lie = 0.0;            // X~ E at q
    double growth[3] = {0, 0, 0};  // log |Phi^t xi| / |xi| for t = 0, h, -h
    double shape[3] = {1, 1, 1};   // f~ at the three points
    double h = 0.0;
};

class EscapeFunction {
public:
    EscapeFunction(const VectorFieldSpec& spec, OrderFunction order, WeightShape weight, double neighborhood,
                   std::vector<BasicSetRecord> sets)
        : spec_(spec),
          order_(std::move(order)),
          weight_(std::move(weight)),
          neighborhood_(neighborhood),
          sets_(std::move(sets)) {}

    const OrderFunction& order() const { return order_; }
    const WeightShape& weight() const { return weight_; }
    double neighborhood() const { return neighborhood_; }

    static double weight_value(double r, double shape) { return order_cutoff(r * r) * r * shape; }
    static double log_bracket(double f) { return 0.5 * std::log1p(f * f); }

    double order_value(const SigmaPoint& q, double r) const { return order_.value(q, r); }
    double value(const SigmaPoint& q, double r) const {
        double c = order_cutoff(r * r);
        if (c == 0.0) return 0.0;
        double m = c * order_.sphere(q).value;
        return m == 0.0 ? 0.0 : m * log_bracket(weight_value(r, weight_.value(q)));
    }

    bool near_sets(const Vec2& x) const {
        for (const auto& k : sets_)
            if (distance_to_set(k, x) < neighborhood_) return true;
        return false;
    }

    EscapeSample sample(const SigmaPoint& q) const {
        EscapeSample s;
        s.q = q;
        s.h = weight_.options().fd_step;
        s.region = weight_.cones().classify(q);
        s.near_sets = near_sets(q.x);
        OrderLocal l = order_.local(q);
        auto e0 = order_.sphere(l, 0.0);
        s.E[0] = e0.value;
        s.E_lie = e0.lie;
        s.E[1] = order_.sphere(l, s.h).value;
        s.E[2] = order_.sphere(l, -s.h).value;
        LiftedPoint a = lift_point(spec_, q, s.h, s.h), b = lift_point(spec_, q, -s.h, s.h);
        s.growth[1] = a.log_growth;
        s.growth[2] = b.log_growth;
        s.shape[0] = weight_.value(q);
        s.shape[1] = weight_.value(a.q);
        s.shape[2] = weight_.value(b.q);
        return s;
    }

    static double sample_value(const EscapeSample& s, int i, double r) {
        double rr = r * std::exp(s.growth[i]);
        double c = order_cutoff(rr * rr);
        if (c == 0.0) return 0.0;
        return c * s.E[i] * log_bracket(weight_value(rr, s.shape[i]));
    }
    // X_H(G_m) at (q, r) by the centred difference along the lift.
    static double flow_derivative(const EscapeSample& s, double r) {
        return (sample_value(s, 1, r) - sample_value(s, 2, r)) / (2.0 * s.h);
    }
    double flow_derivative(const SigmaPoint& q, double r) const { return flow_derivative(sample(q), r); }

private:
    VectorFieldSpec spec_;
    OrderFunction order_;
    WeightShape weight_;
    double neighborhood_;
    std::vector<BasicSetRecord> sets_;
};

struct DecayViolation {
    SigmaPoint q;
    double r = 0.0;
    double derivative = 0.0;
    std::string region;
    bool exempt = false;
};

struct DecayReport {
    bool passed = false;
    double gamma = 0.0;
    double C_m = 0.0;
    double R = std::numeric_limits<double>::quiet_NaN();  // smallest sampled radius passing
    int samples = 0;
    int exempt_samples = 0;
    int region_samples[4] = {0, 0, 0, 0};  // none, s, o, u
    int region_violations[4] = {0, 0, 0, 0};
    double max_derivative = -std::numeric_limits<double>::infinity();      // over all samples at R
    double max_strict = -std::numeric_limits<double>::infinity();          // over non-exempt samples at R
    std::vector<double> radii_tried;
    std::vector<int> violations_per_radius;
    std::vector<DecayViolation> violations;  // at the largest radius tried when none passes
};

struct DecayOptions {
    int samples = 2000;
    double R_min = 1.0;
    double R_max = 1e8;
    double R_factor = 2.0;
    double global_tol = 1e-6;
    std::size_t max_listed = 20;
    std::uint64_t seed = 13;
};

// Checks X_H(G_m) <= 1e-6 for |xi| in [R, 10R] and X_H(G_m) <= -C_m outside the
// neutral cone over the neighbourhoods, with C_m = (gamma/8) min(s, |u|), and
// reports the smallest R on the doubling ladder where every sample passes.
inline DecayReport verify_decay(const EscapeFunction& G, double gamma, const DecayOptions& opt = {}) {
    DecayReport rep;
    const auto& p = G.order().parameters();
    rep.gamma = gamma;
    rep.C_m = gamma / 8.0 * std::min(p.s, std::abs(p.u));
    std::mt19937_64 rng(opt.seed);
    const auto& cones = G.weight().cones();
    auto pts = detail::stratified_samples(cones, cones.clouds().dim, opt.samples, rng);
    std::vector<EscapeSample> cache(pts.size());
    std::vector<double> frac(pts.size());
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (std::size_t i = 0; i < pts.size(); ++i) frac[i] = uni(rng);
    parallel_for(pts.size(), [&](std::size_t i) { cache[i] = G.sample(pts[i]); });
    rep.samples = int(pts.size());

    auto idx = [](ConeRegion r) { return static_cast<int>(r); };
    for (double R = opt.R_min; R <= opt.R_max * (1 + 1e-12); R *= opt.R_factor) {
        int bad = 0;
        std::vector<DecayViolation> list;
        for (std::size_t i = 0; i < cache.size(); ++i) {
            const auto& s = cache[i];
            double r = R * std::pow(10.0, frac[i]);
            double d = EscapeFunction::flow_derivative(s, r);
            bool exempt = s.region == ConeRegion::o && s.near_sets;
            bool ok = d <= opt.global_tol && (exempt || d <= -rep.C_m);
            if (!ok) {
                ++bad;
                if (list.size() < opt.max_listed) list.push_back({s.q, r, d, to_string(s.region), exempt});
            }
        }
        rep.radii_tried.push_back(R);
        rep.violations_per_radius.push_back(bad);
        if (bad == 0) {
            rep.passed = true;
            rep.R = R;
            rep.violations.clear();
            break;
        }
        rep.violations = std::move(list);
    }
    double R = rep.passed ? rep.R : rep.radii_tried.back();
    for (std::size_t i = 0; i < cache.size(); ++i) {
        const auto& s = cache[i];
        double r = R * std::pow(10.0, frac[i]);
        double d = EscapeFunction::flow_derivative(s, r);
        bool exempt = s.region == ConeRegion::o && s.near_sets;
        ++rep.region_samples[idx(s.region)];
        if (exempt) ++rep.exempt_samples;
        rep.max_derivative = std::max(rep.max_derivative, d);
        if (!exempt) rep.max_strict = std::max(rep.max_strict, d);
        if (d > opt.global_tol || (!exempt && d > -rep.C_m)) ++rep.region_violations[idx(s.region)];
    }
    return rep;
}

struct EscapeOptions {
    OrderOptions order;
    WeightOptions weight;
    int weight_samples = 2000;
    double neighborhood = 0.1;
};

struct EscapeBuild {
    OrderBuild order;
    WeightReport weight_report;
    EscapeFunction escape;
};

inline EscapeBuild build_escape_function(const OrderParameters& p, const SmaleGraph& graph,
                                         const VectorFieldSpec& spec, const EscapeOptions& opt = {}) {
    OrderBuild ob = build_order_function(p, graph, spec, opt.order);
    auto [w, wr] = build_weight_shape(spec, ob.cones, opt.weight, opt.weight_samples, opt.order.seed + 4);
    EscapeFunction G(spec, ob.order, w, opt.neighborhood, graph.sets);
    return {ob, wr, G};
}

}  // namespace axioma

#endif
