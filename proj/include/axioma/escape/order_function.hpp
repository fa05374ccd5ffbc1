#ifndef AXIOMA_ESCAPE_ORDER_FUNCTION_HPP
#define AXIOMA_ESCAPE_ORDER_FUNCTION_HPP

// Order function m(x, xi) = chi(|xi|^2) E(x, xi/|xi|) with
// E = -E_base + s + (u - n0) E+ + (n0 - s) E-, and the conical regions around
// the dual distributions where its bounds are checked.

#include <cmath>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "axioma/cotangent/fiber_energy.hpp"
#include "axioma/lyapunov/energy.hpp"

namespace axioma {

struct OrderParameters {
    double u = -20.0;
    double n0 = 0.0;
    double s = 20.0;

    void validate() const {
        if (!(u < 0.0 && 0.0 <= n0 && n0 < s))
            throw PreconditionError("order parameters must satisfy u < 0 <= n0 < s (got u=" + std::to_string(u) +
                                    ", n0=" + std::to_string(n0) + ", s=" + std::to_string(s) + ")");
    }
    // E = -E_base + s + (u - n0) E+ + (n0 - s) E-.
    double combine(double base, double plus, double minus) const {
        return -base + s + (u - n0) * plus + (n0 - s) * minus;
    }
    // Base energy levels l_j = n0 (j-1) / (4(N-1)), j = 1..N.
    std::vector<double> levels(int N) const {
        std::vector<double> l(N, 0.0);
        for (int j = 1; j < N; ++j) l[j] = n0 * j / (4.0 * (N - 1));
        return l;
    }
};

// Cutoff chi(t): 0 on (-inf, 1/2], 1 on [1, inf).
inline double order_cutoff(double t) { return smoothstep5(2.0 * t - 1.0); }

enum class ConeRegion { none, s, o, u };

inline const char* to_string(ConeRegion r) {
    switch (r) {
        case ConeRegion::s: return "s";
        case ConeRegion::o: return "o";
        case ConeRegion::u: return "u";
        default: return "other";
    }
}

// Conical neighbourhoods on S*M, named after the dual distribution they
// surround: N^u near E*_u (Sigma_s and Sigma_so), N^s near E*_s (Sigma_uo and
// Sigma_u), N^o near E*_o (Sigma_so and Sigma_uo).
class ConeRegions {
public:
    ConeRegions() = default;
    ConeRegions(const SigmaClouds& c, double radius) : radius_(radius), dim_(c.dim) {
        clouds_ = std::make_shared<SigmaClouds>(c);
        double cell = std::max(radius, 0.02);
        is_ = std::make_shared<CloudIndex>(clouds_->s, dim_, cell);
        iso_ = std::make_shared<CloudIndex>(clouds_->so, dim_, cell);
        iuo_ = std::make_shared<CloudIndex>(clouds_->uo, dim_, cell);
        iu_ = std::make_shared<CloudIndex>(clouds_->u, dim_, cell);
    }

    double radius() const { return radius_; }
    const SigmaClouds& clouds() const { return *clouds_; }

    struct Distances {
        double s, so, uo, u;
    };
    Distances distances(const SigmaPoint& p) const {
        return {is_->distance(p), iso_->distance(p), iuo_->distance(p), iu_->distance(p)};
    }
    ConeRegion classify(const SigmaPoint& p) const { return classify(distances(p)); }
    ConeRegion classify(const Distances& d) const {
        if (d.s < radius_ && d.so < radius_) return ConeRegion::u;
        if (d.uo < radius_ && d.u < radius_) return ConeRegion::s;
        if (d.so < radius_ && d.uo < radius_) return ConeRegion::o;
        return ConeRegion::none;
    }
    // Distance-like depth outside each cone (<= 0 inside).
    double outside_u(const Distances& d) const { return std::max(d.s, d.so) - radius_; }
    double outside_s(const Distances& d) const { return std::max(d.uo, d.u) - radius_; }
    double outside_o(const Distances& d) const { return std::max(d.so, d.uo) - radius_; }

    // Points near the cone's own cloud, for stratified sampling.
    std::vector<SigmaPoint> seeds(ConeRegion r) const {
        switch (r) {
            case ConeRegion::u: return clouds_->s;
            case ConeRegion::s: return clouds_->uo;
            case ConeRegion::o: {
                std::vector<SigmaPoint> out;
                for (const auto& p : clouds_->so)
                    if (iuo_->distance(p) < radius_) out.push_back(p);
                return out;
            }
            default: return {};
        }
    }

private:
    double radius_ = 0.025;
    int dim_ = 2;
    std::shared_ptr<SigmaClouds> clouds_;
    std::shared_ptr<CloudIndex> is_, iso_, iuo_, iu_;
};

// Transits that determine E at a point of S*M; shifting them by h gives E at
// the lifted point Phi~^h, exactly.
struct OrderLocal {
    Transit plus, minus;
    std::vector<Transit> base;
};

class OrderFunction {
public:
    OrderFunction(OrderParameters p, std::optional<EnergyFunction> base, FiberEnergy plus, FiberEnergy minus)
        : p_(p), base_(std::move(base)), plus_(std::move(plus)), minus_(std::move(minus)) {
        p_.validate();
    }

    const OrderParameters& parameters() const { return p_; }
    const FiberEnergy& plus() const { return plus_; }
    const FiberEnergy& minus() const { return minus_; }
    bool has_base() const { return base_.has_value(); }

    OrderLocal local(const SigmaPoint& q) const {
        OrderLocal l{plus_.transit(q), minus_.transit(q), {}};
        if (base_) l.base = base_->transits(q.x);
        return l;
    }

    // E and its derivative along the unit lift, at Phi~^shift of the point.
    ValueAndFlowDerivative sphere(const OrderLocal& l, double shift = 0.0) const {
        auto sh = [shift](Transit t) {
            t.exit -= shift;
            t.entry -= shift;
            return t;
        };
        const FlowAverage& ap = plus_.average();
        const FlowAverage& am = minus_.average();
        Transit tp = sh(l.plus), tm = sh(l.minus);
        ValueAndFlowDerivative r;
        r.value = p_.combine(0.0, ap.value(tp), am.value(tm));
        r.lie = (p_.u - p_.n0) * ap.flow_derivative(tp) + (p_.n0 - p_.s) * am.flow_derivative(tm);
        if (base_) {
            std::vector<Transit> tb;
            for (const auto& t : l.base) tb.push_back(sh(t));
            ValueAndFlowDerivative b = base_->evaluate_from(tb);
            r.value -= b.value;
            r.lie -= b.lie;
        }
        return r;
    }
    ValueAndFlowDerivative sphere(const SigmaPoint& q) const { return sphere(local(q)); }

    // m(x, xi) for a covector of norm r at fibre angle theta.
    double value(const SigmaPoint& q, double r) const {
        double c = order_cutoff(r * r);
        return c == 0.0 ? 0.0 : c * sphere(q).value;
    }

private:
    OrderParameters p_;
    std::optional<EnergyFunction> base_;
    FiberEnergy plus_, minus_;
};

struct ConeBoundReport {
    bool passed = true;
    int samples_s = 0, samples_o = 0, samples_u = 0;
    int violations = 0;
    double min_on_s = std::numeric_limits<double>::infinity();   // want >= s/4
    double max_on_u = -std::numeric_limits<double>::infinity();  // want <= u/2
    double min_on_o = std::numeric_limits<double>::infinity();   // want >= n0/2
    double max_on_o = -std::numeric_limits<double>::infinity();  // want <= n0
    double min_value = std::numeric_limits<double>::infinity();
    double max_value = -std::numeric_limits<double>::infinity();
};

namespace detail {

// Point of S*M within `r` of p, uniform in a box.
inline SigmaPoint jitter(const SigmaPoint& p, int dim, double r, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-r, r);
    SigmaPoint q = p;
    q.x = wrap_point(Vec2(p.x + Vec2(u(rng), dim == 2 ? u(rng) : 0.0)), dim);
    q.theta = dim == 2 ? wrap01(p.theta + u(rng)) : p.theta;
    return q;
}

inline SigmaPoint random_sphere_point(int dim, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (dim == 1) return {Vec2(u(rng), 0.0), u(rng) < 0.5 ? 0.0 : 0.5};
    return {Vec2(u(rng), u(rng)), u(rng)};
}

// Stratified S*M samples: a third uniform, the rest near the cone seeds.
inline std::vector<SigmaPoint> stratified_samples(const ConeRegions& cones, int dim, int count, std::mt19937_64& rng) {
    std::vector<SigmaPoint> out;
    std::vector<std::vector<SigmaPoint>> seeds;
    for (ConeRegion r : {ConeRegion::s, ConeRegion::u, ConeRegion::o}) {
        auto sd = cones.seeds(r);
        if (!sd.empty()) seeds.push_back(std::move(sd));
    }
    int uniform = seeds.empty() ? count : count / 3;
    for (int i = 0; i < uniform; ++i) out.push_back(random_sphere_point(dim, rng));
    for (int i = uniform; i < count; ++i) {
        const auto& sd = seeds[i % seeds.size()];
        std::uniform_int_distribution<std::size_t> pick(0, sd.size() - 1);
        out.push_back(jitter(sd[pick(rng)], dim, 2.0 * cones.radius(), rng));
    }
    return out;
}

}  // namespace detail

// Cone bounds of the order function on samples with |xi| >= 1:
// m >= s/4 on N^s, n0/2 <= m <= n0 on N^o, m <= u/2 on N^u.
inline ConeBoundReport check_cone_bounds(const OrderFunction& m, const ConeRegions& cones, int samples,
                                         std::uint64_t seed = 5) {
    ConeBoundReport rep;
    const auto& p = m.parameters();
    // Round-off allowance; the neutral-cone bounds collapse to m = 0 when n0 = 0.
    const double tol = 1e-9 * (p.s - p.u);
    std::mt19937_64 rng(seed);
    const int dim = cones.clouds().dim;
    for (const auto& q : detail::stratified_samples(cones, dim, samples, rng)) {
        ConeRegion r = cones.classify(q);
        double e = m.sphere(q).value;
        rep.min_value = std::min(rep.min_value, e);
        rep.max_value = std::max(rep.max_value, e);
        switch (r) {
            case ConeRegion::s:
                ++rep.samples_s;
                rep.min_on_s = std::min(rep.min_on_s, e);
                if (e < p.s / 4.0 - tol) ++rep.violations;
                break;
            case ConeRegion::u:
                ++rep.samples_u;
                rep.max_on_u = std::max(rep.max_on_u, e);
                if (e > p.u / 2.0 + tol) ++rep.violations;
                break;
            case ConeRegion::o:
                ++rep.samples_o;
                rep.min_on_o = std::min(rep.min_on_o, e);
                rep.max_on_o = std::max(rep.max_on_o, e);
                if (e < p.n0 / 2.0 - tol || e > p.n0 + tol) ++rep.violations;
                break;
            default: break;
        }
    }
    rep.passed = rep.violations == 0;
    return rep;
}

struct OrderOptions {
    double fatten = 0.05;        // eps of the fibre energies
    double cone_fraction = 0.5;  // cone radius as a fraction of fatten
    int fiber_grid = 16;         // grid used to pick the averaging time of E+-
    int fiber_theta = 16;
    double base_eps = 0.1;
    int base_grid = 32;
    int sigma_budget = 800;
    int cone_samples = 2000;
    std::uint64_t seed = 5;
};

struct OrderBuild {
    OrderFunction order;
    ConeRegions cones;
    SigmaClouds clouds;
    FiberEnergyReport plus_report, minus_report;
    std::optional<EnergyReport> base_report;
    ConeBoundReport bounds;
};

// Builds E_base, E+ = couple (Sigma_uo, Sigma_s) and E- = couple (Sigma_u, Sigma_so)
// and checks the cone bounds. Throws when a bound fails.
inline OrderBuild build_order_function(const OrderParameters& p, const SmaleGraph& graph, const VectorFieldSpec& spec,
                                       const OrderOptions& opt = {}) {
    p.validate();
    SigmaClouds clouds = sigma_sets(graph, spec, opt.sigma_budget);
    FiberEnergyOptions fo;
    fo.fatten = opt.fatten;
    fo.grid_res = opt.fiber_grid;
    fo.theta_res = opt.fiber_theta;
    FiberEnergyResult plus = fiber_energy(spec, clouds.s, clouds.uo, fo);
    FiberEnergyResult minus = fiber_energy(spec, clouds.so, clouds.u, fo);
    std::optional<EnergyFunction> base;
    std::optional<EnergyReport> base_report;
    if (p.n0 > 0.0 && graph.sets.size() >= 2) {
        EnergyOptions eo;
        eo.grid_res = opt.base_grid;
        GlobalEnergy g = global_energy(graph, spec, p.levels(int(graph.sets.size())), opt.base_eps, eo);
        base = g.function;
        base_report = g.report;
    }
    OrderFunction order(p, base, plus.energy, minus.energy);
    ConeRegions cones(clouds, opt.cone_fraction * opt.fatten);
    ConeBoundReport bounds = check_cone_bounds(order, cones, opt.cone_samples, opt.seed);
    if (!bounds.passed)
        throw CheckFailure("order function cone bounds violated on " + std::to_string(bounds.violations) +
                           " samples; rebuild the energies with a smaller eps");
    return {order, cones, clouds, plus.report, minus.report, base_report, bounds};
}

}  // namespace axioma

#endif
