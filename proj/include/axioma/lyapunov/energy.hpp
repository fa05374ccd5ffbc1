#ifndef AXIOMA_LYAPUNOV_ENERGY_HPP
#define AXIOMA_LYAPUNOV_ENERGY_HPP

// Energy functions by flow averaging. Along an orbit that leaves the repeller
// region V- for the last time at L and then first enters the attractor region
// V+ at P, the bump is the transit coordinate u(t) = clamp((t - L)/(P - L)).
// It is nondecreasing in t, so the time average over [-T, T] has a
// nonnegative flow derivative, and both are closed forms in (L, P).

#include <cmath>
#include <limits>
#include <vector>

#include "axioma/lyapunov/filtration.hpp"

namespace axioma {

// Last exit from V- and first later entry into V+, in flow time from x.
struct Transit {
    double exit = -std::numeric_limits<double>::infinity();
    double entry = std::numeric_limits<double>::infinity();
};

template <class InMinus, class InPlus>
Transit find_transit(const JoinedRun& run, InMinus&& in_minus, InPlus&& in_plus) {
    Transit tr;
    tr.exit = last_time_inside(run, in_minus);
    if (std::isfinite(tr.exit)) tr.entry = first_time_inside_after(run, tr.exit, in_plus);
    return tr;
}

// m = (1/2T) int_{-T}^{T} u(t) dt and its derivative along the flow.
struct FlowAverage {
    double T = 1e-3;

    // Antiderivative of clamp(s, 0, 1) vanishing for s <= 0.
    static double ramp_integral(double s) {
        if (s <= 0.0) return 0.0;
        if (s <= 1.0) return 0.5 * s * s;
        return s - 0.5;
    }
    static double ramp(double s) { return std::clamp(s, 0.0, 1.0); }

    double value(const Transit& t) const {
        if (t.exit == std::numeric_limits<double>::infinity()) return 0.0;
        if (t.exit == -std::numeric_limits<double>::infinity()) return 1.0;
        if (!std::isfinite(t.entry)) return 0.0;
        double D = t.entry - t.exit;
        return D / (2.0 * T) * (ramp_integral((T - t.exit) / D) - ramp_integral((-T - t.exit) / D));
    }
    double flow_derivative(const Transit& t) const {
        if (!std::isfinite(t.exit) || !std::isfinite(t.entry)) return 0.0;
        double D = t.entry - t.exit;
        return (ramp((T - t.exit) / D) - ramp((-T - t.exit) / D)) / (2.0 * T);
    }
};

struct AveragingOptions {
    int grid_res = 64;
    double horizon = 60.0;
    // Adaptive T: this fraction of the shortest transit time seen on the grid.
    double smoothing_fraction = 0.05;
};

namespace detail {

// T as a fixed fraction of the shortest finite transit among the samples.
inline double smoothing_time(const std::vector<Transit>& samples, double fraction) {
    double shortest = std::numeric_limits<double>::infinity();
    for (const auto& t : samples)
        if (std::isfinite(t.exit) && std::isfinite(t.entry)) shortest = std::min(shortest, t.entry - t.exit);
    if (!std::isfinite(shortest)) return 1e-3;
    return std::max(1e-5, fraction * shortest);
}

}  // namespace detail

// Averaged energy for a repeller/attractor pair: 0 on orbits that stay in V-,
// 1 on orbits that never visit V-, rising across the transit from V- to V+.
// T <= 0 picks T from the transit times on the grid.
inline ScalarFieldGrid averaged_energy(const RegionMask& v_minus, const RegionMask& v_plus, const VectorFieldSpec& spec,
                                       double T, const AveragingOptions& opt = {}) {
    Grid g{spec.dim, opt.grid_res};
    {
        const auto& a = v_minus.weights();
        const auto& b = v_plus.weights();
        for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i)
            if (a[i] > 0.5 && b[i] > 0.5) throw PreconditionError("averaged_energy: V- and V+ overlap");
    }
    auto ctx = make_orbit_context(spec, {}, opt.horizon);
    auto transit = [ctx, v_minus, v_plus](const Vec2& x) {
        Trajectory f = trace_trajectory(*ctx, x, 1.0);
        Trajectory b = trace_trajectory(*ctx, x, -1.0);
        const int n = ctx->spec.dim;
        return find_transit(
            JoinedRun{f, b}, [&](const Vec2& y) { return v_minus.contains(wrap_point(y, n)); },
            [&](const Vec2& y) { return v_plus.contains(wrap_point(y, n)); });
    };
    FlowAverage avg{T};
    if (!(T > 0.0)) {
        std::vector<Transit> samples;
        for (std::size_t i = 0; i < g.size(); ++i) samples.push_back(transit(g.point(i)));
        avg.T = detail::smoothing_time(samples, opt.smoothing_fraction);
    }
    return ScalarFieldGrid(g, [avg, transit](const Vec2& x) {
        Transit t = transit(x);
        return ValueAndFlowDerivative{avg.value(t), avg.flow_derivative(t)};
    });
}

struct EnergyOptions {
    int grid_res = 64;
    // Radius of the neighbourhoods N_i, as a fraction of eps. The couples use
    // these balls as their repeller and attractor regions.
    double neighborhood_fraction = 0.5;
    double horizon = 60.0;
    double smoothing_fraction = 0.05;
    // Fixed averaging time; <= 0 selects it from the grid transits.
    double T = 0.0;
};

// E = l_1 + sum_j (l_j - l_{j-1}) E_j, where E_j is the averaged energy of the
// couple (balls around the sets before position j, balls around the rest).
class EnergyFunction {
public:
    EnergyFunction() = default;
    EnergyFunction(OrbitContextPtr ctx, std::vector<int> order, std::vector<double> levels, double ball, FlowAverage avg)
        : ctx_(std::move(ctx)), order_(std::move(order)), levels_(std::move(levels)), ball_(ball), avg_(avg) {}

    // Transits of the couples j = 2..N (index j-2).
    std::vector<Transit> transits(const Vec2& x) const {
        const int N = static_cast<int>(order_.size());
        std::vector<Transit> out;
        if (N < 2) return out;
        Trajectory f = trace_trajectory(*ctx_, x, 1.0);
        Trajectory b = trace_trajectory(*ctx_, x, -1.0);
        JoinedRun run{f, b};
        // Which ball (position in the order) each sample lies in, or -1.
        auto ball_of = [&](const Vec2& y) {
            for (int p = 0; p < N; ++p)
                if (ctx_->near(order_[p], y, ball_)) return p;
            return -1;
        };
        for (int j = 2; j <= N; ++j) {
            auto in_minus = [&](const Vec2& y) {
                int p = ball_of(y);
                return p >= 0 && p < j - 1;
            };
            auto in_plus = [&](const Vec2& y) { return ball_of(y) >= j - 1; };
            out.push_back(find_transit(run, in_minus, in_plus));
        }
        return out;
    }
    ValueAndFlowDerivative evaluate_from(const std::vector<Transit>& t) const {
        ValueAndFlowDerivative r{levels_.front(), 0.0};
        for (std::size_t j = 0; j < t.size(); ++j) {
            double w = levels_[j + 1] - levels_[j];
            r.value += w * avg_.value(t[j]);
            r.lie += w * avg_.flow_derivative(t[j]);
        }
        return r;
    }
    ValueAndFlowDerivative evaluate(const Vec2& x) const { return evaluate_from(transits(x)); }

    const FlowAverage& average() const { return avg_; }
    void set_average(FlowAverage a) { avg_ = a; }
    const std::vector<double>& levels() const { return levels_; }
    const std::vector<int>& order() const { return order_; }
    const OrbitContext& context() const { return *ctx_; }
    double ball_radius() const { return ball_; }

private:
    OrbitContextPtr ctx_;
    std::vector<int> order_;
    std::vector<double> levels_;
    double ball_ = 0.05;
    FlowAverage avg_;
};

struct EnergyReport {
    double T = 0.0;
    double min_lie = 0.0;          // over all grid samples
    double eta = 0.0;              // min L_V E over grid samples outside the N_i
    double max_pin_error = 0.0;    // max |E - l_i| / (l_N - l_1) over N_i samples
    double max_level_error = 0.0;  // max |E(K_i) - l_i|
    double neighborhood_radius = 0.0;
    std::size_t outside_samples = 0;
    std::size_t pinned_samples = 0;
};

struct GlobalEnergy {
    EnergyFunction function;
    ScalarFieldGrid field;
    EnergyReport report;
    std::vector<int> order;
    std::vector<double> levels;
};

namespace detail {

// Sample points of N_i: grid points inside plus rings around each set.
inline std::vector<std::pair<int, Vec2>> neighborhood_samples(const OrbitContext& ctx, const std::vector<int>& order,
                                                              const Grid& g, double r) {
    std::vector<std::pair<int, Vec2>> out;
    for (int pos = 0; pos < static_cast<int>(order.size()); ++pos) {
        const auto& k = ctx.sets[order[pos]];
        for (std::size_t i = 0; i < g.size(); ++i)
            if (distance_to_set(k, g.point(i)) < r) out.emplace_back(pos, g.point(i));
        std::vector<Vec2> centres = k.is_orbit() ? k.orbit : std::vector<Vec2>{k.location.c};
        // Orbits get 8 centres with 8 directions each, fixed points 24 directions.
        const std::size_t stride = std::max<std::size_t>(1, centres.size() / 8);
        const int dirs = g.dim == 1 ? 2 : (k.is_orbit() ? 8 : 24);
        for (std::size_t c = 0; c < centres.size(); c += stride)
            for (double f : {0.3, 0.6, 0.9, 0.999})
                for (int a = 0; a < dirs; ++a) {
                    Vec2 d = g.dim == 2 ? Vec2(std::cos(two_pi * a / dirs), std::sin(two_pi * a / dirs))
                                        : Vec2(a == 0 ? 1.0 : -1.0, 0.0);
                    Vec2 p = wrap_point(centres[c] + f * r * d, g.dim);
                    if (distance_to_set(k, p) < r) out.emplace_back(pos, p);
                }
    }
    return out;
}

inline bool outside_all(const OrbitContext& ctx, const Vec2& x, double r) {
    for (std::size_t c = 0; c < ctx.sets.size(); ++c)
        if (ctx.near(c, x, r)) return false;
    return true;
}

}  // namespace detail

// Global energy with E = levels[k] on the k-th set of the order. The returned
// neighbourhoods N_i are the balls of radius neighborhood_fraction * eps.
inline GlobalEnergy global_energy(const SmaleGraph& graph, const VectorFieldSpec& spec, std::vector<double> levels,
                                  double eps, const EnergyOptions& opt = {}) {
    if (graph.order.size() != graph.sets.size())
        throw PreconditionError("global_energy needs an acyclic graph with a total order");
    if (levels.size() != graph.order.size()) throw PreconditionError("one level per basic set is required");
    for (std::size_t i = 1; i < levels.size(); ++i)
        if (!(levels[i] > levels[i - 1])) throw PreconditionError("levels must increase along the order");
    if (!(eps > 0.0)) throw PreconditionError("energy eps must be positive");

    GlobalEnergy out;
    out.order = detail::order_indices(graph);
    out.levels = levels;
    // Runs that have converged onto a periodic orbit stay in its ball for good.
    auto ctx = make_orbit_context(spec, graph.sets, opt.horizon, default_step, 1e-7);
    Grid g{spec.dim, opt.grid_res};
    const double rN = opt.neighborhood_fraction * eps;
    FlowAverage avg{opt.T};
    EnergyFunction fn(ctx, out.order, levels, rN, avg);

    std::vector<std::size_t> outside;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (detail::outside_all(*ctx, g.point(i), rN)) outside.push_back(i);
    if (!(opt.T > 0.0)) {
        std::vector<Transit> samples;
        for (std::size_t i : outside)
            for (const auto& t : fn.transits(g.point(i))) samples.push_back(t);
        avg.T = detail::smoothing_time(samples, opt.smoothing_fraction);
    }
    fn.set_average(avg);
    out.function = fn;
    out.field = ScalarFieldGrid(g, [fn](const Vec2& x) { return fn.evaluate(x); });

    auto& rep = out.report;
    rep.T = avg.T;
    rep.neighborhood_radius = rN;
    rep.min_lie = *std::min_element(out.field.lie_values().begin(), out.field.lie_values().end());
    rep.eta = std::numeric_limits<double>::infinity();
    for (std::size_t i : outside) rep.eta = std::min(rep.eta, out.field.lie_values()[i]);
    rep.outside_samples = outside.size();
    const double span = levels.back() - levels.front();
    for (const auto& [pos, p] : detail::neighborhood_samples(*ctx, out.order, g, rN)) {
        double e = fn.evaluate(p).value;
        rep.max_pin_error = std::max(rep.max_pin_error, std::abs(e - levels[pos]) / (span > 0 ? span : 1.0));
        ++rep.pinned_samples;
    }
    for (int pos = 0; pos < static_cast<int>(out.order.size()); ++pos) {
        const auto& k = ctx->sets[out.order[pos]];
        Vec2 p = k.is_orbit() ? k.orbit.front() : k.location.c;
        rep.max_level_error = std::max(rep.max_level_error, std::abs(fn.evaluate(p).value - levels[pos]));
    }
    return out;
}

}  // namespace axioma

#endif
