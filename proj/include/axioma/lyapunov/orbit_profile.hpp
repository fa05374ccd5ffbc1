#ifndef AXIOMA_LYAPUNOV_ORBIT_PROFILE_HPP
#define AXIOMA_LYAPUNOV_ORBIT_PROFILE_HPP

// Single-trajectory summaries used by the filtration masks and the energy:
// per-unit-time minimal distances to the basic sets, and last-visit times of
// balls around them with sub-step crossing refinement.

#include <limits>
#include <memory>
#include <vector>

#include "axioma/flow/integrators.hpp"
#include "axioma/invariant/basic_sets.hpp"

namespace axioma {

struct OrbitContext {
    VectorFieldSpec spec;
    std::vector<BasicSetRecord> sets;
    double step = default_step;
    double horizon = 60.0;
    // A trajectory is considered absorbed at a fixed point once this close.
    double absorb = 1e-8;
    // Same for periodic orbits; 0 keeps orbit runs going to the horizon.
    double absorb_orbit = 0.0;
    // Distances to periodic orbits are refreshed every `orbit_stride` steps.
    int orbit_stride = 10;
    // One index per set; refers into `sets`, so the context is not copied.
    std::vector<SetProximity> proximity;

    double distance(std::size_t c, const Vec2& x) const {
        return proximity.empty() ? distance_to_set(sets[c], x) : proximity[c].distance(x);
    }
    bool near(std::size_t c, const Vec2& x, double r) const {
        return proximity.empty() ? distance_to_set(sets[c], x) < r : proximity[c].within(x, r);
    }
};

using OrbitContextPtr = std::shared_ptr<const OrbitContext>;

inline OrbitContextPtr make_orbit_context(const VectorFieldSpec& spec, std::vector<BasicSetRecord> sets,
                                          double horizon = 60.0, double step = default_step,
                                          double absorb_orbit = 0.0) {
    auto c = std::make_shared<OrbitContext>();
    c->spec = spec;
    c->sets = std::move(sets);
    c->horizon = horizon;
    c->step = step;
    c->absorb_orbit = absorb_orbit;
    for (const auto& k : c->sets) c->proximity.emplace_back(k);
    return c;
}

struct Trajectory {
    double direction = 1.0;
    double h = default_step;  // signed step
    std::vector<Vec2> x;      // unwrapped positions at times k*h
    std::vector<Vec2> v;      // field values there
    int absorbed_in = -1;     // index of the fixed point the run ended at, if any

    double time(std::size_t k) const { return double(k) * h; }
    double end_time() const { return time(x.size() - 1); }

    // Cubic Hermite position between samples k and k+1, s in [0,1].
    Vec2 hermite(std::size_t k, double s) const {
        double s2 = s * s, s3 = s2 * s;
        double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s, h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
        return h00 * x[k] + h10 * h * v[k] + h01 * x[k + 1] + h11 * h * v[k + 1];
    }
};

// Traces in direction `dir` (+1 or -1) up to the horizon or absorption.
inline Trajectory trace_trajectory(const OrbitContext& ctx, const Vec2& x0, double dir, double t_max = -1.0) {
    Trajectory tr;
    tr.direction = dir;
    tr.h = dir * ctx.step;
    if (t_max < 0.0) t_max = ctx.horizon;
    int n = static_cast<int>(std::ceil(t_max / ctx.step - 1e-9));
    const VectorFieldSpec& spec = ctx.spec;
    Vec2 x = x0;
    tr.x.reserve(std::min(n + 1, 4096));
    tr.v.reserve(std::min(n + 1, 4096));
    auto absorbed = [&](const Vec2& y) {
        for (std::size_t c = 0; c < ctx.sets.size(); ++c) {
            const auto& k = ctx.sets[c];
            if (!k.is_orbit() && torus_distance(k.location.c, y, spec.dim) < ctx.absorb) return int(c);
            if (k.is_orbit() && ctx.absorb_orbit > 0.0 && ctx.near(c, y, ctx.absorb_orbit)) return int(c);
        }
        return -1;
    };
    for (int i = 0;; ++i) {
        tr.x.push_back(x);
        tr.v.push_back(evaluate_field(spec, x).v);
        if ((tr.absorbed_in = absorbed(x)) >= 0 || i == n) break;
        x = rk4_step(spec, x, tr.h);
    }
    return tr;
}

inline std::vector<double> distances_to_sets(const OrbitContext& ctx, const Vec2& x) {
    std::vector<double> d(ctx.sets.size());
    for (std::size_t c = 0; c < ctx.sets.size(); ++c) d[c] = ctx.distance(c, x);
    return d;
}

// Minimal distance to each set over consecutive unit-time windows.
// window[k][c] covers |t| in [k, k+1]; `tail[c]` covers |t| >= m.
struct DistanceProfile {
    std::vector<std::vector<double>> window;
    std::vector<double> tail;
    std::vector<double> overall;
};

inline DistanceProfile distance_profile(const OrbitContext& ctx, const Trajectory& tr, int m) {
    const std::size_t ns = ctx.sets.size();
    const double inf = std::numeric_limits<double>::infinity();
    DistanceProfile p;
    p.window.assign(m, std::vector<double>(ns, inf));
    p.tail.assign(ns, inf);
    p.overall.assign(ns, inf);
    const int per_unit = static_cast<int>(std::lround(1.0 / ctx.step));
    std::vector<double> last(ns, inf);
    for (std::size_t k = 0; k < tr.x.size(); ++k) {
        for (std::size_t c = 0; c < ns; ++c) {
            const auto& set = ctx.sets[c];
            if (set.is_orbit() && k % ctx.orbit_stride != 0 && k + 1 != tr.x.size()) continue;
            last[c] = ctx.distance(c, tr.x[k]);
            int w = static_cast<int>(k) / per_unit;
            auto upd = [&](double& slot) { slot = std::min(slot, last[c]); };
            if (w < m) upd(p.window[w][c]);
            // Window boundaries belong to both neighbours.
            if (k % per_unit == 0 && w >= 1 && w - 1 < m) upd(p.window[w - 1][c]);
            if (w >= m) upd(p.tail[c]);
            upd(p.overall[c]);
        }
    }
    // Beyond the end of the run the orbit sits at its absorbing point.
    if (tr.absorbed_in >= 0) {
        int endw = static_cast<int>(tr.x.size() - 1) / per_unit;
        std::vector<double> rest = distances_to_sets(ctx, ctx.sets[tr.absorbed_in].location.c);
        for (std::size_t c = 0; c < ns; ++c) {
            for (int w = endw + 1; w < m; ++w) p.window[w][c] = rest[c];
            p.tail[c] = std::min(p.tail[c], rest[c]);
            p.overall[c] = std::min(p.overall[c], rest[c]);
        }
    }
    return p;
}

// Backward and forward runs of one point joined into a single time-ordered
// run; index k sits at time k*h for k in [first(), last()].
struct JoinedRun {
    const Trajectory& fwd;
    const Trajectory& bwd;

    long first() const { return -static_cast<long>(bwd.x.size()) + 1; }
    long last() const { return static_cast<long>(fwd.x.size()) - 1; }
    double h() const { return fwd.h; }
    const Vec2& point(long k) const { return k >= 0 ? fwd.x[k] : bwd.x[-k]; }
    // Position between samples k and k+1, s in [0,1].
    Vec2 between(long k, double s) const { return k >= 0 ? fwd.hermite(k, s) : bwd.hermite(-k - 1, 1.0 - s); }

    // Time where the predicate changes on segment (k, k+1), starting from `at_k`.
    template <class Inside>
    double crossing(long k, bool at_k, Inside&& inside) const {
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 44; ++it) {
            double mid = 0.5 * (lo + hi);
            if (inside(between(k, mid)) == at_k) lo = mid;
            else hi = mid;
        }
        return (double(k) + 0.5 * (lo + hi)) * h();
    }
};

// Last time the orbit lies in a region: +inf if it is still inside at the end
// of the forward run, -inf if it is never inside.
template <class Inside>
double last_time_inside(const JoinedRun& run, Inside&& inside) {
    for (long k = run.last(); k >= run.first(); --k) {
        if (!inside(run.point(k))) continue;
        if (k == run.last()) return std::numeric_limits<double>::infinity();
        return run.crossing(k, true, inside);
    }
    return -std::numeric_limits<double>::infinity();
}

// First time after t0 the orbit lies in a region; +inf if never.
template <class Inside>
double first_time_inside_after(const JoinedRun& run, double t0, Inside&& inside) {
    long k0 = std::max(run.first(), static_cast<long>(std::floor(t0 / run.h())));
    for (long k = k0 + 1; k <= run.last(); ++k) {
        if (!inside(run.point(k))) continue;
        double t = run.crossing(k - 1, false, inside);
        return std::max(t, t0);
    }
    return std::numeric_limits<double>::infinity();
}

template <class Inside>
double last_time_inside(const Trajectory& fwd, const Trajectory& bwd, Inside&& inside) {
    return last_time_inside(JoinedRun{fwd, bwd}, inside);
}

}  // namespace axioma

#endif
