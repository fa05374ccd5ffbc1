#ifndef AXIOMA_LYAPUNOV_FILTRATION_HPP
#define AXIOMA_LYAPUNOV_FILTRATION_HPP

// Region masks, filtrations adapted to the Smale order, and the unrevisited
// check for the time-1 map.

#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "axioma/invariant/smale_graph.hpp"
#include "axioma/lyapunov/grid.hpp"
#include "axioma/lyapunov/orbit_profile.hpp"

namespace axioma {

// Membership of x, phi(x), ..., phi^m(x) for the flow the mask was built with.
using IterateMembership = std::vector<char>;

class RegionMask {
public:
    using Iterates = std::function<IterateMembership(const Vec2&, int)>;

    RegionMask() = default;
    RegionMask(Grid g, VectorFieldSpec flow, Iterates f, std::string label = {})
        : grid_(g), flow_(std::move(flow)), iter_(std::move(f)), label_(std::move(label)) {}

    static RegionMask whole(Grid g, const VectorFieldSpec& flow) {
        return RegionMask(g, flow, [](const Vec2&, int m) { return IterateMembership(m + 1, 1); }, "M");
    }
    static RegionMask empty(Grid g, const VectorFieldSpec& flow) {
        return RegionMask(g, flow, [](const Vec2&, int m) { return IterateMembership(m + 1, 0); }, "empty");
    }
    // Pointwise predicate; iterates are found by integrating the time-1 map.
    static RegionMask from_predicate(Grid g, const VectorFieldSpec& flow, std::function<bool(const Vec2&)> pred,
                                     std::string label = {}) {
        auto f = [flow, pred](const Vec2& x, int m) {
            IterateMembership out(m + 1);
            TorusPoint y(flow.dim, x);
            for (int k = 0; k <= m; ++k) {
                out[k] = pred(y.c) ? 1 : 0;
                if (k < m) y = integrate_flow(flow, y, 1.0);
            }
            return out;
        };
        return RegionMask(g, flow, f, std::move(label));
    }

    const Grid& grid() const { return grid_; }
    const VectorFieldSpec& flow() const { return flow_; }
    const std::string& label() const { return label_; }

    bool contains(const Vec2& x) const { return iter_(x, 0)[0] != 0; }
    IterateMembership iterates(const Vec2& x, int m) const { return iter_(x, m); }

    // Cell weights in {0,1}; the open set is {weight > 1/2}.
    const std::vector<double>& weights() const {
        if (weights_.size() != grid_.size()) {
            weights_.resize(grid_.size());
            for (std::size_t i = 0; i < grid_.size(); ++i) weights_[i] = contains(grid_.point(i)) ? 1.0 : 0.0;
        }
        return weights_;
    }
    std::size_t member_cells() const {
        std::size_t n = 0;
        for (double w : weights()) n += w > 0.5;
        return n;
    }

    RegionMask complement() const {
        auto f = iter_;
        return RegionMask(grid_, flow_, [f](const Vec2& x, int m) {
            auto a = f(x, m);
            for (auto& c : a) c = !c;
            return a;
        }, "not(" + label_ + ")");
    }
    RegionMask intersect(const RegionMask& o) const { return combine(o, true); }
    RegionMask unite(const RegionMask& o) const { return combine(o, false); }

    void write_csv(std::ostream& os) const {
        os << "# dim=" << grid_.dim << " res=" << grid_.res << " mask=" << label_ << "\n";
        os << (grid_.dim == 2 ? "x,y,weight\n" : "x,weight\n");
        const auto& w = weights();
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            Vec2 p = grid_.point(i);
            os << p[0] << ',';
            if (grid_.dim == 2) os << p[1] << ',';
            os << w[i] << '\n';
        }
    }

private:
    RegionMask combine(const RegionMask& o, bool both) const {
        auto f = iter_, g = o.iter_;
        std::string l = (both ? "and(" : "or(") + label_ + "," + o.label_ + ")";
        return RegionMask(grid_, flow_, [f, g, both](const Vec2& x, int m) {
            auto a = f(x, m);
            if (both && !a[0] && m == 0) return a;
            auto b = g(x, m);
            for (int k = 0; k <= m; ++k) a[k] = both ? (a[k] && b[k]) : (a[k] || b[k]);
            return a;
        }, l);
    }

    Grid grid_;
    VectorFieldSpec flow_;
    Iterates iter_;
    std::string label_;
    mutable std::vector<double> weights_;
};

// Points whose forward orbit comes within `radius` of one of the listed sets
// (indices into ctx.sets). The set is phi^{-1}-stable by construction.
inline RegionMask entering_mask(Grid g, OrbitContextPtr ctx, std::vector<int> targets, double radius,
                                std::string label = {}) {
    auto f = [ctx, targets, radius](const Vec2& x, int m) {
        Trajectory tr = trace_trajectory(*ctx, x, 1.0, std::max(ctx->horizon, double(m) + ctx->horizon));
        DistanceProfile p = distance_profile(*ctx, tr, m);
        IterateMembership out(m + 1, 0);
        double suffix = 1e300;
        for (int c : targets) suffix = std::min(suffix, p.tail[c]);
        for (int k = m; k >= 0; --k) {
            if (k < m)
                for (int c : targets) suffix = std::min(suffix, p.window[k][c]);
            out[k] = suffix < radius;
        }
        return out;
    };
    return RegionMask(g, ctx->spec, f, std::move(label));
}

// Sink-type disk of radius r around a point.
inline RegionMask disk_mask(Grid g, const VectorFieldSpec& flow, const Vec2& centre, double r) {
    int n = flow.dim;
    return RegionMask::from_predicate(g, flow, [=](const Vec2& x) { return torus_distance(centre, x, n) < r; },
                                      "disk");
}

struct UnrevisitedWitness {
    Vec2 x = Vec2::Zero();
    int left_at = 0;      // first k with phi^k(x) outside
    int returned_at = 0;  // first later k with phi^k(x) back inside
};

struct UnrevisitedResult {
    bool pass = true;
    std::size_t samples = 0;
    std::optional<UnrevisitedWitness> witness;
};

inline std::optional<UnrevisitedWitness> revisit_in(const IterateMembership& it, const Vec2& x) {
    int left = -1;
    for (int k = 1; k < static_cast<int>(it.size()); ++k) {
        if (!it[k] && left < 0) left = k;
        if (it[k] && left >= 0) return UnrevisitedWitness{x, left, k};
    }
    return std::nullopt;
}

// Samples points of the mask (uniformly inside member cells and their
// neighbours, rejecting non-members) and checks that no time-1 orbit of
// `spec` leaves the mask and comes back within m_max steps.
inline UnrevisitedResult check_unrevisited(const RegionMask& mask, const VectorFieldSpec& spec, int m_max,
                                           std::size_t sample_count, unsigned seed = 7) {
    if (m_max < 1) throw PreconditionError("check_unrevisited needs horizon m_max >= 1");
    UnrevisitedResult res;
    const Grid& g = mask.grid();
    const auto& w = mask.weights();
    // Cells near the mask.
    std::vector<std::size_t> cand;
    const int r = g.res;
    for (std::size_t i = 0; i < g.size(); ++i) {
        bool near = false;
        if (g.dim == 1) {
            for (int d = -1; d <= 1 && !near; ++d) near = w[(i + r + d) % r] > 0.5;
        } else {
            int a = static_cast<int>(i) / r, b = static_cast<int>(i) % r;
            for (int da = -1; da <= 1 && !near; ++da)
                for (int db = -1; db <= 1 && !near; ++db) near = w[((a + da + r) % r) * r + (b + db + r) % r] > 0.5;
        }
        if (near) cand.push_back(i);
    }
    if (cand.empty()) return res;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, cand.size() - 1);
    std::uniform_real_distribution<double> jit(-0.5, 0.5);
    const bool fast = same_field(mask.flow(), spec);
    std::size_t attempts = 0;
    while (res.samples < sample_count && attempts < 50 * sample_count) {
        ++attempts;
        Vec2 x = g.point(cand[pick(rng)]);
        x[0] = wrap01(x[0] + jit(rng) * g.spacing());
        if (g.dim == 2) x[1] = wrap01(x[1] + jit(rng) * g.spacing());
        IterateMembership it;
        if (fast) {
            it = mask.iterates(x, m_max);
            if (!it[0]) continue;
        } else {
            if (!mask.contains(x)) continue;
            it.assign(m_max + 1, 0);
            it[0] = 1;
            TorusPoint y(spec.dim, x);
            for (int k = 1; k <= m_max; ++k) {
                y = integrate_flow(spec, y, 1.0);
                it[k] = mask.contains(y.c);
            }
        }
        ++res.samples;
        if (auto wit = revisit_in(it, x)) {
            res.pass = false;
            res.witness = wit;
            return res;
        }
    }
    return res;
}

struct FiltrationOptions {
    int grid_res = 48;
    // Orbits entering this fraction of eps around a set count as captured.
    double capture_fraction = 0.5;
    double horizon = 60.0;
    int shoot_count = 32;
};

struct FiltrationReport {
    bool nested = true;
    std::size_t stability_violations = 0;
    bool separates = true;
    std::vector<double> hausdorff;  // per O_j^-, j = 1..N
    std::vector<std::string> notes;
};

struct Filtration {
    OrbitContextPtr context;
    std::vector<int> order;         // set indices in the total order
    std::vector<RegionMask> minus;  // O_0^- = empty, ..., O_N^-; phi^{-1}-stable
    std::vector<RegionMask> plus;   // O_j^+ = Int((O_{N-j}^-)^c); phi-stable
    std::vector<RegionMask> cores;  // V_i = O_i^- and O_{N-i+1}^+, i = 1..N
    FiltrationReport report;

    std::size_t size() const { return order.size(); }
};

namespace detail {

inline std::vector<int> order_indices(const SmaleGraph& graph) {
    std::vector<int> idx;
    for (int id : graph.order)
        for (std::size_t c = 0; c < graph.sets.size(); ++c)
            if (graph.sets[c].id == id) idx.push_back(int(c));
    return idx;
}

// Samples of the stable manifold of a set: backward shots along its stable
// directions, plus the grid points whose forward orbit ends on it.
inline std::vector<Vec2> stable_manifold_cloud(const OrbitContext& ctx, int c, const Grid& g,
                                               const std::vector<int>& grid_limit, int shots) {
    std::vector<Vec2> pts;
    const auto& k = ctx.sets[c];
    if (k.is_orbit()) pts = k.orbit;
    else pts.push_back(k.location.c);
    if (!k.is_orbit())
        for (const Vec2& dir : k.stable_dirs)
            for (double sgn : {1.0, -1.0})
                for (int s = 0; s < shots; ++s) {
                    double off = 1e-4 * std::pow(10.0, 3.0 * s / std::max(1, shots - 1));
                    Vec2 y = k.location.c + sgn * std::min(off, 0.05) * dir;
                    Trajectory tr = trace_trajectory(ctx, y, -1.0, 5.0);
                    for (std::size_t i = 0; i < tr.x.size(); i += 20) pts.push_back(wrap_point(tr.x[i], ctx.spec.dim));
                }
    for (std::size_t i = 0; i < g.size(); ++i)
        if (grid_limit[i] == c) pts.push_back(g.point(i));
    return pts;
}

// Index of the set each grid point's forward orbit converges to (-1 if unclear).
inline std::vector<int> grid_limits(const OrbitContext& ctx, const Grid& g) {
    std::vector<int> out(g.size(), -1);
    for (std::size_t i = 0; i < g.size(); ++i) {
        Trajectory tr = trace_trajectory(ctx, g.point(i), 1.0);
        if (tr.absorbed_in >= 0) {
            out[i] = tr.absorbed_in;
            continue;
        }
        Vec2 end = wrap_point(tr.x.back(), ctx.spec.dim);
        for (std::size_t c = 0; c < ctx.sets.size(); ++c)
            if (distance_to_set(ctx.sets[c], end) < 1e-4) out[i] = int(c);
    }
    return out;
}

}  // namespace detail

// phi^{-1} filtration O_j^- = {x : the forward orbit of x comes within
// capture_fraction * eps of K_1..K_j}, its phi-stable dual, and the cores
// V_i. Post-conditions are checked on the grid.
inline Filtration build_filtration(const SmaleGraph& graph, const VectorFieldSpec& spec, double eps,
                                   const FiltrationOptions& opt = {}) {
    if (graph.order.size() != graph.sets.size())
        throw PreconditionError("filtration needs an acyclic graph with a total order");
    if (!(eps > 0.0)) throw PreconditionError("filtration eps must be positive");
    Filtration F;
    F.context = make_orbit_context(spec, graph.sets, opt.horizon);
    F.order = detail::order_indices(graph);
    const int N = static_cast<int>(F.order.size());
    Grid g{spec.dim, opt.grid_res};
    const double rho = opt.capture_fraction * eps;

    F.minus.push_back(RegionMask::empty(g, spec));
    // Every orbit accumulates on some basic set, so O_N^- is the whole torus.
    for (int j = 1; j < N; ++j) {
        std::vector<int> t(F.order.begin(), F.order.begin() + j);
        F.minus.push_back(entering_mask(g, F.context, t, rho, "O" + std::to_string(j) + "-"));
    }
    F.minus.push_back(RegionMask::whole(g, spec));
    for (int j = 0; j <= N; ++j) F.plus.push_back(F.minus[N - j].complement());
    for (int i = 1; i <= N; ++i) F.cores.push_back(F.minus[i].intersect(F.plus[N - i + 1]));

    // (i) nesting and (ii) stability on grid samples.
    auto& rep = F.report;
    std::vector<std::size_t> bad_cells;
    for (int j = 1; j <= N; ++j) {
        const auto& lo = F.minus[j - 1].weights();
        const auto& hi = F.minus[j].weights();
        for (std::size_t i = 0; i < g.size(); ++i)
            if (lo[i] > 0.5 && hi[i] < 0.5) rep.nested = false;
    }
    for (int j = 1; j < N; ++j) {
        const auto& w = F.minus[j].weights();
        for (std::size_t i = 0; i < g.size(); ++i) {
            Vec2 x = g.point(i);
            Vec2 back = integrate_flow(spec, TorusPoint(spec.dim, x), -1.0).c;
            Vec2 fwd = integrate_flow(spec, TorusPoint(spec.dim, x), 1.0).c;
            // O^- must contain phi^{-1} of its points; its complement phi of its points.
            if (w[i] > 0.5 && !F.minus[j].contains(back)) bad_cells.push_back(i);
            if (w[i] < 0.5 && F.minus[j].contains(fwd)) bad_cells.push_back(i);
        }
    }
    rep.stability_violations = bad_cells.size();
    if (!bad_cells.empty()) {
        std::ostringstream os;
        os << "filtration stability violated at " << bad_cells.size() << " grid cells:";
        for (std::size_t k = 0; k < std::min<std::size_t>(bad_cells.size(), 20); ++k) os << ' ' << bad_cells[k];
        throw CheckFailure(os.str());
    }
    // (iii) K_i inside O_i^- and away from O_{i-1}^-.
    for (int i = 1; i <= N; ++i) {
        const auto& k = F.context->sets[F.order[i - 1]];
        Vec2 p = k.is_orbit() ? k.orbit.front() : k.location.c;
        if (!F.minus[i].contains(p) || F.minus[i - 1].contains(p)) rep.separates = false;
    }
    // (iv) Hausdorff distance to the union of stable manifolds.
    std::vector<int> limits = detail::grid_limits(*F.context, g);
    std::vector<std::vector<Vec2>> clouds(N);
    for (int j = 0; j < N; ++j)
        clouds[j] = detail::stable_manifold_cloud(*F.context, F.order[j], g, limits, opt.shoot_count);
    for (int j = 1; j <= N; ++j) {
        std::vector<Vec2> cloud;
        for (int i = 0; i < j; ++i) cloud.insert(cloud.end(), clouds[i].begin(), clouds[i].end());
        const auto& w = F.minus[j].weights();
        double d1 = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (w[i] < 0.5) continue;
            double best = 1e300;
            for (const auto& q : cloud) best = std::min(best, torus_distance(q, g.point(i), spec.dim));
            d1 = std::max(d1, best);
        }
        double d2 = 0.0;
        for (const auto& q : cloud) {
            if (F.minus[j].contains(q)) continue;
            double best = 1e300;
            for (std::size_t i = 0; i < g.size(); ++i)
                if (w[i] > 0.5) best = std::min(best, torus_distance(q, g.point(i), spec.dim));
            d2 = std::max(d2, best);
        }
        rep.hausdorff.push_back(std::max(d1, d2));
    }
    return F;
}

}  // namespace axioma

#endif
