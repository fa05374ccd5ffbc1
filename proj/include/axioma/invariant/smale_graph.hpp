#ifndef AXIOMA_INVARIANT_SMALE_GRAPH_HPP
#define AXIOMA_INVARIANT_SMALE_GRAPH_HPP

// Smale order graph by separatrix shooting, irreducibility pruning,
// topological order, and the transversality check.

#include <algorithm>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <utility>
#include <vector>

#include "axioma/invariant/basic_sets.hpp"

namespace axioma {

struct ShootingOptions {
    int shoot_count = 16;
    double horizon = 50.0;
    double offset = 1e-4;
    double stay_radius = 1e-2;
    int stay_samples = 5;
    double step = 1e-3;
};

struct SmaleGraph {
    std::vector<BasicSetRecord> sets;
    std::vector<std::pair<int, int>> raw_edges;  // every detected relation K_i <= K_j
    std::vector<std::pair<int, int>> edges;      // after irreducibility pruning
    bool irreducible = true;
    std::vector<int> order;  // topological order of set ids
    std::vector<std::string> diagnostics;

    std::size_t size() const { return sets.size(); }
    int position(int id) const {
        auto it = std::find(order.begin(), order.end(), id);
        return it == order.end() ? -1 : static_cast<int>(it - order.begin());
    }
    bool has_edge(int i, int j) const {
        return std::find(edges.begin(), edges.end(), std::make_pair(i, j)) != edges.end();
    }
};

// One shooting outcome: the set reached and a point on the connecting orbit.
struct ShotOutcome {
    int reached = -1;
    Vec2 midpoint = Vec2::Zero();
    Vec2 entry = Vec2::Zero();
};

namespace detail {

inline int nearest_set(const std::vector<BasicSetRecord>& sets, const Vec2& x, double radius, int skip) {
    int best = -1;
    double bd = radius;
    for (const auto& k : sets) {
        if (k.id == skip) continue;
        double d = distance_to_set(k, x);
        if (d < bd) {
            bd = d;
            best = k.id;
        }
    }
    return best;
}

// Integrates from x0 and reports the first set near which the orbit stays for
// `stay_samples` consecutive time-1 samples.
inline ShotOutcome shoot(const VectorFieldSpec& f, const std::vector<BasicSetRecord>& sets, const Vec2& x0, int from,
                         const ShootingOptions& opt) {
    ShotOutcome out;
    int current = -1, count = 0;
    double next_sample = 1.0;
    std::vector<Vec2> path;
    int dim = f.dim;
    trace_orbit(f, x0, opt.horizon, opt.step, [&](double t, const Vec2& y) {
        if (t + 1e-9 < next_sample) return true;
        next_sample += 1.0;
        Vec2 w = wrap_point(y, dim);
        path.push_back(w);
        int j = nearest_set(sets, w, opt.stay_radius, from);
        if (j >= 0 && j == current) {
            ++count;
        } else {
            current = j;
            count = j >= 0 ? 1 : 0;
        }
        if (current >= 0 && count >= opt.stay_samples) {
            out.reached = current;
            return false;
        }
        return true;
    });
    if (out.reached >= 0) {
        std::size_t entry = path.size() >= static_cast<std::size_t>(opt.stay_samples) ? path.size() - opt.stay_samples : 0;
        out.entry = path[entry];
        // Midpoint on the connecting orbit: halfway between seed and entry in time.
        Vec2 mid = flow_unwrapped(f, x0, 0.5 * (entry + 1), opt.step);
        out.midpoint = wrap_point(mid, dim);
        // Prefer a point away from both sets.
        double dmin = 1e300;
        for (std::size_t k = 0; k <= entry; ++k) {
            double a = distance_to_set(sets[from], path[k]);
            double b = distance_to_set(sets[out.reached], path[k]);
            double score = std::abs(a - b);
            if (a > opt.stay_radius && b > opt.stay_radius && score < dmin) {
                dmin = score;
                out.midpoint = path[k];
            }
        }
    }
    return out;
}

// Seeds displaced along a direction family at a representative point or, for
// orbits, at points spread along the orbit.
inline std::vector<Vec2> shooting_seeds(const VectorFieldSpec& spec, const BasicSetRecord& k,
                                        const std::vector<Vec2>& dirs, int full_dim, const ShootingOptions& opt) {
    std::vector<Vec2> seeds;
    int n = k.ambient_dim();
    if (dirs.empty()) return seeds;
    if (!k.is_orbit()) {
        if (static_cast<int>(dirs.size()) == full_dim && n == 2) {
            for (int a = 0; a < opt.shoot_count; ++a) {
                double th = double(a) / opt.shoot_count;
                seeds.push_back(k.location.c + opt.offset * covector_from_angle(th));
            }
        } else {
            for (const auto& d : dirs) {
                seeds.push_back(k.location.c + opt.offset * d);
                seeds.push_back(k.location.c - opt.offset * d);
            }
        }
        return seeds;
    }
    int count = std::max(1, opt.shoot_count / 4);
    for (int a = 0; a < count; ++a) {
        double t = k.period * a / count;
        FlowWithJacobian fj = flow_jacobian(spec, k.location, t, std::min(opt.step, 1e-3));
        for (const auto& d : dirs) {
            Vec2 e = (fj.jacobian * d).normalized();
            seeds.push_back(fj.x.c + opt.offset * e);
            seeds.push_back(fj.x.c - opt.offset * e);
        }
    }
    return seeds;
}

struct Connection {
    int from = -1;
    int to = -1;
    Vec2 midpoint = Vec2::Zero();
};

inline std::vector<Connection> find_connections(const std::vector<BasicSetRecord>& sets, const VectorFieldSpec& spec,
                                                const ShootingOptions& opt) {
    std::vector<Connection> out;
    VectorFieldSpec back = spec.reversed();
    for (const auto& k : sets) {
        int n = k.ambient_dim();
        int unstable_full = n - (k.is_orbit() ? 1 : 0);
        for (const auto& s : shooting_seeds(spec, k, k.unstable_dirs, unstable_full, opt)) {
            ShotOutcome o = shoot(spec, sets, s, k.id, opt);
            if (o.reached >= 0) out.push_back({k.id, o.reached, o.midpoint});
        }
        for (const auto& s : shooting_seeds(spec, k, k.stable_dirs, unstable_full, opt)) {
            ShotOutcome o = shoot(back, sets, s, k.id, opt);
            if (o.reached >= 0) out.push_back({o.reached, k.id, o.midpoint});
        }
    }
    return out;
}

// Transversal intersections of W^u(K_i) and W^s(K_j) carry at least the flow line.
inline bool dimensions_transversal(const BasicSetRecord& a, const BasicSetRecord& b) {
    return a.dim_unstable_manifold() + b.dim_stable_manifold() - a.ambient_dim() >= 1;
}

inline std::optional<std::vector<int>> find_cycle(int n, const std::vector<std::pair<int, int>>& edges) {
    std::vector<std::vector<int>> adj(n);
    for (auto [a, b] : edges) adj[a].push_back(b);
    std::vector<int> state(n, 0), parent(n, -1);
    std::optional<std::vector<int>> cycle;
    std::function<bool(int)> dfs = [&](int u) {
        state[u] = 1;
        for (int v : adj[u]) {
            if (state[v] == 1) {
                std::vector<int> c{v};
                for (int w = u; w != v && w >= 0; w = parent[w]) c.push_back(w);
                std::reverse(c.begin() + 1, c.end());
                cycle = c;
                return true;
            }
            if (state[v] == 0) {
                parent[v] = u;
                if (dfs(v)) return true;
            }
        }
        state[u] = 2;
        return false;
    };
    for (int u = 0; u < n; ++u)
        if (state[u] == 0 && dfs(u)) break;
    return cycle;
}

}  // namespace detail

// Removes (i,j) whenever j is reachable from i through a path of length >= 2.
inline std::vector<std::pair<int, int>> transitive_reduction(int n, const std::vector<std::pair<int, int>>& edges) {
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    for (auto [a, b] : edges) adj[a][b] = true;
    // reach2[a][b]: path of length >= 2.
    std::vector<std::vector<bool>> reach(adj);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            if (reach[i][k])
                for (int j = 0; j < n; ++j)
                    if (reach[k][j]) reach[i][j] = true;
    std::vector<std::pair<int, int>> out;
    for (auto [a, b] : edges) {
        bool redundant = false;
        for (int k = 0; k < n && !redundant; ++k)
            if (k != a && k != b && adj[a][k] && reach[k][b]) redundant = true;
        if (!redundant && std::find(out.begin(), out.end(), std::make_pair(a, b)) == out.end()) out.emplace_back(a, b);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Kahn's algorithm with smallest-id tie breaking; empty when a cycle exists.
inline std::vector<int> topological_order(int n, const std::vector<std::pair<int, int>>& edges) {
    std::vector<int> indeg(n, 0);
    std::vector<std::vector<int>> adj(n);
    for (auto [a, b] : edges) {
        adj[a].push_back(b);
        ++indeg[b];
    }
    std::set<int> ready;
    for (int i = 0; i < n; ++i)
        if (indeg[i] == 0) ready.insert(i);
    std::vector<int> order;
    while (!ready.empty()) {
        int u = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(u);
        for (int v : adj[u])
            if (--indeg[v] == 0) ready.insert(v);
    }
    if (static_cast<int>(order.size()) != n) order.clear();
    return order;
}

// Graph from a given relation list; throws on cycles.
inline SmaleGraph smale_graph_from_edges(std::vector<BasicSetRecord> sets, std::vector<std::pair<int, int>> raw) {
    SmaleGraph g;
    g.sets = std::move(sets);
    int n = static_cast<int>(g.sets.size());
    std::sort(raw.begin(), raw.end());
    raw.erase(std::unique(raw.begin(), raw.end()), raw.end());
    g.raw_edges = raw;
    if (auto c = detail::find_cycle(n, raw)) {
        std::ostringstream os;
        os << "transversality violated / saddle connection: cycle";
        for (int v : *c) os << ' ' << v;
        throw CheckFailure(os.str());
    }
    g.edges = transitive_reduction(n, raw);
    g.irreducible = true;
    g.order = topological_order(n, g.edges);
    for (auto [a, b] : g.raw_edges)
        if (!detail::dimensions_transversal(g.sets[a], g.sets[b]))
            g.diagnostics.push_back("saddle connection " + std::to_string(a) + " -> " + std::to_string(b));
    return g;
}

inline SmaleGraph build_smale_graph(const std::vector<BasicSetRecord>& sets, const VectorFieldSpec& spec,
                                    const ShootingOptions& opt = {}) {
    for (const auto& k : sets)
        if (!(k.lambda > 0.0)) throw PreconditionError("basic set " + std::to_string(k.id) + " is not hyperbolic");
    std::vector<std::pair<int, int>> raw;
    for (const auto& c : detail::find_connections(sets, spec, opt)) raw.emplace_back(c.from, c.to);
    return smale_graph_from_edges(sets, raw);
}

struct ConnectionCheck {
    int from = -1;
    int to = -1;
    Vec2 midpoint = Vec2::Zero();
    double angle = 0.0;  // radians between T W^u and T W^s at the midpoint
    bool flagged = false;
};

struct TransversalityReport {
    bool pass = true;
    std::vector<ConnectionCheck> connections;
};

// Tangent spaces along sampled connecting orbits. A 1-dimensional invariant
// manifold through a regular point is tangent to V there.
inline TransversalityReport check_transversality(const std::vector<BasicSetRecord>& sets, const VectorFieldSpec& spec,
                                                 const ShootingOptions& opt = {}) {
    TransversalityReport rep;
    std::set<std::pair<int, int>> seen;
    for (const auto& c : detail::find_connections(sets, spec, opt)) {
        if (!seen.insert({c.from, c.to}).second) continue;
        const auto& a = sets[c.from];
        const auto& b = sets[c.to];
        int n = a.ambient_dim();
        ConnectionCheck cc{c.from, c.to, c.midpoint, 0.0, false};
        Vec2 v = evaluate_field(spec, c.midpoint).v;
        bool u_full = a.dim_unstable_manifold() >= n;
        bool s_full = b.dim_stable_manifold() >= n;
        if (u_full || s_full || n == 1) {
            cc.angle = std::numbers::pi / 2;
        } else {
            Vec2 tu = v.normalized();
            Vec2 ts = v.normalized();
            double cross = std::abs(tu[0] * ts[1] - tu[1] * ts[0]);
            cc.angle = std::asin(std::min(1.0, cross));
        }
        cc.flagged = cc.angle < 1e-3;
        if (cc.flagged) rep.pass = false;
        rep.connections.push_back(cc);
    }
    return rep;
}

}  // namespace axioma

#endif
