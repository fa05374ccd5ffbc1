#ifndef AXIOMA_COTANGENT_SIGMA_SETS_HPP
#define AXIOMA_COTANGENT_SIGMA_SETS_HPP

// Point clouds for the invariant sets Sigma_u, Sigma_uo, Sigma_s, Sigma_so in
// S*M. At x in W^s(K+) ∩ W^u(K-) the duals are annihilators of the fibre
// tangents through x, which are pulled back from the splittings of K+ and K-.

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

#include "axioma/cotangent/frames.hpp"
#include "axioma/invariant/smale_graph.hpp"

namespace axioma {

enum class SigmaKind { u, uo, s, so };

inline const char* to_string(SigmaKind k) {
    switch (k) {
        case SigmaKind::u: return "u";
        case SigmaKind::uo: return "uo";
        case SigmaKind::s: return "s";
        default: return "so";
    }
}

// A point of S*M: base point and fibre angle in turns.
struct SigmaPoint {
    Vec2 x = Vec2::Zero();
    double theta = 0.0;
};

// Product distance on S*T^n: flat base distance and fibre angle in turns.
inline double sphere_bundle_distance(const SigmaPoint& a, const SigmaPoint& b, int dim) {
    Vec2 d = torus_delta(a.x, b.x, dim);
    double t = wrap_centered(a.theta - b.theta);
    return std::sqrt(d.squaredNorm() + t * t);
}

// Spatial hash over (x, y, theta) for distance queries against a cloud.
class CloudIndex {
public:
    CloudIndex() = default;
    CloudIndex(const std::vector<SigmaPoint>& pts, int dim, double cell) : pts_(&pts), dim_(dim) {
        cells_ = std::max(1, static_cast<int>(std::floor(1.0 / cell)));
        buckets_.assign(std::size_t(cells_) * (dim == 2 ? cells_ : 1) * cells_, {});
        for (std::size_t i = 0; i < pts.size(); ++i) buckets_[key(cell_of(pts[i]))].push_back(i);
    }

    bool empty() const { return !pts_ || pts_->empty(); }

    // Distance to the nearest cloud point, or +inf beyond one cell.
    double distance(const SigmaPoint& p) const {
        double best = std::numeric_limits<double>::infinity();
        if (empty()) return best;
        auto c = cell_of(p);
        const int ry = dim_ == 2 ? 1 : 0;
        for (int a = -1; a <= 1; ++a)
            for (int b = -ry; b <= ry; ++b)
                for (int t = -1; t <= 1; ++t) {
                    std::array<int, 3> q{c[0] + a, c[1] + b, c[2] + t};
                    for (std::size_t i : buckets_[key(q)])
                        best = std::min(best, sphere_bundle_distance(p, (*pts_)[i], dim_));
                }
        return best;
    }
    // Exact nearest distance, scanning the whole cloud when the hash misses.
    double exact_distance(const SigmaPoint& p) const {
        double d = distance(p);
        if (std::isfinite(d) && d <= 1.0 / cells_) return d;
        for (const auto& q : *pts_) d = std::min(d, sphere_bundle_distance(p, q, dim_));
        return d;
    }

private:
    std::array<int, 3> cell_of(const SigmaPoint& p) const {
        auto c = [&](double v) { return static_cast<int>(std::floor(wrap01(v) * cells_)) % cells_; };
        return {c(p.x[0]), dim_ == 2 ? c(p.x[1]) : 0, c(p.theta)};
    }
    std::size_t key(std::array<int, 3> q) const {
        auto m = [&](int v) { return ((v % cells_) + cells_) % cells_; };
        int ny = dim_ == 2 ? cells_ : 1;
        return (std::size_t(m(q[0])) * ny + (dim_ == 2 ? m(q[1]) : 0)) * cells_ + m(q[2]);
    }

    const std::vector<SigmaPoint>* pts_ = nullptr;
    int dim_ = 2;
    int cells_ = 1;
    std::vector<std::vector<std::size_t>> buckets_;
};

inline double hausdorff_distance(const std::vector<SigmaPoint>& a, const std::vector<SigmaPoint>& b, int dim) {
    if (a.empty() && b.empty()) return 0.0;
    if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
    CloudIndex ia(a, dim, 0.02), ib(b, dim, 0.02);
    double h = 0.0;
    for (const auto& p : a) h = std::max(h, ib.exact_distance(p));
    for (const auto& p : b) h = std::max(h, ia.exact_distance(p));
    return h;
}

inline double cloud_separation(const std::vector<SigmaPoint>& a, const std::vector<SigmaPoint>& b, int dim) {
    if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
    CloudIndex ib(b, dim, 0.02);
    double d = std::numeric_limits<double>::infinity();
    for (const auto& p : a) d = std::min(d, ib.exact_distance(p));
    return d;
}

struct SigmaClouds {
    int dim = 2;
    std::vector<SigmaPoint> u, uo, s, so;
    double separation_s_uo = 0.0;
    double separation_u_so = 0.0;
    int base_points = 0;
    int unresolved = 0;  // sampled points whose limit sets were not identified

    const std::vector<SigmaPoint>& cloud(SigmaKind k) const {
        switch (k) {
            case SigmaKind::u: return u;
            case SigmaKind::uo: return uo;
            case SigmaKind::s: return s;
            default: return so;
        }
    }

    void write_csv(std::ostream& os) const {
        os << "x,y,theta,kind\n";
        for (SigmaKind k : {SigmaKind::u, SigmaKind::uo, SigmaKind::s, SigmaKind::so})
            for (const auto& p : cloud(k)) os << p.x[0] << ',' << p.x[1] << ',' << p.theta << ',' << to_string(k) << '\n';
    }
};

struct SigmaOptions {
    double horizon = 40.0;
    // Distance from K at which separatrix branches start and stop.
    double branch_offset = 1e-7;
    double branch_end = 1e-3;
    // Pull-backs stop once the orbit is this close to its limit set.
    double settle = 1e-9;
};

// The four duals at a point, given the sets its orbit tends to.
struct PointDuals {
    std::vector<Covector> s, so, u, uo;
};

inline PointDuals duals_at(const SetSplitting& plus, const SetSplitting& minus, const Vec2& x, double t_max,
                           double settle) {
    const int n = plus.dim();
    auto tangents = [&](const SetSplitting& sp, int dir) {
        return transported_tangents(sp, x, dir, std::numeric_limits<double>::infinity(), t_max, default_step, settle);
    };
    std::vector<Vec2> ts = tangents(plus, +1), tu = tangents(minus, -1);
    Vec2 v = evaluate_field(plus.spec, x).v;
    PointDuals d;
    d.so = annihilator(ts, plus.d_s, n);
    d.uo = annihilator(tu, minus.d_u, n);
    if (plus.orbit()) {
        ts.push_back(v);
        d.s = annihilator(ts, plus.d_s + 1, n);
    } else {
        d.s = d.so;
    }
    if (minus.orbit()) {
        tu.push_back(v);
        d.u = annihilator(tu, minus.d_u + 1, n);
    } else {
        d.u = d.uo;
    }
    return d;
}

namespace detail {

// kappa of a subspace of T*_x: two antipodal angles for a line, a ring of
// angles for the whole fibre.
inline void emit_kappa(std::vector<SigmaPoint>& out, const Vec2& x, const std::vector<Covector>& e, int dim,
                       int ring) {
    if (e.empty()) return;
    if (int(e.size()) >= dim) {
        if (dim == 1) {
            out.push_back({x, 0.0});
            out.push_back({x, 0.5});
        } else {
            for (int j = 0; j < ring; ++j) out.push_back({x, double(j) / ring});
        }
        return;
    }
    double t = covector_angle(e[0]);
    out.push_back({x, t});
    out.push_back({x, wrap01(t + 0.5)});
}

// Index of the set an orbit settles at, or -1.
inline int limit_set(const std::vector<BasicSetRecord>& sets, const VectorFieldSpec& spec, const Vec2& x, int dir,
                     double horizon) {
    Vec2 y = x;
    const double h = dir * 5e-3;
    const int n = spec.dim;
    for (int i = 0; i < step_count(horizon, 5e-3); ++i) {
        if (i % 20 == 0)
            for (std::size_t c = 0; c < sets.size(); ++c)
                if (distance_to_set(sets[c], wrap_point(y, n)) < 1e-4) return int(c);
        y = rk4_step(spec, y, h);
    }
    int best = -1;
    double bd = 1e-2;
    for (std::size_t c = 0; c < sets.size(); ++c) {
        double d = distance_to_set(sets[c], wrap_point(y, n));
        if (d < bd) {
            bd = d;
            best = int(c);
        }
    }
    return best;
}

// Points along a separatrix branch, resampled to `count` points equally spaced in arclength.
inline std::vector<Vec2> branch_points(const VectorFieldSpec& spec, const std::vector<BasicSetRecord>& sets,
                                       std::size_t self, const Vec2& start, int dir, double horizon, double end_radius,
                                       int count) {
    const int n = spec.dim;
    std::vector<Vec2> path{start};
    std::vector<double> arc{0.0};
    Vec2 y = start;
    const double h = dir * default_step;
    for (int i = 0; i < step_count(horizon, default_step); ++i) {
        Vec2 z = rk4_step(spec, y, h);
        arc.push_back(arc.back() + (z - y).norm());
        path.push_back(z);
        y = z;
        bool stop = false;
        if (i % 10 == 0)
            for (std::size_t c = 0; c < sets.size(); ++c)
                if (c != self && distance_to_set(sets[c], wrap_point(y, n)) < end_radius) stop = true;
        if (stop) break;
    }
    std::vector<Vec2> out;
    const double total = arc.back();
    if (total <= 0.0) return out;
    std::size_t k = 0;
    for (int j = 0; j < count; ++j) {
        double target = total * (j + 0.5) / count;
        while (k + 1 < arc.size() && arc[k + 1] < target) ++k;
        if (k + 1 >= arc.size()) break;
        double s = (target - arc[k]) / std::max(1e-300, arc[k + 1] - arc[k]);
        out.push_back(wrap_point(Vec2(path[k] + s * (path[k + 1] - path[k])), n));
    }
    return out;
}

}  // namespace detail

// Samples the sets on: each basic set, its one-dimensional stable and
// unstable separatrices, and the open basins of attracting or repelling
// orbits. The budget sets the number of base points per piece and the ring
// resolution of whole fibres.
inline SigmaClouds sigma_sets(const SmaleGraph& graph, const VectorFieldSpec& spec, int sample_budget,
                              const SigmaOptions& opt = {}) {
    if (graph.sets.empty()) throw PreconditionError("sigma_sets needs at least one basic set");
    if (sample_budget < 16) throw PreconditionError("sample budget must be at least 16");
    if (!check_transversality(graph.sets, spec).pass)
        throw PreconditionError("sigma_sets requires the transversality check to pass");
    const auto& sets = graph.sets;
    const int n = spec.dim;
    std::vector<SetSplitting> split;
    for (const auto& k : sets) split.push_back(split_basic_set(k, spec));
    SigmaClouds out;
    out.dim = n;
    const int ring = std::max(8, sample_budget / 16);
    const int per_piece = std::max(8, sample_budget / 8);

    auto t_cap = [&](int c) { return std::min(opt.horizon, 30.0 / std::max(1e-6, sets[c].lambda)); };
    auto add = [&](const Vec2& x, int plus, int minus) {
        if (plus < 0 || minus < 0) {
            ++out.unresolved;
            return;
        }
        double t = std::max(t_cap(plus), t_cap(minus));
        PointDuals d = duals_at(split[plus], split[minus], x, t, opt.settle);
        detail::emit_kappa(out.uo, x, d.so, n, ring);
        detail::emit_kappa(out.s, x, d.u, n, ring);
        detail::emit_kappa(out.u, x, d.s, n, ring);
        detail::emit_kappa(out.so, x, d.uo, n, ring);
        ++out.base_points;
    };

    for (std::size_t c = 0; c < sets.size(); ++c) {
        const auto& k = sets[c];
        if (k.is_orbit()) {
            std::size_t stride = std::max<std::size_t>(1, k.orbit.size() / per_piece);
            for (std::size_t i = 0; i < k.orbit.size(); i += stride) add(k.orbit[i], int(c), int(c));
        } else {
            add(k.location.c, int(c), int(c));
        }
        const SetSplitting& sp = split[c];
        // Separatrices of fixed points with one-dimensional stable or unstable manifolds.
        if (!k.is_orbit() && n == 2)
            for (int dir : {+1, -1}) {
                const auto& dirs = dir > 0 ? sp.es[0] : sp.eu[0];
                if (dirs.size() != 1) continue;
                for (double sgn : {1.0, -1.0}) {
                    Vec2 start = k.location.c + sgn * opt.branch_offset * dirs[0];
                    for (const auto& x : detail::branch_points(spec, sets, c, start, -dir, opt.horizon,
                                                               opt.branch_end, per_piece)) {
                        int other = detail::limit_set(sets, spec, x, -dir, opt.horizon);
                        if (dir > 0) add(x, int(c), other);
                        else add(x, other, int(c));
                    }
                }
            }
        // Open basins of orbits that carry a one-dimensional strong fibre.
        if (k.is_orbit()) {
            int res = std::max(8, static_cast<int>(std::sqrt(double(per_piece))));
            Grid g{n, res};
            for (std::size_t i = 0; i < g.size(); ++i) {
                Vec2 x = g.point(i);
                Vec2 jitter(0.37 / res, 0.29 / res);
                x = wrap_point(Vec2(x + jitter), n);
                int plus = detail::limit_set(sets, spec, x, +1, opt.horizon);
                int minus = detail::limit_set(sets, spec, x, -1, opt.horizon);
                if (plus == int(c) || minus == int(c)) add(x, plus, minus);
            }
        }
    }
    out.separation_s_uo = cloud_separation(out.s, out.uo, n);
    out.separation_u_so = cloud_separation(out.u, out.so, n);
    return out;
}

}  // namespace axioma

#endif
