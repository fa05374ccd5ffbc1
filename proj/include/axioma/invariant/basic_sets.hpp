#ifndef AXIOMA_INVARIANT_BASIC_SETS_HPP
#define AXIOMA_INVARIANT_BASIC_SETS_HPP

// Detection and classification of hyperbolic fixed points and isolated
// hyperbolic periodic orbits.

#include <algorithm>
#include <complex>
#include <string>
#include <vector>

#include "axioma/flow/integrators.hpp"

namespace axioma {

enum class BasicSetKind { fixed_point, periodic_orbit };

inline const char* to_string(BasicSetKind k) {
    return k == BasicSetKind::fixed_point ? "fixed_point" : "periodic_orbit";
}

struct BasicSetRecord {
    int id = 0;
    BasicSetKind kind = BasicSetKind::fixed_point;
    TorusPoint location;
    // Periodic orbits: wrapped samples over one period, starting at `location`.
    std::vector<Vec2> orbit;
    double period = 0.0;
    // Eigenvalues of DV (fixed points) or Floquet exponents transverse to the flow.
    std::vector<std::complex<double>> rates;
    int index = 0;  // dim E_u
    double lambda = 0.0;
    std::vector<Vec2> stable_dirs;
    std::vector<Vec2> unstable_dirs;
    // DV at a fixed point, monodromy D phi^T at an orbit point.
    Mat2 linearization = Mat2::Zero();

    int ambient_dim() const { return location.n; }
    bool is_orbit() const { return kind == BasicSetKind::periodic_orbit; }
    int dim_unstable_manifold() const { return index + (is_orbit() ? 1 : 0); }
    int dim_stable_manifold() const { return ambient_dim() - index; }
    int dim_stable_bundle() const { return ambient_dim() - index - (is_orbit() ? 1 : 0); }
};

// Distance from x to the set on the flat torus.
inline double distance_to_set(const BasicSetRecord& k, const Vec2& x) {
    int n = k.ambient_dim();
    if (!k.is_orbit()) return torus_distance(k.location.c, x, n);
    double best = 1e300;
    for (std::size_t i = 0; i < k.orbit.size(); ++i) {
        // Segment distance between consecutive samples.
        const Vec2& a = k.orbit[i];
        const Vec2& b = k.orbit[(i + 1) % k.orbit.size()];
        Vec2 ab = torus_delta(a, b, n);
        Vec2 ax = torus_delta(a, x, n);
        double l2 = ab.squaredNorm();
        double t = l2 > 0.0 ? std::clamp(ax.dot(ab) / l2, 0.0, 1.0) : 0.0;
        best = std::min(best, (ax - t * ab).norm());
    }
    return best;
}

// Bucketed segments of a periodic orbit on T^2 for fast proximity queries;
// fixed points and T^1 sets fall back to distance_to_set.
class SetProximity {
public:
    SetProximity() = default;
    explicit SetProximity(const BasicSetRecord& k, int cells = 32) : set_(&k), g_(cells) {
        if (!k.is_orbit() || k.ambient_dim() != 2 || k.orbit.size() < 2) return;
        buckets_.assign(std::size_t(g_) * g_, {});
        const std::size_t m = k.orbit.size();
        for (std::size_t i = 0; i < m; ++i) {
            const Vec2& a = k.orbit[i];
            Vec2 b = a + torus_delta(a, k.orbit[(i + 1) % m], 2);
            int x0 = cell(std::min(a[0], b[0])), x1 = cell(std::max(a[0], b[0]));
            int y0 = cell(std::min(a[1], b[1])), y1 = cell(std::max(a[1], b[1]));
            for (int cx = x0; cx <= x1; ++cx)
                for (int cy = y0; cy <= y1; ++cy) buckets_[key(cx, cy)].push_back(i);
        }
    }

    double distance(const Vec2& x) const { return search(x, std::numeric_limits<double>::infinity(), false); }
    bool within(const Vec2& x, double r) const { return search(x, r, true) < r; }

private:
    int cell(double t) const { return static_cast<int>(std::floor(t * g_)); }
    std::size_t key(int cx, int cy) const {
        auto m = [&](int v) { return ((v % g_) + g_) % g_; };
        return std::size_t(m(cx)) * g_ + m(cy);
    }
    double segment(std::size_t i, const Vec2& x) const {
        const auto& o = set_->orbit;
        const Vec2& a = o[i];
        Vec2 ab = torus_delta(a, o[(i + 1) % o.size()], 2);
        Vec2 ax = torus_delta(a, x, 2);
        double l2 = ab.squaredNorm();
        double t = l2 > 0.0 ? std::clamp(ax.dot(ab) / l2, 0.0, 1.0) : 0.0;
        return (ax - t * ab).norm();
    }
    // Exact distance when it is below `cap`; otherwise some value >= cap. With
    // `any`, returns the first distance found below cap.
    double search(const Vec2& x, double cap, bool any) const {
        if (buckets_.empty()) return distance_to_set(*set_, x);
        const double h = 1.0 / g_;
        int cx = cell(wrap01(x[0])), cy = cell(wrap01(x[1]));
        double best = std::numeric_limits<double>::infinity();
        for (int ring = 0; ring <= g_ / 2; ++ring) {
            for (int a = -ring; a <= ring; ++a)
                for (int b = -ring; b <= ring; ++b) {
                    if (std::max(std::abs(a), std::abs(b)) != ring) continue;
                    for (std::size_t i : buckets_[key(cx + a, cy + b)]) {
                        best = std::min(best, segment(i, x));
                        if (any && best < cap) return best;
                    }
                }
            // Segments in unvisited cells are at least ring * h away.
            double floor = ring * h;
            if (best <= floor || floor >= cap) return best;
        }
        return best;
    }

    const BasicSetRecord* set_ = nullptr;
    int g_ = 32;
    std::vector<std::vector<std::size_t>> buckets_;
};

// Deterministic sign: the largest-magnitude component is made positive.
inline Vec2 canonical_direction(Vec2 v) {
    v.normalize();
    int i = std::abs(v[0]) >= std::abs(v[1]) ? 0 : 1;
    if (v[i] < 0.0) v = -v;
    return v;
}

struct Eigen2 {
    std::complex<double> mu[2];
    bool real = true;
};

inline Eigen2 eigenvalues2(const Mat2& a) {
    double tr = a.trace();
    double det = a.determinant();
    double disc = 0.25 * tr * tr - det;
    Eigen2 e;
    if (disc >= 0.0) {
        double r = std::sqrt(disc);
        // Stable root pairing.
        double big = 0.5 * tr + (tr >= 0.0 ? r : -r);
        double small = big != 0.0 ? det / big : 0.5 * tr - (tr >= 0.0 ? r : -r);
        e.mu[0] = std::max(big, small);
        e.mu[1] = std::min(big, small);
    } else {
        double r = std::sqrt(-disc);
        e.real = false;
        e.mu[0] = {0.5 * tr, r};
        e.mu[1] = {0.5 * tr, -r};
    }
    return e;
}

// Unit eigenvector of a for the real eigenvalue mu.
inline Vec2 eigenvector2(const Mat2& a, double mu) {
    Mat2 b = a - mu * Mat2::Identity();
    // Null vector from the row of larger norm.
    Vec2 r0 = b.row(0).transpose(), r1 = b.row(1).transpose();
    Vec2 r = r0.norm() >= r1.norm() ? r0 : r1;
    if (r.norm() == 0.0) return Vec2(1.0, 0.0);
    return canonical_direction(Vec2(-r[1], r[0]));
}

struct DetectionLog {
    std::vector<std::string> warnings;
};

namespace detail {

// Snap to a nearby rational p/q (q <= 12) when that lowers |V|.
inline Vec2 snap_rational(const VectorFieldSpec& spec, const Vec2& x) {
    Vec2 best = x;
    double best_norm = evaluate_field(spec, x).v.norm();
    Vec2 cand = x;
    bool changed = false;
    for (int i = 0; i < spec.dim; ++i) {
        for (int q = 1; q <= 12; ++q) {
            double r = std::round(x[i] * q) / q;
            if (std::abs(r - x[i]) < 1e-9) {
                cand[i] = r;
                changed = true;
                break;
            }
        }
    }
    if (changed) {
        cand = wrap_point(cand, spec.dim);
        double n = evaluate_field(spec, cand).v.norm();
        if (n <= best_norm) best = cand;
    }
    return best;
}

inline double field_scale(const VectorFieldSpec& spec) {
    double s = 0.0;
    for (const auto& comp : spec.components)
        for (const auto& t : comp) s += std::abs(t.a) + std::abs(t.b);
    return std::max(s, 1.0);
}

}  // namespace detail

// Classifies a fixed point from DV; throws NotAxiomA when some rate has zero real part.
inline BasicSetRecord classify_fixed_point(const VectorFieldSpec& spec, const Vec2& x, double hyperbolic_tol = 1e-6) {
    BasicSetRecord rec;
    rec.kind = BasicSetKind::fixed_point;
    rec.location = TorusPoint(spec.dim, x);
    FieldValue f = evaluate_field(spec, rec.location);
    rec.linearization = f.dv;
    double scale = std::max(1.0, f.dv.norm());
    if (spec.dim == 1) {
        double a = f.dv(0, 0);
        rec.rates = {a};
        if (std::abs(a) <= hyperbolic_tol * scale)
            throw NotAxiomA("non-hyperbolic fixed point at x=" + std::to_string(x[0]));
        rec.index = a > 0.0 ? 1 : 0;
        rec.lambda = std::abs(a);
        (a > 0.0 ? rec.unstable_dirs : rec.stable_dirs).push_back(Vec2(1.0, 0.0));
        return rec;
    }
    Eigen2 e = eigenvalues2(f.dv);
    rec.rates = {e.mu[0], e.mu[1]};
    double lam = std::min(std::abs(e.mu[0].real()), std::abs(e.mu[1].real()));
    if (lam <= hyperbolic_tol * scale)
        throw NotAxiomA("non-hyperbolic fixed point at (" + std::to_string(x[0]) + ", " + std::to_string(x[1]) + ")");
    rec.lambda = lam;
    int pos = (e.mu[0].real() > 0.0) + (e.mu[1].real() > 0.0);
    rec.index = pos;
    if (pos == 1) {
        rec.unstable_dirs.push_back(eigenvector2(f.dv, e.mu[0].real()));
        rec.stable_dirs.push_back(eigenvector2(f.dv, e.mu[1].real()));
    } else {
        auto& dirs = pos == 2 ? rec.unstable_dirs : rec.stable_dirs;
        if (e.real && std::abs(e.mu[0].real() - e.mu[1].real()) > 1e-9 * scale) {
            dirs.push_back(eigenvector2(f.dv, e.mu[0].real()));
            dirs.push_back(eigenvector2(f.dv, e.mu[1].real()));
        } else {
            dirs.push_back(Vec2(1.0, 0.0));
            dirs.push_back(Vec2(0.0, 1.0));
        }
    }
    return rec;
}

// Newton refinement from every grid seed where |V| is a local minimum.
inline std::vector<BasicSetRecord> find_fixed_points(const VectorFieldSpec& spec, int grid_density,
                                                     DetectionLog* log = nullptr) {
    spec.validate();
    if (grid_density < 8) throw PreconditionError("grid density must be at least 8 per axis");
    const int n = spec.dim;
    const int g = grid_density;
    const int ny = n == 2 ? g : 1;
    std::vector<double> norm(static_cast<std::size_t>(g) * ny);
    auto at = [&](int i, int j) -> double& { return norm[static_cast<std::size_t>(((i % g) + g) % g) * ny + ((j % ny) + ny) % ny]; };
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < ny; ++j) at(i, j) = evaluate_field(spec, Vec2(double(i) / g, n == 2 ? double(j) / g : 0.0)).v.norm();

    const double scale = detail::field_scale(spec);
    std::vector<Vec2> found;
    int dropped = 0;
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < ny; ++j) {
            double v = at(i, j);
            bool local_min = true;
            for (int di = -1; di <= 1 && local_min; ++di)
                for (int dj = (n == 2 ? -1 : 0); dj <= (n == 2 ? 1 : 0); ++dj)
                    if ((di || dj) && at(i + di, j + dj) < v) {
                        local_min = false;
                        break;
                    }
            if (!local_min) continue;
            Vec2 x(double(i) / g, n == 2 ? double(j) / g : 0.0);
            bool ok = false;
            for (int it = 0; it < 60; ++it) {
                FieldValue f = evaluate_field(spec, x);
                if (f.v.norm() <= 1e-13 * scale) {
                    ok = true;
                    break;
                }
                Vec2 dx;
                if (n == 1) {
                    if (std::abs(f.dv(0, 0)) < 1e-14 * scale) break;
                    dx = Vec2(-f.v[0] / f.dv(0, 0), 0.0);
                } else {
                    double det = f.dv.determinant();
                    if (std::abs(det) < 1e-14 * scale * scale) break;
                    dx = -f.dv.inverse() * f.v;
                }
                if (dx.norm() > 0.25) dx *= 0.25 / dx.norm();
                x += dx;
                if (dx.norm() < 1e-15) {
                    ok = evaluate_field(spec, x).v.norm() <= 1e-10 * scale;
                    break;
                }
            }
            if (!ok) {
                ++dropped;
                continue;
            }
            x = detail::snap_rational(spec, wrap_point(x, n));
            bool dup = false;
            for (const auto& y : found)
                if (torus_distance(x, y, n) < 1e-8) dup = true;
            if (!dup) found.push_back(x);
        }
    if (dropped > 0 && log)
        log->warnings.push_back("Newton did not converge from " + std::to_string(dropped) + " seed(s); dropped");
    std::sort(found.begin(), found.end(), [](const Vec2& a, const Vec2& b) {
        return a[0] != b[0] ? a[0] < b[0] : a[1] < b[1];
    });
    std::vector<BasicSetRecord> out;
    for (const auto& x : found) {
        BasicSetRecord r = classify_fixed_point(spec, x);
        r.id = static_cast<int>(out.size());
        out.push_back(r);
    }
    return out;
}

namespace detail {

struct ShootResult {
    bool converged = false;
    Vec2 x = Vec2::Zero();
    double period = 0.0;
    Mat2 monodromy = Mat2::Identity();
};

// Newton shooting for phi^T(x) = x + w with phase condition (x - x0).V(x0) = 0.
inline ShootResult shoot_orbit(const VectorFieldSpec& spec, Vec2 x, double T, const Vec2& w, double step) {
    ShootResult r;
    Vec2 x0 = x;
    Vec2 v0 = evaluate_field(spec, x0).v;
    for (int it = 0; it < 30; ++it) {
        FlowWithJacobian fj = flow_jacobian(spec, TorusPoint(2, x), T, step);
        Vec2 end = flow_unwrapped(spec, x, T, step);
        Vec2 res = end - x - w;
        Vec2 vend = evaluate_field(spec, end).v;
        Eigen::Matrix3d J;
        J.setZero();
        J.block<2, 2>(0, 0) = fj.jacobian - Mat2::Identity();
        J.block<2, 1>(0, 2) = vend;
        J.block<1, 2>(2, 0) = v0.transpose();
        Eigen::Vector3d F(res[0], res[1], (x - x0).dot(v0));
        if (res.norm() < 1e-11) {
            r.converged = true;
            r.x = x;
            r.period = T;
            r.monodromy = fj.jacobian;
            return r;
        }
        Eigen::Vector3d d = J.colPivHouseholderQr().solve(-F);
        if (!d.allFinite()) return r;
        x += d.head<2>();
        T += d[2];
        if (T <= 0.0) return r;
    }
    return r;
}

}  // namespace detail

// Isolated hyperbolic periodic orbits found by section return plus Newton
// shooting, from the given seeds in both time directions.
inline std::vector<BasicSetRecord> find_periodic_orbits(const VectorFieldSpec& spec, double period_cap,
                                                        const std::vector<Vec2>& seeds, DetectionLog* log = nullptr,
                                                        double step = 2e-3) {
    spec.validate();
    if (!(period_cap > 0.0) || !std::isfinite(period_cap)) throw PreconditionError("period cap must be finite and positive");
    std::vector<BasicSetRecord> out;
    if (spec.dim != 2) return out;
    const double scale = detail::field_scale(spec);
    bool non_hyperbolic = false;
    for (const auto& seed : seeds) {
        for (int dir : {+1, -1}) {
            VectorFieldSpec f = dir > 0 ? spec : spec.reversed();
            Vec2 x0 = flow_unwrapped(f, seed, 20.0, step);
            Vec2 v0 = evaluate_field(f, x0).v;
            if (v0.norm() < 1e-6 * scale) continue;  // attracted to a fixed point
            // First return to the transversal line through x0 (mod Z^2).
            Vec2 u = v0.normalized();
            double prev_g = 0.0, prev_t = 0.0;
            Vec2 prev_x = x0;
            bool found = false;
            double Tret = 0.0;
            Vec2 wret = Vec2::Zero();
            trace_orbit(f, x0, period_cap, step, [&](double t, const Vec2& y) {
                Vec2 dlt(wrap_centered(y[0] - x0[0]), wrap_centered(y[1] - x0[1]));
                double gval = dlt.dot(u);
                if (t > 10 * step && prev_g < 0.0 && gval >= 0.0 && dlt.norm() < 0.05) {
                    double s = prev_g / (prev_g - gval);
                    Tret = prev_t + s * (t - prev_t);
                    Vec2 disp = y - x0;
                    wret = Vec2(std::round(disp[0]), std::round(disp[1]));
                    found = true;
                    return false;
                }
                prev_g = gval;
                prev_t = t;
                prev_x = y;
                return true;
            });
            if (!found) continue;
            detail::ShootResult sr = detail::shoot_orbit(f, x0, Tret, wret, step);
            if (!sr.converged) {
                if (log) log->warnings.push_back("periodic orbit shooting did not converge");
                continue;
            }
            // Floquet multiplier transverse to the flow: det of the monodromy.
            double mu = sr.monodromy.determinant();
            double expo = std::log(std::abs(mu)) / sr.period;
            if (std::abs(expo) < 1e-4) {
                non_hyperbolic = true;
                continue;
            }
            Vec2 xs = wrap_point(sr.x, 2);
            bool dup = false;
            for (const auto& o : out)
                if (distance_to_set(o, xs) < 1e-5) dup = true;
            if (dup) continue;
            BasicSetRecord rec;
            rec.kind = BasicSetKind::periodic_orbit;
            rec.location = TorusPoint(2, xs);
            rec.period = sr.period;
            double true_expo = dir * expo;  // exponent for the original field
            rec.rates = {0.0, true_expo};
            rec.index = true_expo > 0.0 ? 1 : 0;
            rec.lambda = std::abs(true_expo);
            Mat2 mono = dir > 0 ? sr.monodromy : sr.monodromy.inverse();
            rec.linearization = mono;
            Vec2 tdir = eigenvector2(mono, dir > 0 ? mu : 1.0 / mu);
            (rec.index == 1 ? rec.unstable_dirs : rec.stable_dirs).push_back(tdir);
            const int samples = 400;
            Vec2 y = sr.x;
            double h = sr.period / samples;
            for (int i = 0; i < samples; ++i) {
                rec.orbit.push_back(wrap_point(y, 2));
                y = flow_unwrapped(spec, y, h, std::min(step, h));
            }
            rec.id = static_cast<int>(out.size());
            out.push_back(rec);
        }
    }
    if (non_hyperbolic && log) log->warnings.push_back("non-Axiom-A field: non-hyperbolic periodic orbit excluded");
    return out;
}

// Fixed points followed by periodic orbits, with ids renumbered.
inline std::vector<BasicSetRecord> find_basic_sets(const VectorFieldSpec& spec, int grid_density,
                                                   const std::vector<Vec2>& orbit_seeds, double period_cap,
                                                   DetectionLog* log = nullptr) {
    auto sets = find_fixed_points(spec, grid_density, log);
    if (!orbit_seeds.empty()) {
        auto orbits = find_periodic_orbits(spec, period_cap, orbit_seeds, log);
        for (auto& o : orbits) sets.push_back(o);
    }
    for (std::size_t i = 0; i < sets.size(); ++i) sets[i].id = static_cast<int>(i);
    return sets;
}

}  // namespace axioma

#endif
