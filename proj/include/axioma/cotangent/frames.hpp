#ifndef AXIOMA_COTANGENT_FRAMES_HPP
#define AXIOMA_COTANGENT_FRAMES_HPP

// Dual frames E*_u, E*_s, E*_o on a basic set, and their extension to a
// neighbourhood: the nearest-point splitting of K is pulled back along the
// flow, which reproduces the true stable/unstable fibre tangents on
// W^{s/u}_loc(K) and stays continuous off them.

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "axioma/invariant/basic_sets.hpp"
#include "axioma/lyapunov/grid.hpp"

namespace axioma {

enum class FrameProvenance { on_set, extended };

inline const char* to_string(FrameProvenance p) { return p == FrameProvenance::on_set ? "on-K" : "extended"; }

// Squared norms of the three parts of a covector.
struct FiberParts {
    Covector u = Covector::Zero();
    Covector s = Covector::Zero();
    Covector o = Covector::Zero();
    double u2() const { return u.squaredNorm(); }
    double s2() const { return s.squaredNorm(); }
    double o2() const { return o.squaredNorm(); }
};

struct DistributionFrame {
    Vec2 x = Vec2::Zero();
    int dim = 2;
    std::vector<Covector> u, s, o;
    FrameProvenance provenance = FrameProvenance::on_set;

    // Frame vectors as columns, ordered u, s, o, restricted to the fibre.
    Eigen::MatrixXd basis() const {
        Eigen::MatrixXd b(dim, u.size() + s.size() + o.size());
        int c = 0;
        for (const auto* part : {&u, &s, &o})
            for (const auto& v : *part) b.col(c++) = v.head(dim);
        return b;
    }
    bool complete() const { return int(u.size() + s.size() + o.size()) == dim; }

    double condition() const {
        if (!complete()) return std::numeric_limits<double>::infinity();
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(basis());
        const auto& sv = svd.singularValues();
        double lo = sv[sv.size() - 1];
        return lo > 0.0 ? sv[0] / lo : std::numeric_limits<double>::infinity();
    }

    FiberParts decompose(const Covector& xi) const {
        Eigen::MatrixXd b = basis();
        Eigen::VectorXd c = b.partialPivLu().solve(Eigen::VectorXd(xi.head(dim)));
        FiberParts p;
        int k = 0;
        for (auto [part, out] : {std::pair{&u, &p.u}, std::pair{&s, &p.s}, std::pair{&o, &p.o}})
            for (const auto& v : *part) *out += c[k++] * v;
        return p;
    }
};

// Orthonormal covectors vanishing on span(vs), which is taken to have the
// given rank (the best-fitting subspace when vs is numerically larger).
inline std::vector<Covector> annihilator(const std::vector<Vec2>& vs, int rank, int dim) {
    std::vector<Covector> out;
    if (rank >= dim) return out;
    if (dim == 1) return {Covector(1.0, 0.0)};
    if (rank == 0 || vs.empty()) return {Covector(1.0, 0.0), Covector(0.0, 1.0)};
    Mat2 m = Mat2::Zero();
    for (const auto& v : vs) {
        Vec2 w = v.normalized();
        m += w * w.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat2> es(m);
    out.push_back(canonical_direction(es.eigenvectors().col(0)));
    return out;
}

// Dual frame from tangent bases of the stable and unstable fibres through x.
inline DistributionFrame frame_from_tangents(const Vec2& x, int dim, bool orbit, int d_s, int d_u,
                                             const std::vector<Vec2>& ts, const std::vector<Vec2>& tu, const Vec2& v,
                                             FrameProvenance prov) {
    DistributionFrame f;
    f.x = x;
    f.dim = dim;
    f.provenance = prov;
    if (!orbit) {
        f.u = annihilator(tu, d_u, dim);
        f.s = annihilator(ts, d_s, dim);
        return f;
    }
    auto with_v = [&](std::vector<Vec2> a) {
        a.push_back(v);
        return a;
    };
    f.u = annihilator(with_v(tu), d_u + 1, dim);
    f.s = annihilator(with_v(ts), d_s + 1, dim);
    std::vector<Vec2> both = ts;
    both.insert(both.end(), tu.begin(), tu.end());
    f.o = annihilator(both, d_s + d_u, dim);
    for (auto& w : f.o)
        if (w.dot(v) < 0.0) w = -w;
    return f;
}

// Tangent splitting of a basic set at its representative points.
struct SetSplitting {
    BasicSetRecord set;
    VectorFieldSpec spec;
    std::vector<Vec2> points;
    std::vector<std::vector<Vec2>> es, eu;
    int d_s = 0;
    int d_u = 0;
    // Mean |V|^2 over an orbit; the adapted norm of the flow direction.
    double neutral_norm2 = 0.0;

    int dim() const { return set.ambient_dim(); }
    bool orbit() const { return set.is_orbit(); }

    std::size_t nearest(const Vec2& x) const {
        std::size_t best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < points.size(); ++i) {
            double d = torus_distance(points[i], x, dim());
            if (d < bd) {
                bd = d;
                best = i;
            }
        }
        return best;
    }

    DistributionFrame frame_at(std::size_t i) const {
        Vec2 v = evaluate_field(spec, points[i]).v;
        return frame_from_tangents(points[i], dim(), orbit(), d_s, d_u, es[i], eu[i], v, FrameProvenance::on_set);
    }
};

namespace detail {

inline std::string set_name(const BasicSetRecord& k) {
    return "K" + std::to_string(k.id) + " (" + to_string(k.kind) + ")";
}

inline std::vector<Vec2> full_basis(int dim) {
    if (dim == 1) return {Vec2(1.0, 0.0)};
    return {Vec2(1.0, 0.0), Vec2(0.0, 1.0)};
}

}  // namespace detail

// Splitting from the eigenvectors of DV at a fixed point, or from the monodromy
// eigenvector transported along an orbit. Throws on a defective linearization.
inline SetSplitting split_basic_set(const BasicSetRecord& k, const VectorFieldSpec& spec, int orbit_points = 64) {
    SetSplitting sp;
    sp.set = k;
    sp.spec = spec;
    const int n = k.ambient_dim();
    sp.d_u = k.index;
    sp.d_s = k.dim_stable_bundle();
    const Mat2& a = k.linearization;
    const double scale = std::max(1.0, a.norm());
    if (!k.is_orbit()) {
        sp.points = {k.location.c};
        std::vector<Vec2> es, eu;
        if (n == 1) {
            (sp.d_u == 1 ? eu : es) = detail::full_basis(1);
        } else if (sp.d_u == 0 || sp.d_s == 0) {
            Eigen2 e = eigenvalues2(a);
            if (e.real && std::abs(e.mu[0].real() - e.mu[1].real()) <= 1e-9 * scale &&
                (a - e.mu[0].real() * Mat2::Identity()).norm() > 1e-7 * scale)
                throw NumericalDegeneracy("defective linearization at " + detail::set_name(k));
            (sp.d_u == 0 ? es : eu) = detail::full_basis(2);
        } else {
            Eigen2 e = eigenvalues2(a);
            if (!e.real || std::abs(e.mu[0].real() - e.mu[1].real()) <= 1e-9 * scale)
                throw NumericalDegeneracy("defective linearization at " + detail::set_name(k));
            eu = {eigenvector2(a, e.mu[0].real())};
            es = {eigenvector2(a, e.mu[1].real())};
        }
        sp.es = {es};
        sp.eu = {eu};
        return sp;
    }
    // Periodic orbit: multipliers 1 and mu = det(monodromy).
    double mu = a.determinant();
    if (std::abs(mu - 1.0) <= 1e-9 || std::abs(a.trace() - 1.0 - mu) > 1e-4 * scale)
        throw NumericalDegeneracy("defective monodromy at " + detail::set_name(k));
    Vec2 w = eigenvector2(a, mu);
    const std::size_t total = k.orbit.size();
    const std::size_t stride = std::max<std::size_t>(1, total / std::max(1, orbit_points));
    const double dt = k.period / double(total);
    double norm2 = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
        Vec2 p = k.orbit[i];
        norm2 += evaluate_field(spec, p).v.squaredNorm();
        if (i % stride == 0) {
            sp.points.push_back(p);
            std::vector<Vec2> t = {canonical_direction(w)};
            sp.es.push_back(sp.d_s ? t : std::vector<Vec2>{});
            sp.eu.push_back(sp.d_u ? t : std::vector<Vec2>{});
        }
        w = flow_jacobian(spec, TorusPoint(2, p), dt, std::min(default_step, dt)).jacobian * w;
        w.normalize();
    }
    sp.neutral_norm2 = norm2 / double(total);
    return sp;
}

inline std::vector<DistributionFrame> frames_on_basic_set(const BasicSetRecord& k, const VectorFieldSpec& spec,
                                                          int orbit_points = 16) {
    SetSplitting sp = split_basic_set(k, spec, orbit_points);
    std::vector<DistributionFrame> out;
    for (std::size_t i = 0; i < sp.points.size(); ++i) out.push_back(sp.frame_at(i));
    return out;
}

// Tangent basis of the stable (dir = +1) or unstable (dir = -1) fibre through
// x: the nearest-point splitting at phi^{dir t}(x) pulled back by the flow,
// with t the time the orbit stays within `radius` of K, capped at t_max. The
// run also stops once the orbit is within `settle` of K.
inline std::vector<Vec2> transported_tangents(const SetSplitting& sp, const Vec2& x, int dir, double radius,
                                              double t_max, double step = default_step, double settle = 0.0) {
    const int n = sp.dim();
    const int d = dir > 0 ? sp.d_s : sp.d_u;
    if (d == 0) return {};
    int full = n - (sp.orbit() ? 1 : 0);
    if (d >= full && !sp.orbit()) return detail::full_basis(n);
    const auto& ref = dir > 0 ? sp.es : sp.eu;
    const VectorFieldSpec& spec = sp.spec;
    Vec2 y = x;
    Mat2 J = Mat2::Identity();
    const double h = dir * step;
    const int steps = step_count(t_max, step);
    for (int i = 0; i < steps; ++i) {
        if (i % 10 == 0) {
            double dist = distance_to_set(sp.set, wrap_point(y, n));
            if (dist > radius || dist < settle) break;
        }
        FieldValue f1 = evaluate_field(spec, y);
        Mat2 j1 = f1.dv * J;
        FieldValue f2 = evaluate_field(spec, Vec2(y + 0.5 * h * f1.v));
        Mat2 j2 = f2.dv * (J + 0.5 * h * j1);
        FieldValue f3 = evaluate_field(spec, Vec2(y + 0.5 * h * f2.v));
        Mat2 j3 = f3.dv * (J + 0.5 * h * j2);
        FieldValue f4 = evaluate_field(spec, Vec2(y + h * f3.v));
        Mat2 j4 = f4.dv * (J + h * j3);
        y += (h / 6.0) * (f1.v + 2.0 * f2.v + 2.0 * f3.v + f4.v);
        J += (h / 6.0) * (j1 + 2.0 * j2 + 2.0 * j3 + j4);
        // Keep J bounded; only directions matter.
        double nj = J.norm();
        if (nj > 1e100) J /= nj;
    }
    if (n == 1) {
        J(0, 1) = J(1, 0) = 0.0;
        J(1, 1) = 1.0;
    }
    // J^{-1} w up to scale, through the adjugate.
    Mat2 adj;
    adj << J(1, 1), -J(0, 1), -J(1, 0), J(0, 0);
    std::vector<Vec2> out;
    for (const auto& w : ref[sp.nearest(wrap_point(y, n))]) out.push_back(canonical_direction(adj * w));
    return out;
}

// Frame field on the grid points within `radius` of K.
class ExtendedFrames {
public:
    ExtendedFrames() = default;
    ExtendedFrames(SetSplitting sp, double radius, double t_max, Grid g)
        : sp_(std::move(sp)), radius_(radius), t_max_(t_max), grid_(g) {}

    const SetSplitting& splitting() const { return sp_; }
    double radius() const { return radius_; }
    double pull_time() const { return t_max_; }
    const Grid& grid() const { return grid_; }
    const std::vector<std::size_t>& cells() const { return cells_; }
    const std::vector<DistributionFrame>& frames() const { return frames_; }

    // Frame at any point; exact K frames on K.
    DistributionFrame at(const Vec2& x) const {
        const int n = sp_.dim();
        Vec2 xw = wrap_point(x, n);
        std::size_t i = sp_.nearest(xw);
        if (torus_distance(sp_.points[i], xw, n) < 1e-12) return sp_.frame_at(i);
        auto ts = transported_tangents(sp_, x, +1, radius_, t_max_);
        auto tu = transported_tangents(sp_, x, -1, radius_, t_max_);
        Vec2 v = evaluate_field(sp_.spec, x).v;
        return frame_from_tangents(xw, n, sp_.orbit(), sp_.d_s, sp_.d_u, ts, tu, v, FrameProvenance::extended);
    }

    void fill() {
        cells_.clear();
        frames_.clear();
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            Vec2 p = grid_.point(i);
            if (distance_to_set(sp_.set, p) >= radius_) continue;
            DistributionFrame f = at(p);
            double c = f.condition();
            if (!(c <= 1e6))
                throw NumericalDegeneracy("frame splitting degenerates near " + detail::set_name(sp_.set) +
                                          " (condition " + std::to_string(c) + "); shrink the radius");
            cells_.push_back(i);
            frames_.push_back(std::move(f));
        }
    }

    // One row per frame vector.
    void write_csv(std::ostream& os) const {
        os << "x,y,provenance,kind,xi_x,xi_y\n";
        for (const auto& f : frames_)
            for (auto [name, part] : {std::pair{"u", &f.u}, std::pair{"s", &f.s}, std::pair{"o", &f.o}})
                for (const auto& v : *part)
                    os << f.x[0] << ',' << f.x[1] << ',' << to_string(f.provenance) << ',' << name << ',' << v[0]
                       << ',' << v[1] << '\n';
    }

private:
    SetSplitting sp_;
    double radius_ = 0.05;
    double t_max_ = 1.0;
    Grid grid_;
    std::vector<std::size_t> cells_;
    std::vector<DistributionFrame> frames_;
};

struct ExtensionOptions {
    int grid_res = 64;
    // Pull-back time cap; <= 0 means 20/lambda, i.e. a direction error of e^{-20}.
    double pull_time = 0.0;
};

// Extends the frames of `k` to the grid points within `radius`. Every other
// basic set must stay outside the neighbourhood.
inline ExtendedFrames extend_frames(const BasicSetRecord& k, const VectorFieldSpec& spec, double radius,
                                    const std::vector<BasicSetRecord>& all_sets, const ExtensionOptions& opt = {}) {
    if (!(radius > 0.0)) throw PreconditionError("extension radius must be positive");
    std::vector<Vec2> probe = k.is_orbit() ? k.orbit : std::vector<Vec2>{k.location.c};
    for (const auto& other : all_sets) {
        if (other.id == k.id && other.kind == k.kind && torus_distance(other.location, k.location) < 1e-12) continue;
        for (const auto& p : probe)
            if (distance_to_set(other, p) < 2.0 * radius)
                throw PreconditionError("extension radius too large: the neighbourhood of " + detail::set_name(k) +
                                        " meets " + detail::set_name(other));
    }
    double t = opt.pull_time > 0.0 ? opt.pull_time : std::min(60.0, 20.0 / std::max(k.lambda, 1e-6));
    ExtendedFrames ext(split_basic_set(k, spec), radius, t, Grid{spec.dim, opt.grid_res});
    ext.fill();
    return ext;
}

}  // namespace axioma

#endif
