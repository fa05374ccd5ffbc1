#ifndef AXIOMA_COTANGENT_ADAPTED_METRIC_HPP
#define AXIOMA_COTANGENT_ADAPTED_METRIC_HPP

// Adapted metric on a basic set: truncated time integrals of the pulled-back
// Euclidean metric on E_s and E_u, weighted by e^{lambda t/2}.

#include <cmath>
#include <string>
#include <vector>

#include "axioma/cotangent/frames.hpp"

namespace axioma {

struct AdaptedMetricSample {
    Vec2 x = Vec2::Zero();
    Mat2 g = Mat2::Identity();  // on T_x M, in coordinates
    std::vector<Vec2> es, eu, eo;
    double lambda = 0.0;

    double norm(const Vec2& v) const { return std::sqrt(v.dot(g * v)); }
};

namespace detail {

// Gram matrix of int_0^T e^{lambda t/2} <D phi^{dir t} e_i, D phi^{dir t} e_j> dt
// by composite Simpson on the variational equation.
inline Eigen::MatrixXd weighted_gram(const VectorFieldSpec& spec, const Vec2& x, const std::vector<Vec2>& basis,
                                     int dir, double lambda, double T, double step) {
    const int m = static_cast<int>(basis.size());
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(m, m);
    if (m == 0) return G;
    int n = std::max(2, step_count(T, step));
    if (n % 2) ++n;
    const double h = T / n;
    TorusPoint y(spec.dim, x);
    Mat2 J = Mat2::Identity();
    for (int k = 0; k <= n; ++k) {
        double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        double e = std::exp(0.5 * lambda * k * h);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) G(i, j) += w * e * (J * basis[i]).dot(J * basis[j]);
        if (k < n) {
            FlowWithJacobian f = flow_jacobian(spec, y, dir * h, step);
            y = f.x;
            J = f.jacobian * J;
        }
    }
    return G * (h / 3.0);
}

}  // namespace detail

// Adapted metric at x for the splitting (es, eu, eo). The flow direction gets
// the constant norm `neutral_norm2`, so the flow is an isometry on it.
inline AdaptedMetricSample adapted_metric_at(const VectorFieldSpec& spec, const Vec2& x, const std::vector<Vec2>& es,
                                             const std::vector<Vec2>& eu, const std::vector<Vec2>& eo, double lambda,
                                             double neutral_norm2, double T, double step = default_step) {
    AdaptedMetricSample s;
    s.x = x;
    s.es = es;
    s.eu = eu;
    s.eo = eo;
    s.lambda = lambda;
    const int n = spec.dim;
    Eigen::MatrixXd Gs = detail::weighted_gram(spec, x, es, +1, lambda, T, step);
    Eigen::MatrixXd Gu = detail::weighted_gram(spec, x, eu, -1, lambda, T, step);
    const int ms = int(es.size()), mu = int(eu.size()), mo = int(eo.size());
    Eigen::MatrixXd B(n, ms + mu + mo), G = Eigen::MatrixXd::Zero(ms + mu + mo, ms + mu + mo);
    int c = 0;
    for (const auto* part : {&es, &eu, &eo})
        for (const auto& v : *part) B.col(c++) = v.head(n);
    G.topLeftCorner(ms, ms) = Gs;
    G.block(ms, ms, mu, mu) = Gu;
    for (int i = 0; i < mo; ++i) G(ms + mu + i, ms + mu + i) = neutral_norm2 * eo[i].squaredNorm() /
                                                                 std::max(1e-300, evaluate_field(spec, x).v.squaredNorm());
    Eigen::MatrixXd Binv = B.inverse();
    Eigen::MatrixXd g = Binv.transpose() * G * Binv;
    s.g = Mat2::Identity();
    s.g.topLeftCorner(n, n) = 0.5 * (g + g.transpose());
    return s;
}

// Adapted metric at the representative points of K. Throws when the tail
// bound e^{-lambda T/2}/(lambda/2) of the truncated integrals exceeds 1e-6.
inline std::vector<AdaptedMetricSample> adapted_metric(const BasicSetRecord& k, const VectorFieldSpec& spec,
                                                       double T_trunc, int orbit_points = 8) {
    const double lam = k.lambda;
    if (!(lam > 0.0)) throw PreconditionError("adapted metric needs a hyperbolic set (lambda > 0)");
    double tail = std::exp(-0.5 * lam * T_trunc) / (0.5 * lam);
    if (!(T_trunc > 0.0) || tail > 1e-6)
        throw PreconditionError("T_trunc too small: tail bound " + std::to_string(tail) + " exceeds 1e-6");
    SetSplitting sp = split_basic_set(k, spec, orbit_points);
    std::vector<AdaptedMetricSample> out;
    for (std::size_t i = 0; i < sp.points.size(); ++i) {
        std::vector<Vec2> eo;
        if (sp.orbit()) eo.push_back(evaluate_field(spec, sp.points[i]).v);
        out.push_back(adapted_metric_at(spec, sp.points[i], sp.es[i], sp.eu[i], eo, lam, sp.neutral_norm2, T_trunc));
    }
    return out;
}

// Measured ratios |D phi^t v|_g(phi^t x) / |v|_g(x) for v in E_s, E_u (backward)
// and E_o, with the metric at the image rebuilt from the transported splitting.
struct MetricContraction {
    double stable = 0.0;    // worst over E_s, compare with e^{-lambda t/2}
    double unstable = 0.0;  // worst over E_u under phi^{-t}
    double neutral = 1.0;   // |D phi^t V|_g / |V|_g
};

inline MetricContraction check_adapted_metric(const AdaptedMetricSample& s, const VectorFieldSpec& spec,
                                              double neutral_norm2, double t, double T_trunc) {
    MetricContraction r;
    auto image = [&](int dir) {
        FlowWithJacobian f = flow_jacobian(spec, TorusPoint(spec.dim, s.x), dir * t);
        auto push = [&](const std::vector<Vec2>& vs) {
            std::vector<Vec2> o;
            for (const auto& v : vs) o.push_back(f.jacobian * v);
            return o;
        };
        AdaptedMetricSample at =
            adapted_metric_at(spec, f.x.c, push(s.es), push(s.eu), push(s.eo), s.lambda, neutral_norm2, T_trunc);
        return std::pair{f, at};
    };
    {
        auto [f, at] = image(+1);
        for (const auto& v : s.es) r.stable = std::max(r.stable, at.norm(f.jacobian * v) / s.norm(v));
        for (const auto& v : s.eo) r.neutral = at.norm(f.jacobian * v) / s.norm(v);
    }
    if (!s.eu.empty()) {
        auto [f, at] = image(-1);
        for (const auto& v : s.eu) r.unstable = std::max(r.unstable, at.norm(f.jacobian * v) / s.norm(v));
    }
    return r;
}

}  // namespace axioma

#endif
