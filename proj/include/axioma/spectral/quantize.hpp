#ifndef AXIOMA_SPECTRAL_QUANTIZE_HPP
#define AXIOMA_SPECTRAL_QUANTIZE_HPP

// Torus quantization of weight symbols and the conjugated generators
// P_k = A_k (-L_V) A_k^{-1} on k-forms, with A_k = exp(Op(G)).

#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "axioma/core/parallel.hpp"
#include "axioma/escape/order_function.hpp"
#include "axioma/spectral/forms.hpp"

namespace axioma {

struct SymbolOptions {
    int modes = 3;       // keep x-frequencies |q_i| <= modes of m
    int grid = 0;        // x samples per axis; 0 picks 64 on T^1 and 16 on T^2
    int theta_res = 16;  // fibre directions on T^2
};

// Order function m(x, theta) sampled on a grid and band-limited in x. On T^1
// there are two fibre directions (xi > 0 and xi < 0); on T^2 the coefficients
// are interpolated linearly in theta.
class OrderSymbol {
public:
    using Function = std::function<double(const Vec2&, double)>;

    static OrderSymbol sample(int dim, const Function& m, const SymbolOptions& opt = {}) {
        if (dim != 1 && dim != 2) throw PreconditionError("order symbols exist for T^1 and T^2 only");
        if (opt.modes < 0) throw PreconditionError("symbol mode count must be >= 0");
        OrderSymbol s;
        s.dim_ = dim;
        s.J_ = opt.modes;
        s.sheets_ = dim == 1 ? 2 : std::max(opt.theta_res, 2);
        const int g = opt.grid > 0 ? opt.grid : (dim == 1 ? 64 : 16);
        if (g < 2 * opt.modes + 1) throw PreconditionError("symbol grid too coarse for the requested modes");
        const ModeSet q(dim, opt.modes);
        const int pts = dim == 1 ? g : g * g;
        std::vector<Vec2> xs(pts);
        for (int i = 0; i < pts; ++i)
            xs[i] = dim == 1 ? Vec2(double(i) / g, 0.0) : Vec2(double(i / g) / g, double(i % g) / g);

        std::vector<double> values(std::size_t(pts) * s.sheets_);
        parallel_for(values.size(), [&](std::size_t n) {
            int j = int(n / pts), i = int(n % pts);
            values[n] = m(xs[i], s.sheet_angle(j));
        });
        s.coef_.assign(s.sheets_, std::vector<cplx>(q.size()));
        for (int j = 0; j < s.sheets_; ++j)
            for (int a = 0; a < q.size(); ++a) {
                cplx sum = 0.0;
                for (int i = 0; i < pts; ++i) {
                    double ph = -two_pi * (q[a][0] * xs[i][0] + q[a][1] * xs[i][1]);
                    sum += values[std::size_t(j) * pts + i] * cplx(std::cos(ph), std::sin(ph));
                }
                s.coef_[j][a] = sum / double(pts);
            }
        // Largest |m_J| on a grid twice as fine as the sampling one.
        const int fine = 2 * g;
        for (int j = 0; j < s.sheets_; ++j)
            for (int i = 0; i < (dim == 1 ? fine : fine * fine); ++i) {
                Vec2 x = dim == 1 ? Vec2(double(i) / fine, 0.0) : Vec2(double(i / fine) / fine, double(i % fine) / fine);
                s.max_abs_ = std::max(s.max_abs_, std::abs(s.sheet_value(j, x)));
            }
        return s;
    }

    // Symbol with the given x-Fourier coefficients on every sheet (tests and
    // model symbols).
    static OrderSymbol from_coefficients(int dim, int modes, const std::vector<std::pair<Freq, cplx>>& c,
                                         int sheets = 2) {
        OrderSymbol s;
        s.dim_ = dim;
        s.J_ = modes;
        s.sheets_ = sheets;
        ModeSet q(dim, modes);
        s.coef_.assign(sheets, std::vector<cplx>(q.size()));
        for (const auto& [k, v] : c) {
            int a = q.index(k);
            if (a < 0) throw PreconditionError("coefficient outside the symbol band");
            for (auto& row : s.coef_) row[a] += v;
        }
        for (int j = 0; j < sheets; ++j)
            for (int i = 0; i < 64; ++i)
                s.max_abs_ = std::max(s.max_abs_, std::abs(s.sheet_value(j, Vec2(i / 64.0, (i * 7 % 64) / 64.0))));
        return s;
    }

    int dim() const { return dim_; }
    int modes() const { return J_; }
    double max_abs() const { return max_abs_; }

    // Fibre angle (turns) of a nonzero integer mode.
    double mode_angle(const Freq& k) const {
        if (dim_ == 1) return k[0] >= 0 ? 0.0 : 0.5;
        return covector_angle(Covector(k[0], k[1]));
    }

    // x-Fourier coefficient q of m_J(., theta).
    cplx coefficient(const Freq& q, double theta) const {
        ModeSet box(dim_, J_);
        int a = box.index(q);
        if (a < 0) return 0.0;
        if (dim_ == 1) return coef_[(theta >= 0.25 && theta < 0.75) ? 1 : 0][a];
        double t = wrap01(theta) * sheets_;
        int j0 = int(std::floor(t)) % sheets_;
        int j1 = (j0 + 1) % sheets_;
        double w = t - std::floor(t);
        return (1.0 - w) * coef_[j0][a] + w * coef_[j1][a];
    }

    double value(const Vec2& x, double theta) const {
        ModeSet box(dim_, J_);
        double sum = 0.0;
        for (int a = 0; a < box.size(); ++a) {
            double ph = two_pi * (box[a][0] * x[0] + box[a][1] * x[1]);
            sum += (coefficient(box[a], theta) * cplx(std::cos(ph), std::sin(ph))).real();
        }
        return sum;
    }

private:
    double sheet_angle(int j) const { return dim_ == 1 ? 0.5 * j : double(j) / sheets_; }
    double sheet_value(int j, const Vec2& x) const { return value(x, sheet_angle(j)); }

    int dim_ = 1;
    int J_ = 0;
    int sheets_ = 2;
    std::vector<std::vector<cplx>> coef_;
    double max_abs_ = 0.0;
};

inline OrderSymbol order_symbol(const OrderFunction& m, int dim, const SymbolOptions& opt = {}) {
    return OrderSymbol::sample(
        dim, [&](const Vec2& x, double theta) { return m.sphere(SigmaPoint{x, theta}).value; }, opt);
}

// log sqrt(1 + (c |xi|)^2) with the low-frequency cutoff chi(|xi|^2), xi = 2 pi k.
inline double weight_radial(const Freq& k, double scale) {
    double xi = two_pi * mode_norm(k);
    return order_cutoff(xi * xi) * 0.5 * std::log1p(scale * scale * xi * xi);
}

struct QuantizeOptions {
    double scale_max = 0.025;   // largest weight scale c
    double cond_target = 1e12;  // c is lowered until exp(2 max|m| w) stays below this
    double cond_limit = 1e14;   // measured condition number above this is an error
};

// Weight scale c: scale_max unless the estimated condition number
// exp(2 max|m| w(K sqrt n)) of A at cutoff K exceeds the target.
inline double weight_scale(const OrderSymbol& m, int K, const QuantizeOptions& opt = {}) {
    if (m.max_abs() <= 0.0 || K <= 0) return opt.scale_max;
    double w = std::log(opt.cond_target) / (2.0 * m.max_abs());
    double rho = two_pi * K * std::sqrt(double(m.dim()));
    double c = std::sqrt(std::expm1(2.0 * w)) / rho;
    return std::min(opt.scale_max, c);
}

// Op(G) on the scalar modes: entry (a, b) = m^_{theta(k_b)}(k_a - k_b) w(k_b).
inline CSparse scalar_weight_generator(const OrderSymbol& m, const ModeSet& modes, double scale) {
    const ModeSet band(modes.dim(), m.modes());
    std::vector<Eigen::Triplet<cplx>> t;
    for (int b = 0; b < modes.size(); ++b) {
        const Freq& kb = modes[b];
        double w = weight_radial(kb, scale);
        if (w == 0.0) continue;
        double th = m.mode_angle(kb);
        for (const auto& q : band.modes()) {
            int a = modes.index({kb[0] + q[0], kb[1] + q[1]});
            if (a < 0) continue;
            cplx c = m.coefficient(q, th);
            if (c != cplx(0.0)) t.emplace_back(a, b, c * w);
        }
    }
    return detail::from_triplets(modes.size(), modes.size(), t);
}

// Q_k with principal symbol G on every component and Q_{k+1} d = d Q_k exactly:
// Q_0 = Op(G), Q_n = Op(G) off the zero mode (T^2), and on 1-forms
// Q_1 = d Q_0 D^+ d* + D^+ d* Q_2 d with D^+ the inverse Laplacian off zero modes.
inline std::vector<CSparse> weight_generators(const OrderSymbol& m, int K, double scale) {
    const int n = m.dim();
    ModeSet modes(n, K);
    CSparse op = scalar_weight_generator(m, modes, scale);
    std::vector<CSparse> Q(n + 1);
    Q[0] = op;
    auto inv_lap = [&](int k) {
        FormBasis b(n, k, K);
        Eigen::VectorXd lap = laplacian_diagonal(b);
        Eigen::VectorXcd inv(lap.size());
        for (int i = 0; i < lap.size(); ++i) inv[i] = lap[i] > 0.0 ? 1.0 / lap[i] : 0.0;
        return diagonal_sparse(inv);
    };
    CSparse d0 = exterior_derivative(n, 0, K);
    CSparse d0a = CSparse(d0.adjoint());
    if (n == 1) {
        Q[1] = d0 * op * inv_lap(0) * d0a;
    } else {
        Eigen::VectorXcd keep = Eigen::VectorXcd::Ones(modes.size());
        keep[modes.zero_index()] = 0.0;
        CSparse P0 = diagonal_sparse(keep);
        Q[2] = P0 * op * P0;
        CSparse d1 = exterior_derivative(n, 1, K);
        CSparse d1a = CSparse(d1.adjoint());
        Q[1] = d0 * op * inv_lap(0) * d0a + inv_lap(1) * d1a * Q[2] * d1;
    }
    for (auto& q : Q) q.prune(cplx(0.0));
    return Q;
}

// Op(G) for a general symbol G(x, k), applied identically to every component:
// entry (a, b) is the x-Fourier coefficient k_a - k_b of G(., k_b) on a grid.
inline CMatrix quantize_symbol(const FormBasis& basis, const std::function<double(const Vec2&, const Freq&)>& G,
                               int grid = 0) {
    const ModeSet& modes = basis.modes();
    const int n = modes.dim();
    const int g = grid > 0 ? grid : 4 * modes.cutoff() + 8;
    const int pts = n == 1 ? g : g * g;
    CMatrix op = CMatrix::Zero(modes.size(), modes.size());
    parallel_for(std::size_t(modes.size()), [&](std::size_t bi) {
        int b = int(bi);
        std::vector<double> vals(pts);
        std::vector<Vec2> xs(pts);
        for (int i = 0; i < pts; ++i) {
            xs[i] = n == 1 ? Vec2(double(i) / g, 0.0) : Vec2(double(i / g) / g, double(i % g) / g);
            vals[i] = G(xs[i], modes[b]);
        }
        for (int a = 0; a < modes.size(); ++a) {
            Freq q{modes[a][0] - modes[b][0], modes[a][1] - modes[b][1]};
            cplx sum = 0.0;
            for (int i = 0; i < pts; ++i) {
                double ph = -two_pi * (q[0] * xs[i][0] + q[1] * xs[i][1]);
                sum += vals[i] * cplx(std::cos(ph), std::sin(ph));
            }
            op(a, b) = sum / double(pts);
        }
    });
    CMatrix out = CMatrix::Zero(basis.size(), basis.size());
    for (int c = 0; c < basis.components(); ++c)
        out.block(c * modes.size(), c * modes.size(), modes.size(), modes.size()) = op;
    return out;
}

struct WeightMatrix {
    CMatrix A;
    double sigma_max = 0.0;
    double sigma_min = 0.0;
    double condition = 1.0;
    bool regularized = false;
    double epsilon = 0.0;
};

// A = exp(Q). If the smallest singular value is below 1e-10 of the largest,
// A + eps I with eps = 1e-8 sigma_max is used and recorded.
inline WeightMatrix weight_matrix(const CMatrix& Q, const QuantizeOptions& opt = {}) {
    WeightMatrix w;
    w.A = Q.exp();
    Eigen::JacobiSVD<CMatrix> svd(w.A);
    auto sv = svd.singularValues();
    w.sigma_max = sv.size() ? sv[0] : 0.0;
    w.sigma_min = sv.size() ? sv[sv.size() - 1] : 0.0;
    if (w.sigma_min < 1e-10 * w.sigma_max) {
        w.regularized = true;
        w.epsilon = 1e-8 * w.sigma_max;
        w.A += w.epsilon * CMatrix::Identity(w.A.rows(), w.A.cols());
        Eigen::JacobiSVD<CMatrix> s2(w.A);
        w.sigma_max = s2.singularValues()[0];
        w.sigma_min = s2.singularValues()[s2.singularValues().size() - 1];
    }
    w.condition = w.sigma_min > 0.0 ? w.sigma_max / w.sigma_min : std::numeric_limits<double>::infinity();
    if (!(w.condition <= opt.cond_limit))
        throw NumericalDegeneracy("weight matrix condition number " + std::to_string(w.condition) +
                                  " exceeds the limit; parameters too aggressive, use smaller |u| and s");
    return w;
}

inline WeightMatrix quantize_weight(const FormBasis& basis, const std::function<double(const Vec2&, const Freq&)>& G,
                                    int grid = 0, const QuantizeOptions& opt = {}) {
    return weight_matrix(quantize_symbol(basis, G, grid), opt);
}

// A(-L)A^{-1} for a raw generator and a weight matrix of the same size.
inline GeneratorMatrix conjugated_generator(const GeneratorMatrix& raw, const CMatrix& A) {
    if (A.rows() != raw.P.rows() || A.cols() != raw.P.cols())
        throw PreconditionError("weight and generator sizes differ");
    auto lu = A.transpose().partialPivLu();
    GeneratorMatrix g = raw;
    CMatrix AP = A * raw.P;
    g.P = lu.solve(AP.transpose()).transpose();
    g.kind = GeneratorKind::conjugated;
    if (!g.P.allFinite()) throw NumericalDegeneracy("conjugation by the weight matrix failed");
    return g;
}

struct ConjugationOptions {
    int pad_factor = 2;  // operators are conjugated at cutoff pad_factor * K, then compressed
    int max_terms = 800;
    double series_tol = 1e-15;
    QuantizeOptions weight;
};

// Conjugated operators on all degrees at cutoff K: iota[k] = A_{k-1} i_V A_k^{-1}
// (k >= 1), d[k] at K, and P[k] = -(d iota + iota d). Since A intertwines d
// exactly, P[k+1] d = d P[k] holds to round-off.
struct ConjugatedForms {
    int dim = 1;
    int cutoff = 0;
    int padded_cutoff = 0;
    double scale = 0.0;
    int series_terms = 0;
    std::vector<CMatrix> iota;  // index k, empty at k = 0
    std::vector<CSparse> d;     // d[k]: k -> k+1
    std::vector<CMatrix> P;
    std::vector<FormBasis> bases;
};

namespace detail {

// Compressed exp(Qo) X exp(-Qi) by the series sum ad^j X / j!.
inline CMatrix conjugation_series(const CMatrix& X, const CSparse& Qo, const CSparse& Qi,
                                  const std::vector<int>& rows, const std::vector<int>& cols,
                                  const ConjugationOptions& opt, int& terms) {
    CMatrix term = X;
    CMatrix sum = compress(X, rows, cols);
    for (int j = 1; j <= opt.max_terms; ++j) {
        CMatrix next = (Qo * term - term * Qi) / double(j);
        term.swap(next);
        CMatrix c = compress(term, rows, cols);
        sum += c;
        if (!sum.allFinite()) throw NumericalDegeneracy("conjugation series diverged; use smaller |u| and s");
        double scale = sum.cwiseAbs().maxCoeff();
        if (c.cwiseAbs().maxCoeff() <= opt.series_tol * scale) {
            terms = std::max(terms, j);
            return sum;
        }
    }
    throw NumericalDegeneracy("conjugation series did not converge in " + std::to_string(opt.max_terms) + " terms");
}

}  // namespace detail

inline ConjugatedForms conjugate_forms(const VectorFieldSpec& spec, const OrderSymbol& m, int K, double scale,
                                       const ConjugationOptions& opt = {}) {
    if (m.dim() != spec.dim) throw PreconditionError("symbol and field dimensions differ");
    require_cutoff(spec, K);
    const int n = spec.dim;
    const int M = std::max(opt.pad_factor, 1) * K;
    ConjugatedForms out;
    out.dim = n;
    out.cutoff = K;
    out.padded_cutoff = M;
    out.scale = scale;
    auto Q = weight_generators(m, M, scale);
    for (int k = 0; k <= n; ++k) out.bases.emplace_back(n, k, K);
    out.iota.resize(n + 1);
    for (int k = 1; k <= n; ++k) {
        FormBasis outer_in(n, k, M), outer_out(n, k - 1, M);
        CMatrix X(interior_product(spec, k, M));
        out.iota[k] = detail::conjugation_series(X, Q[k - 1], Q[k], outer_out.embedding(out.bases[k - 1]),
                                                 outer_in.embedding(out.bases[k]), opt, out.series_terms);
    }
    for (int k = 0; k < n; ++k) out.d.push_back(exterior_derivative(n, k, K));
    for (int k = 0; k <= n; ++k) {
        const int sz = out.bases[k].size();
        CMatrix L = CMatrix::Zero(sz, sz);
        if (k >= 1) L += out.d[k - 1] * out.iota[k];
        if (k < n) L += out.iota[k + 1] * out.d[k];
        out.P.push_back(-L);
    }
    return out;
}

inline GeneratorMatrix generator_of(const ConjugatedForms& f, int k, const OrderParameters& p = {0, 0, 0}) {
    GeneratorMatrix g;
    g.P = f.P.at(k);
    g.degree = k;
    g.cutoff = f.cutoff;
    g.kind = GeneratorKind::conjugated;
    g.u = p.u;
    g.n0 = p.n0;
    g.s = p.s;
    return g;
}

}  // namespace axioma

#endif
