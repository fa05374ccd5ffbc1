#ifndef AXIOMA_SPECTRAL_FORMS_HPP
#define AXIOMA_SPECTRAL_FORMS_HPP

// Truncated Fourier bases for k-forms on T^n and the exact matrices of d,
// the interior product i_V and the Lie derivative L_V = d i_V + i_V d.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <string>
#include <vector>

#include "axioma/core/errors.hpp"
#include "axioma/flow/trig_poly.hpp"
#include "axioma/flow/vector_field.hpp"

namespace axioma {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using CSparse = Eigen::SparseMatrix<cplx>;

// Modes k with max |k_i| <= K, lexicographic (first coordinate major).
class ModeSet {
public:
    ModeSet(int dim, int K) : dim_(dim), K_(K) {
        if (dim != 1 && dim != 2) throw PreconditionError("mode sets exist for T^1 and T^2 only");
        if (K < 0) throw PreconditionError("Fourier cutoff must be >= 0");
        const int w = 2 * K + 1;
        if (dim == 1) {
            for (int a = -K; a <= K; ++a) modes_.push_back({a, 0});
        } else {
            modes_.reserve(std::size_t(w) * w);
            for (int a = -K; a <= K; ++a)
                for (int b = -K; b <= K; ++b) modes_.push_back({a, b});
        }
    }

    int dim() const { return dim_; }
    int cutoff() const { return K_; }
    int size() const { return int(modes_.size()); }
    const Freq& operator[](int i) const { return modes_[i]; }
    const std::vector<Freq>& modes() const { return modes_; }

    bool contains(const Freq& k) const {
        if (std::abs(k[0]) > K_) return false;
        return dim_ == 1 ? k[1] == 0 : std::abs(k[1]) <= K_;
    }
    // Position of k, or -1 when it is outside the box.
    int index(const Freq& k) const {
        if (!contains(k)) return -1;
        const int w = 2 * K_ + 1;
        return dim_ == 1 ? k[0] + K_ : (k[0] + K_) * w + (k[1] + K_);
    }
    int zero_index() const { return index({0, 0}); }

    // Positions of the modes of `inner` inside this (larger) set.
    std::vector<int> embedding(const ModeSet& inner) const {
        std::vector<int> out;
        out.reserve(inner.size());
        for (const auto& k : inner.modes()) {
            int i = index(k);
            if (i < 0) throw PreconditionError("inner mode set is not contained in the outer one");
            out.push_back(i);
        }
        return out;
    }

private:
    int dim_;
    int K_;
    std::vector<Freq> modes_;
};

inline double mode_norm(const Freq& k) { return std::hypot(double(k[0]), double(k[1])); }

inline int binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    return (n == 2 && k == 1) ? 2 : 1;
}

// k-forms on T^n: components dx^I for the increasing multi-indices I of length
// k, each expanded in the modes of `modes`. Component-major ordering.
class FormBasis {
public:
    FormBasis(int degree, ModeSet modes) : degree_(degree), modes_(std::move(modes)) {
        if (degree < 0 || degree > modes_.dim()) throw PreconditionError("form degree out of range");
    }
    FormBasis(int dim, int degree, int K) : FormBasis(degree, ModeSet(dim, K)) {}

    int degree() const { return degree_; }
    int dim() const { return modes_.dim(); }
    int cutoff() const { return modes_.cutoff(); }
    int components() const { return binomial(modes_.dim(), degree_); }
    int size() const { return components() * modes_.size(); }
    const ModeSet& modes() const { return modes_; }
    int index(int component, int mode) const { return component * modes_.size() + mode; }

    std::string component_label(int c) const {
        if (degree_ == 0) return "1";
        if (degree_ == dim()) return dim() == 1 ? "dx" : "dx^dy";
        return c == 0 ? "dx" : "dy";
    }

    // Positions of `inner`'s basis inside this one (same degree, smaller cutoff).
    std::vector<int> embedding(const FormBasis& inner) const {
        auto e = modes_.embedding(inner.modes());
        std::vector<int> out;
        for (int c = 0; c < components(); ++c)
            for (int i : e) out.push_back(index(c, i));
        return out;
    }

private:
    int degree_;
    ModeSet modes_;
};

namespace detail {

inline CSparse from_triplets(int rows, int cols, const std::vector<Eigen::Triplet<cplx>>& t) {
    CSparse m(rows, cols);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

// Multiplication by the trig polynomial f, compressed to the box: entry
// (a, b) is f^(k_a - k_b).
inline void multiplication_triplets(const TrigPoly& f, const ModeSet& m, int row_off, int col_off, cplx scale,
                                    std::vector<Eigen::Triplet<cplx>>& out) {
    for (int b = 0; b < m.size(); ++b)
        for (const auto& [q, c] : f.coefficients()) {
            if (c == cplx(0.0)) continue;
            int a = m.index({m[b][0] + q[0], m[b][1] + q[1]});
            if (a >= 0) out.emplace_back(row_off + a, col_off + b, scale * c);
        }
}

inline cplx derivative_symbol(const Freq& k, int j) { return cplx(0.0, two_pi * k[j]); }

}  // namespace detail

inline void require_cutoff(const VectorFieldSpec& spec, int K) {
    if (K < spec.max_frequency())
        throw PreconditionError("Fourier cutoff " + std::to_string(K) + " is below the maximal frequency " +
                                std::to_string(spec.max_frequency()) + " of the field");
}

// Exterior derivative d: k-forms -> (k+1)-forms at cutoff K (diagonal blocks).
inline CSparse exterior_derivative(int dim, int k, int K) {
    FormBasis from(dim, k, K), to(dim, k + 1, K);
    const ModeSet& m = from.modes();
    std::vector<Eigen::Triplet<cplx>> t;
    for (int i = 0; i < m.size(); ++i) {
        const Freq& q = m[i];
        if (k == 0) {
            for (int j = 0; j < dim; ++j) t.emplace_back(to.index(j, i), i, detail::derivative_symbol(q, j));
        } else if (k == 1 && dim == 2) {
            // d(a dx + b dy) = (d_x b - d_y a) dx^dy
            t.emplace_back(i, from.index(1, i), detail::derivative_symbol(q, 0));
            t.emplace_back(i, from.index(0, i), -detail::derivative_symbol(q, 1));
        }
    }
    return detail::from_triplets(to.size(), from.size(), t);
}

// Interior product i_V: k-forms -> (k-1)-forms at cutoff K.
inline CSparse interior_product(const VectorFieldSpec& spec, int k, int K) {
    require_cutoff(spec, K);
    const int dim = spec.dim;
    if (k < 1 || k > dim) throw PreconditionError("interior product needs 1 <= k <= n");
    FormBasis from(dim, k, K), to(dim, k - 1, K);
    const ModeSet& m = from.modes();
    const int n = m.size();
    std::vector<Eigen::Triplet<cplx>> t;
    if (k == 1) {
        for (int j = 0; j < dim; ++j) detail::multiplication_triplets(spec.component_poly(j), m, 0, j * n, 1.0, t);
    } else {
        // i_V (a dx^dy) = -V^2 a dx + V^1 a dy
        detail::multiplication_triplets(spec.component_poly(1), m, 0, 0, -1.0, t);
        detail::multiplication_triplets(spec.component_poly(0), m, n, 0, 1.0, t);
    }
    return detail::from_triplets(to.size(), from.size(), t);
}

// L_V on k-forms by the Cartan formula. With d diagonal in the mode basis each
// product is the exact compression of the corresponding operator.
inline CMatrix lie_derivative(const VectorFieldSpec& spec, int k, int K) {
    require_cutoff(spec, K);
    const int dim = spec.dim;
    FormBasis b(dim, k, K);
    CSparse L(b.size(), b.size());
    if (k >= 1) L = L + exterior_derivative(dim, k - 1, K) * interior_product(spec, k, K);
    if (k < dim) L = L + interior_product(spec, k + 1, K) * exterior_derivative(dim, k, K);
    return CMatrix(L);
}

enum class GeneratorKind { raw, conjugated };

struct GeneratorMatrix {
    CMatrix P;
    int degree = 0;
    int cutoff = 0;
    GeneratorKind kind = GeneratorKind::raw;
    double u = 0.0, n0 = 0.0, s = 0.0;
};

// Raw generator -L_V on k-forms.
inline GeneratorMatrix assemble_lie_derivative(const VectorFieldSpec& spec, int k, int K) {
    GeneratorMatrix g;
    g.P = -lie_derivative(spec, k, K);
    g.degree = k;
    g.cutoff = K;
    return g;
}

// Hodge Laplacian on the flat torus: 4 pi^2 |k|^2 on every component.
inline Eigen::VectorXd laplacian_diagonal(const FormBasis& b) {
    Eigen::VectorXd d(b.size());
    const auto& m = b.modes();
    for (int c = 0; c < b.components(); ++c)
        for (int i = 0; i < m.size(); ++i) {
            double r = two_pi * mode_norm(m[i]);
            d[b.index(c, i)] = r * r;
        }
    return d;
}

inline CSparse diagonal_sparse(const Eigen::VectorXcd& d) {
    std::vector<Eigen::Triplet<cplx>> t;
    for (int i = 0; i < d.size(); ++i)
        if (d[i] != cplx(0.0)) t.emplace_back(i, i, d[i]);
    return detail::from_triplets(int(d.size()), int(d.size()), t);
}

inline CMatrix compress(const CMatrix& X, const std::vector<int>& rows, const std::vector<int>& cols) {
    CMatrix out(rows.size(), cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (std::size_t i = 0; i < rows.size(); ++i) out(i, j) = X(rows[i], cols[j]);
    return out;
}

}  // namespace axioma

#endif
