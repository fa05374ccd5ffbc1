#ifndef AXIOMA_SPECTRAL_COMPLEX_HPP
#define AXIOMA_SPECTRAL_COMPLEX_HPP

// The complex (C^k(0), d) cut out by the Riesz projectors at z = 0, its
// cohomology, and the homotopy identity u = pi u + dRu + Rdu on both the
// Hodge side and the dynamical side.

#include <random>
#include <string>
#include <vector>

#include "axioma/spectral/resonances.hpp"

namespace axioma {

struct ComplexDegree {
    int degree = 0;
    RieszResult projector;
    CMatrix basis;  // orthonormal basis of range(pi)
    ResonanceSet resonances;
};

struct SpectralComplex {
    std::vector<ComplexDegree> degrees;
    std::vector<CMatrix> d;   // restricted d: C^k -> C^{k+1} in the range bases
    std::vector<int> ranks;   // dim C^k(0)
    std::vector<int> cohomology;
    double dd_residual = 0.0;           // max |d_{k+1} d_k| on the complex, relative to |d|
    double commutation_residual = 0.0;  // max |d pi_k - pi_{k+1} d| / (|d| |pi|)
    double intertwining_residual = 0.0; // max |d B_k - B_{k+1} D_k| / max(|d B_k|, 2 pi)
    bool empty = false;
    std::string diagnostic;
};

inline std::vector<int> betti_numbers(int dim) { return dim == 1 ? std::vector<int>{1, 1} : std::vector<int>{1, 2, 1}; }

inline int numerical_rank(const CMatrix& M, double tol) {
    if (M.size() == 0) return 0;
    Eigen::JacobiSVD<CMatrix> svd(M);
    int r = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] > tol) ++r;
    return r;
}

inline CMatrix range_basis(const CMatrix& pi, int rank) {
    if (rank == 0) return CMatrix(pi.rows(), 0);
    Eigen::JacobiSVD<CMatrix> svd(pi, Eigen::ComputeThinU);
    return svd.matrixU().leftCols(rank);
}

struct ComplexOptions {
    double region = 0.0;   // resonance region per degree
    double tol = 0.0;      // matching tolerance
    double radius = 0.0;   // contour radius; 0 picks a third of the gap to the next resonance
    int quad_points = 32;
    double rank_tol = 1e-6;
};

// Builds the complex at z = 0 from the conjugated operators. An empty complex
// (no resonance at 0 in any degree) is returned with a diagnostic.
inline SpectralComplex build_spectral_complex(const SpectralPair& sp, const ComplexOptions& opt) {
    SpectralComplex c;
    const int n = sp.main.dim;
    for (int k = 0; k <= n; ++k) {
        ComplexDegree deg;
        deg.degree = k;
        deg.resonances = resonances(sp, k, opt.region, opt.tol);
        double radius = opt.radius > 0.0 ? opt.radius : riesz_radius(deg.resonances, 0.0, std::abs(opt.region) / 3.0);
        deg.projector = riesz_projector(sp.main.P[k], 0.0, radius, opt.quad_points);
        deg.basis = range_basis(deg.projector.pi, deg.projector.rank);
        c.ranks.push_back(deg.projector.rank);
        c.degrees.push_back(std::move(deg));
    }
    int total = 0;
    for (int r : c.ranks) total += r;
    if (total == 0) {
        c.empty = true;
        c.diagnostic = "no resonance at 0 in any degree; cohomology check skipped";
        c.cohomology.assign(n + 1, 0);
        return c;
    }
    std::vector<int> drank;
    for (int k = 0; k < n; ++k) {
        const CMatrix& B0 = c.degrees[k].basis;
        const CMatrix& B1 = c.degrees[k + 1].basis;
        CMatrix dB = sp.main.d[k] * B0;
        CMatrix D = B1.adjoint() * dB;
        double dn = std::max(dB.norm(), two_pi);
        if (B0.cols() > 0) c.intertwining_residual = std::max(c.intertwining_residual, (dB - B1 * D).norm() / dn);
        const CMatrix& p0 = c.degrees[k].projector.pi;
        const CMatrix& p1 = c.degrees[k + 1].projector.pi;
        CMatrix dense_d(sp.main.d[k]);
        double scale = dense_d.norm() * std::max(1.0, std::max(p0.norm(), p1.norm()));
        c.commutation_residual = std::max(c.commutation_residual, (dense_d * p0 - p1 * dense_d).norm() / scale);
        drank.push_back(numerical_rank(D, opt.rank_tol * std::max(two_pi, D.size() ? D.norm() : 0.0)));
        c.d.push_back(std::move(D));
    }
    for (int k = 0; k + 1 < n; ++k) {
        double dn = std::max(1.0, c.d[k].norm() * c.d[k + 1].norm());
        c.dd_residual = std::max(c.dd_residual, (c.d[k + 1] * c.d[k]).norm() / dn);
    }
    for (int k = 0; k <= n; ++k) {
        int h = c.ranks[k];
        if (k < n) h -= drank[k];
        if (k > 0) h -= drank[k - 1];
        c.cohomology.push_back(h);
    }
    return c;
}

// Random smooth form: Gaussian coefficients damped by exp(-|k|).
inline CVector random_smooth_form(const FormBasis& b, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    CVector u(b.size());
    for (int c = 0; c < b.components(); ++c)
        for (int i = 0; i < b.modes().size(); ++i)
            u[b.index(c, i)] = cplx(g(rng), g(rng)) * std::exp(-mode_norm(b.modes()[i]));
    return u;
}

struct HomotopyReport {
    std::vector<double> max_residual;  // per degree, relative to |u|
    int samples = 0;
    double worst() const {
        double w = 0.0;
        for (double r : max_residual) w = std::max(w, r);
        return w;
    }
};

// Hodge side on the flat torus: pi = projection on zero modes and
// R = d* Delta^{-1} (I - pi).
struct HodgeProjector {
    FormBasis basis;
    CMatrix pi;
    int rank = 0;
};

inline HodgeProjector hodge_projector(int dim, int k, int K) {
    HodgeProjector h{FormBasis(dim, k, K), CMatrix(), 0};
    const int n = h.basis.size();
    h.pi = CMatrix::Zero(n, n);
    int z = h.basis.modes().zero_index();
    for (int c = 0; c < h.basis.components(); ++c) h.pi(h.basis.index(c, z), h.basis.index(c, z)) = 1.0;
    h.rank = h.basis.components();
    return h;
}

// R_k: k-forms -> (k-1)-forms, R = d* Delta^+.
inline CSparse hodge_homotopy(int dim, int k, int K) {
    FormBasis b(dim, k, K);
    Eigen::VectorXd lap = laplacian_diagonal(b);
    Eigen::VectorXcd inv(lap.size());
    for (int i = 0; i < lap.size(); ++i) inv[i] = lap[i] > 0.0 ? 1.0 / lap[i] : 0.0;
    CSparse da = CSparse(exterior_derivative(dim, k - 1, K).adjoint());
    return da * diagonal_sparse(inv);
}

inline HomotopyReport hodge_identity_check(int dim, int K, int samples, std::uint64_t seed = 31) {
    HomotopyReport rep;
    rep.samples = samples;
    std::mt19937_64 rng(seed);
    for (int k = 0; k <= dim; ++k) {
        HodgeProjector h = hodge_projector(dim, k, K);
        double worst = 0.0;
        for (int s = 0; s < samples; ++s) {
            CVector u = random_smooth_form(h.basis, rng);
            CVector v = h.pi * u;
            if (k > 0) v += exterior_derivative(dim, k - 1, K) * (hodge_homotopy(dim, k, K) * u);
            if (k < dim) v += hodge_homotopy(dim, k + 1, K) * (exterior_derivative(dim, k, K) * u);
            worst = std::max(worst, (v - u).norm() / u.norm());
        }
        rep.max_residual.push_back(worst);
    }
    return rep;
}

// For closed u (u = d v + harmonic part) the least-squares residual of
// d w = u - pi u, relative to |u|.
inline double de_rham_exactness_residual(int dim, int k, int K, std::mt19937_64& rng) {
    if (k == 0) return 0.0;
    FormBasis prev(dim, k - 1, K), cur(dim, k, K);
    CSparse d = exterior_derivative(dim, k - 1, K);
    CVector v = random_smooth_form(prev, rng);
    HodgeProjector h = hodge_projector(dim, k, K);
    CVector u = d * v + h.pi * random_smooth_form(cur, rng);
    CVector rhs = u - h.pi * u;
    CMatrix D(d);
    CVector w = D.colPivHouseholderQr().solve(rhs);
    return (D * w - rhs).norm() / u.norm();
}

// Dynamical side: R_k = iota_k (-P_k)^{-1} (I - pi_k) with the conjugated
// operators, solved as (-P_k + pi_k) y = (I - pi_k) u.
inline HomotopyReport dynamical_identity_check(const SpectralComplex& c, const ConjugatedForms& f, int samples,
                                               std::uint64_t seed = 37) {
    HomotopyReport rep;
    rep.samples = samples;
    std::mt19937_64 rng(seed);
    const int n = f.dim;
    std::vector<Eigen::PartialPivLU<CMatrix>> solvers;
    for (int k = 0; k <= n; ++k) solvers.emplace_back(-f.P[k] + c.degrees[k].projector.pi);
    auto R = [&](int k, const CVector& u) -> CVector {
        const CMatrix& pi = c.degrees[k].projector.pi;
        CVector y = solvers[k].solve(u - pi * u);
        return f.iota[k] * y;
    };
    for (int k = 0; k <= n; ++k) {
        double worst = 0.0;
        for (int s = 0; s < samples; ++s) {
            CVector u = random_smooth_form(f.bases[k], rng);
            CVector v = c.degrees[k].projector.pi * u;
            if (k > 0) v += f.d[k - 1] * R(k, u);
            if (k < n) v += R(k + 1, f.d[k] * u);
            worst = std::max(worst, (v - u).norm() / u.norm());
        }
        rep.max_residual.push_back(worst);
    }
    return rep;
}

}  // namespace axioma

#endif
