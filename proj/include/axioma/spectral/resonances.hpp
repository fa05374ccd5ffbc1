#ifndef AXIOMA_SPECTRAL_RESONANCES_HPP
#define AXIOMA_SPECTRAL_RESONANCES_HPP

// Resonances by two-cutoff matching, Riesz projectors and the resolvent check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "axioma/invariant/smale_graph.hpp"
#include "axioma/spectral/quantize.hpp"

namespace axioma {

inline std::vector<cplx> eigenvalues(const CMatrix& P) {
    Eigen::ComplexEigenSolver<CMatrix> es(P, false);
    if (es.info() != Eigen::Success) throw NumericalDegeneracy("dense eigensolver failed");
    std::vector<cplx> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(out.begin(), out.end(), [](cplx a, cplx b) { return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag(); });
    return out;
}

// Smallest |Re rate| over the basic sets; 1 when there are none.
inline double lambda_scale(const std::vector<BasicSetRecord>& sets) {
    double lam = std::numeric_limits<double>::infinity();
    for (const auto& k : sets)
        for (const auto& r : k.rates)
            if (std::abs(r.real()) > 1e-12) lam = std::min(lam, std::abs(r.real()));
    return std::isfinite(lam) ? lam : 1.0;
}

struct Resonance {
    cplx value;
    int multiplicity = 1;
    bool matched = true;
};

struct ResonanceSet {
    std::vector<Resonance> values;  // matched clusters, sorted by decreasing real part
    std::vector<cplx> unmatched;    // in the region at the main cutoff but not at the other one
    std::vector<cplx> spectrum;     // every eigenvalue at the main cutoff
    double region = 0.0;            // Re z >= region
    double tol = 0.0;
    int cutoff = 0, check_cutoff = 0;
    std::string diagnostic;

    int count() const {
        int n = 0;
        for (const auto& r : values) n += r.multiplicity;
        return n;
    }
    // Matched resonance nearest to z, or nullptr.
    const Resonance* near(cplx z, double radius) const {
        const Resonance* best = nullptr;
        for (const auto& r : values)
            if (std::abs(r.value - z) <= radius && (!best || std::abs(r.value - z) < std::abs(best->value - z)))
                best = &r;
        return best;
    }
    // Distance from z to the nearest matched resonance farther than `exclude`.
    double gap(cplx z, double exclude) const {
        double g = std::numeric_limits<double>::infinity();
        for (const auto& r : values) {
            double d = std::abs(r.value - z);
            if (d > exclude) g = std::min(g, d);
        }
        return g;
    }
    // Same over every eigenvalue, spurious ones included.
    double spectral_gap(cplx z, double exclude) const {
        double g = gap(z, exclude);
        for (cplx e : spectrum) {
            double d = std::abs(e - z);
            if (d > exclude) g = std::min(g, d);
        }
        return g;
    }
};

// Keeps the eigenvalues of `main` in Re z >= region that have a partner in
// `check` within tol, then clusters them (single linkage at tol).
inline ResonanceSet match_resonances(const std::vector<cplx>& main, const std::vector<cplx>& check, double region,
                                     double tol) {
    ResonanceSet rs;
    rs.region = region;
    rs.tol = tol;
    std::vector<cplx> kept;
    std::vector<char> used(check.size(), 0);
    for (cplx z : main) {
        if (z.real() < region) continue;
        std::size_t best = check.size();
        double bd = tol;
        for (std::size_t j = 0; j < check.size(); ++j) {
            double d = std::abs(check[j] - z);
            if (!used[j] && d <= bd) {
                bd = d;
                best = j;
            }
        }
        if (best < check.size()) {
            used[best] = 1;
            kept.push_back(z);
        } else {
            rs.unmatched.push_back(z);
        }
    }
    std::vector<int> group(kept.size());
    std::iota(group.begin(), group.end(), 0);
    std::function<int(int)> root = [&](int i) { return group[i] == i ? i : group[i] = root(group[i]); };
    for (std::size_t i = 0; i < kept.size(); ++i)
        for (std::size_t j = i + 1; j < kept.size(); ++j)
            if (std::abs(kept[i] - kept[j]) <= tol) group[root(int(i))] = root(int(j));
    std::vector<int> seen;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        int r = root(int(i));
        if (std::find(seen.begin(), seen.end(), r) != seen.end()) continue;
        seen.push_back(r);
        cplx sum = 0.0;
        int n = 0;
        for (std::size_t j = 0; j < kept.size(); ++j)
            if (root(int(j)) == r) {
                sum += kept[j];
                ++n;
            }
        rs.values.push_back({sum / double(n), n, true});
    }
    std::sort(rs.values.begin(), rs.values.end(), [](const Resonance& a, const Resonance& b) {
        return a.value.real() != b.value.real() ? a.value.real() > b.value.real() : a.value.imag() > b.value.imag();
    });
    if (rs.values.empty()) rs.diagnostic = "no eigenvalue in Re z >= " + std::to_string(region) + " is stable across cutoffs";
    return rs;
}

inline ResonanceSet compute_resonances(const CMatrix& P, const CMatrix& P_check, double region, double tol) {
    auto ev = eigenvalues(P);
    ResonanceSet rs = match_resonances(ev, eigenvalues(P_check), region, tol);
    rs.spectrum = std::move(ev);
    return rs;
}

// Smaller cutoff of the matching pair.
inline int check_cutoff(int K) { return (3 * K) / 4; }

struct SpectralOptions {
    SymbolOptions symbol;
    QuantizeOptions quantize;
    ConjugationOptions conjugation;
    double scale = 0.0;  // weight scale c; 0 picks it from the conditioning target
};

// Conjugated operators at K and at the check cutoff, with one weight scale.
struct SpectralPair {
    ConjugatedForms main;
    ConjugatedForms check;
    double scale = 0.0;
    double condition = 1.0;  // measured condition number of A_0 at K
};

inline SpectralPair conjugate_pair(const VectorFieldSpec& spec, const OrderSymbol& m, int K,
                                   const SpectralOptions& opt = {}) {
    double c = opt.scale > 0.0 ? opt.scale : weight_scale(m, K, opt.quantize);
    SpectralPair sp{conjugate_forms(spec, m, K, c, opt.conjugation),
                    conjugate_forms(spec, m, check_cutoff(K), c, opt.conjugation), c, 1.0};
    CMatrix Q0(weight_generators(m, K, c)[0]);
    sp.condition = weight_matrix(Q0, opt.quantize).condition;
    return sp;
}

inline ResonanceSet resonances(const SpectralPair& sp, int k, double region, double tol) {
    ResonanceSet rs = compute_resonances(sp.main.P.at(k), sp.check.P.at(k), region, tol);
    rs.cutoff = sp.main.cutoff;
    rs.check_cutoff = sp.check.cutoff;
    return rs;
}

struct RieszResult {
    CMatrix pi;
    int rank = 0;            // singular values above 1/2 (nonzero ones of an idempotent are >= 1)
    double trace = 0.0;      // Re trace, equals the rank for a projector
    double idempotency = 0;  // |pi^2 - pi| / max(1, |pi|)
    int nilpotency = 0;      // smallest l with |(P - z0)^l pi| < 1e-6 |pi|; 0 for rank 0, -1 if not found
    double radius = 0.0;
};

// pi = (1/2 pi i) oint (z - P)^{-1} dz on |z - z0| = radius by the trapezoid rule.
inline RieszResult riesz_projector(const CMatrix& P, cplx z0, double radius, int quad_points = 32,
                                   double idempotency_tol = 1e-6) {
    if (!(radius > 0.0)) throw PreconditionError("Riesz contour radius must be positive");
    const int n = int(P.rows());
    RieszResult r;
    r.radius = radius;
    r.pi = CMatrix::Zero(n, n);
    CMatrix I = CMatrix::Identity(n, n);
    for (int j = 0; j < quad_points; ++j) {
        cplx e = std::polar(1.0, two_pi * (j + 0.5) / quad_points);
        cplx z = z0 + radius * e;
        Eigen::PartialPivLU<CMatrix> lu(z * I - P);
        r.pi += (radius * e / double(quad_points)) * lu.solve(I);
    }
    double norm = r.pi.norm();
    r.idempotency = (r.pi * r.pi - r.pi).norm() / std::max(1.0, norm);
    if (!(r.idempotency <= idempotency_tol))
        throw NumericalDegeneracy("Riesz projector is not idempotent (residual " + std::to_string(r.idempotency) +
                                  "); the contour passes too close to the spectrum");
    Eigen::JacobiSVD<CMatrix> svd(r.pi);
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] > 0.5) ++r.rank;
    r.trace = r.pi.trace().real();
    if (r.rank == 0) return r;
    CMatrix N = P - z0 * I;
    CMatrix Y = r.pi;
    r.nilpotency = -1;
    for (int l = 1; l <= r.rank + 1; ++l) {
        Y = N * Y;
        if (Y.norm() < 1e-6 * norm) {
            r.nilpotency = l;
            break;
        }
    }
    return r;
}

// Contour radius: a third of the distance from z0 to the nearest other
// eigenvalue, matched or not, so spurious eigenvalues stay off the contour.
inline double riesz_radius(const ResonanceSet& rs, cplx z0, double fallback) {
    double g = rs.spectral_gap(z0, rs.tol);
    return std::isfinite(g) ? g / 3.0 : fallback;
}

struct ResolventSample {
    cplx z;
    double norm = 0.0;
    double bound = 0.0;
    bool ok = false;
};

struct ResolventReport {
    double C0 = 0.0;
    std::vector<ResolventSample> samples;
    double numerical_abscissa = 0.0;  // max eigenvalue of (P + P*)/2
    bool passed = false;
};

// Checks |(z - P)^{-1}| <= 1/(Re z - C0), the resolvent of -L in the conjugated
// Euclidean norm, at z = C0 + offsets.
inline ResolventReport resolvent_norm_check(const CMatrix& P, double C0, const std::vector<double>& offsets) {
    ResolventReport rep;
    rep.C0 = C0;
    const int n = int(P.rows());
    CMatrix I = CMatrix::Identity(n, n);
    rep.passed = true;
    for (double o : offsets) {
        if (!(o > 0.1)) throw PreconditionError("resolvent samples need Re z > C0 + 0.1");
        ResolventSample s;
        s.z = C0 + o;
        Eigen::JacobiSVD<CMatrix> svd(s.z * I - P);
        double smin = svd.singularValues()[n - 1];
        s.norm = smin > 0.0 ? 1.0 / smin : std::numeric_limits<double>::infinity();
        s.bound = 1.0 / o;
        s.ok = s.norm <= s.bound;
        rep.passed = rep.passed && s.ok;
        rep.samples.push_back(s);
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> h((P + P.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
    rep.numerical_abscissa = h.eigenvalues().maxCoeff();
    return rep;
}

inline double spectral_abscissa(const ResonanceSet& rs) {
    double c = -std::numeric_limits<double>::infinity();
    for (const auto& r : rs.values) c = std::max(c, r.value.real());
    return c;
}

}  // namespace axioma

#endif
