#ifndef AXIOMA_MORSE_MORSE_COMPLEX_HPP
#define AXIOMA_MORSE_MORSE_COMPLEX_HPP

// Morse complex of a gradient field V = -grad f on T^1 or T^2: critical points
// graded by Morse index, signed flow-line counts n(x, y), integer homology.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "axioma/invariant/smale_graph.hpp"
#include "axioma/spectral/complex.hpp"

namespace axioma {

class NotMorse : public CheckFailure {
public:
    explicit NotMorse(const std::string& what) : CheckFailure("not a Morse function: " + what) {}
};

using IntMatrix = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;

struct MorseGenerator {
    int set_id = -1;
    Vec2 x = Vec2::Zero();
    int index = 0;        // Morse index of f = dim of the descending manifold
    double value = 0.0;   // f(x)
    Vec2 orientation = Vec2::Zero();  // descending direction for index 1; zero otherwise
};

// Critical points of f by index. The descending manifold of an index-k point
// (its unstable manifold under V) is k-dimensional.
inline std::vector<MorseGenerator> critical_points(const VectorFieldSpec& spec, int grid_density = 32) {
    if (!spec.is_gradient()) throw PreconditionError("field '" + spec.tag + "' is not tagged as a gradient");
    std::vector<BasicSetRecord> sets;
    try {
        sets = find_fixed_points(spec, grid_density);
    } catch (const NotAxiomA& e) {
        throw NotMorse(std::string("degenerate critical point (") + e.what() + ")");
    }
    if (sets.empty()) throw NotMorse("no critical points found");
    std::vector<MorseGenerator> out;
    for (const auto& k : sets) {
        MorseGenerator g;
        g.set_id = k.id;
        g.x = k.location.c;
        g.index = k.index;
        g.value = evaluate_potential(spec, g.x);
        if (g.index == 1) g.orientation = canonical_direction(k.unstable_dirs.at(0));
        out.push_back(g);
    }
    return out;
}

struct FlowLine {
    int from = -1;  // generator of index k
    int to = -1;    // generator of index k - 1
    int sign = 0;
    Vec2 seed = Vec2::Zero();  // point of the line at distance offset from the end that was shot from
    double frame_det = 0.0;    // normalised determinant that fixed the sign
};

struct MorseOptions {
    ShootingOptions shooting;
    // Outward-first boundary convention (+1) or its reverse (-1); the reverse
    // flips every n(x, y).
    int convention = 1;
    double degenerate_det = 1e-8;
};

struct MorseComplex {
    int dim = 1;
    std::vector<MorseGenerator> generators;
    std::vector<std::vector<int>> by_index;  // generator positions of each index
    std::vector<IntMatrix> boundary;         // boundary[k]: C_k -> C_{k-1}, k = 1..n (boundary[0] empty)
    std::vector<FlowLine> lines;
    std::vector<int> homology;
    std::vector<std::vector<long long>> torsion;  // invariant factors > 1 of each boundary map

    int count(int k) const { return int(by_index.at(k).size()); }
};

namespace detail {

inline int generator_at(const std::vector<MorseGenerator>& g, int set_id) {
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g[i].set_id == set_id) return int(i);
    return -1;
}

}  // namespace detail

// Flow lines between index-adjacent critical points by separatrix shooting.
// Index 1 -> 0: the two descending branches x +- offset e of an index-1 point,
// signed by <V, e> (e is the chosen orientation). Index 2 -> 1 on T^2: the two
// ascending branches y +- offset e_s of a saddle y, traced under -V to a
// maximum, signed by det[V, e_u(y)] at the seed. The determinant of two
// vectors carried by the linearised flow keeps its sign (Liouville), so this
// equals the sign at any section of the line, the midpoint included.
inline std::vector<FlowLine> instanton_lines(const std::vector<MorseGenerator>& gens, const VectorFieldSpec& spec,
                                             const MorseOptions& opt = {}) {
    std::vector<BasicSetRecord> sets;
    for (const auto& g : gens) sets.push_back(classify_fixed_point(spec, g.x));
    for (std::size_t i = 0; i < sets.size(); ++i) sets[i].id = gens[i].set_id;
    const double delta = opt.shooting.offset;
    std::vector<FlowLine> out;
    auto reached = [&](const ShotOutcome& o, int want_index, const Vec2& seed) {
        int j = o.reached < 0 ? -1 : detail::generator_at(gens, o.reached);
        if (j < 0)
            throw CheckFailure("flow line from (" + std::to_string(seed[0]) + ", " + std::to_string(seed[1]) +
                               ") did not settle at a critical point");
        if (gens[j].index != want_index)
            throw CheckFailure("flow line from (" + std::to_string(seed[0]) + ", " + std::to_string(seed[1]) +
                               ") ends at a critical point of index " + std::to_string(gens[j].index) +
                               "; transversality fails (connection between equal indices)");
        return j;
    };
    VectorFieldSpec back = spec.reversed();
    for (std::size_t i = 0; i < gens.size(); ++i) {
        const auto& g = gens[i];
        if (g.index == 1) {
            for (int s : {1, -1}) {
                Vec2 seed = g.x + s * delta * g.orientation;
                ShotOutcome o = detail::shoot(spec, sets, seed, g.set_id, opt.shooting);
                int j = reached(o, 0, seed);
                Vec2 v = evaluate_field(spec, seed).v;
                double c = v.dot(g.orientation) / std::max(v.norm(), 1e-300);
                if (std::abs(c) < opt.degenerate_det)
                    throw CheckFailure("unresolved sign on the line from generator " + std::to_string(i));
                out.push_back({int(i), j, opt.convention * (c > 0 ? 1 : -1), seed, c});
            }
        }
        if (g.index == 1 && spec.dim == 2) {
            const auto& rec = sets[i];
            Vec2 es = rec.stable_dirs.at(0).normalized();
            for (int s : {1, -1}) {
                Vec2 seed = g.x + s * delta * es;
                ShotOutcome o = detail::shoot(back, sets, seed, g.set_id, opt.shooting);
                int j = reached(o, 2, seed);
                Vec2 v = evaluate_field(spec, seed).v;
                double det = v[0] * g.orientation[1] - v[1] * g.orientation[0];
                det /= std::max(v.norm(), 1e-300);
                if (std::abs(det) < opt.degenerate_det)
                    throw CheckFailure("unresolved sign on the line into generator " + std::to_string(i) +
                                       ": orientation frames nearly degenerate");
                out.push_back({j, int(i), opt.convention * (det > 0 ? 1 : -1), seed, det});
            }
        }
    }
    return out;
}

// Smith normal form diagonal of an integer matrix (nonzero entries only).
inline std::vector<long long> smith_diagonal(IntMatrix A) {
    std::vector<long long> diag;
    const int m = int(A.rows()), n = int(A.cols());
    int t = 0;
    while (t < m && t < n) {
        // Pivot: smallest nonzero magnitude in the remaining block.
        int pi = -1, pj = -1;
        for (int i = t; i < m; ++i)
            for (int j = t; j < n; ++j)
                if (A(i, j) != 0 && (pi < 0 || std::llabs(A(i, j)) < std::llabs(A(pi, pj)))) {
                    pi = i;
                    pj = j;
                }
        if (pi < 0) break;
        A.row(t).swap(A.row(pi));
        A.col(t).swap(A.col(pj));
        bool clean = false;
        while (!clean) {
            clean = true;
            for (int i = t + 1; i < m; ++i) {
                long long q = A(i, t) / A(t, t);
                A.row(i) -= q * A.row(t);
                if (A(i, t) != 0) {
                    A.row(t).swap(A.row(i));
                    clean = false;
                }
            }
            for (int j = t + 1; j < n; ++j) {
                long long q = A(t, j) / A(t, t);
                A.col(j) -= q * A.col(t);
                if (A(t, j) != 0) {
                    A.col(t).swap(A.col(j));
                    clean = false;
                }
            }
            if (clean) {
                // Divisibility: the pivot must divide the rest of the block.
                for (int i = t + 1; i < m && clean; ++i)
                    for (int j = t + 1; j < n; ++j)
                        if (A(i, j) % A(t, t) != 0) {
                            A.row(t) += A.row(i);
                            clean = false;
                            break;
                        }
            }
        }
        diag.push_back(std::llabs(A(t, t)));
        ++t;
    }
    return diag;
}

inline std::vector<int> morse_homology(MorseComplex& c) {
    const int n = c.dim;
    std::vector<int> rank(n + 2, 0);
    c.torsion.assign(n + 1, {});
    for (int k = 1; k <= n; ++k) {
        auto d = smith_diagonal(c.boundary[k]);
        rank[k] = int(d.size());
        for (long long v : d)
            if (v > 1) c.torsion[k].push_back(v);
    }
    c.homology.clear();
    for (int k = 0; k <= n; ++k) c.homology.push_back(c.count(k) - rank[k] - rank[k + 1]);
    return c.homology;
}

// Exact integer check of d_{k-1} d_k = 0.
inline bool boundary_squares_to_zero(const MorseComplex& c) {
    for (int k = 2; k <= c.dim; ++k) {
        IntMatrix p = c.boundary[k - 1] * c.boundary[k];
        if (p.size() && p.cwiseAbs().maxCoeff() != 0) return false;
    }
    return true;
}

inline MorseComplex morse_complex(const VectorFieldSpec& spec, const MorseOptions& opt = {}) {
    MorseComplex c;
    c.dim = spec.dim;
    c.generators = critical_points(spec);
    c.by_index.assign(c.dim + 1, {});
    for (std::size_t i = 0; i < c.generators.size(); ++i) c.by_index.at(c.generators[i].index).push_back(int(i));
    c.lines = instanton_lines(c.generators, spec, opt);
    c.boundary.assign(c.dim + 1, IntMatrix());
    for (int k = 1; k <= c.dim; ++k) c.boundary[k] = IntMatrix::Zero(c.count(k - 1), c.count(k));
    auto pos = [&](int k, int g) {
        const auto& v = c.by_index[k];
        return int(std::find(v.begin(), v.end(), g) - v.begin());
    };
    for (const auto& l : c.lines) {
        int k = c.generators[l.from].index;
        c.boundary[k](pos(k - 1, l.to), pos(k, l.from)) += l.sign;
    }
    if (!boundary_squares_to_zero(c)) throw CheckFailure("Morse boundary does not square to zero");
    morse_homology(c);
    return c;
}

struct ComparisonCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ComparisonReport {
    bool skipped = false;
    std::string diagnostic;
    std::vector<ComparisonCheck> checks;
    bool passed() const {
        if (skipped) return true;
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
};

inline std::string dims_string(const std::vector<int>& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s + ")";
}

inline ComparisonReport compare_with_spectral(const MorseComplex& morse, const SpectralComplex& spectral) {
    ComparisonReport r;
    if (spectral.empty) {
        r.skipped = true;
        r.diagnostic = "spectral complex is empty (" + spectral.diagnostic + "); comparison skipped";
        return r;
    }
    r.checks.push_back({"cohomology equals Morse homology", spectral.cohomology == morse.homology,
                        "spectral " + dims_string(spectral.cohomology) + ", Morse " + dims_string(morse.homology)});
    bool ge = spectral.ranks.size() == morse.homology.size();
    for (std::size_t k = 0; ge && k < spectral.ranks.size(); ++k) ge = spectral.ranks[k] >= morse.homology[k];
    r.checks.push_back({"dim C^k(0) >= cohomology", ge, "ranks " + dims_string(spectral.ranks)});
    bool kernel = !spectral.ranks.empty() && spectral.ranks[0] >= 1;
    r.checks.push_back({"dim Ker L^(0) >= b0", kernel, "dim C^0(0) = " + std::to_string(spectral.ranks.empty() ? 0 : spectral.ranks[0])});
    return r;
}

}  // namespace axioma

#endif
