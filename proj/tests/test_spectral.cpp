#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "axioma/escape/escape.hpp"
#include "axioma/spectral/complex.hpp"

using namespace axioma;
using Catch::Approx;

namespace {

const double pi = std::numbers::pi;
const double Lam = 4.0 * pi * pi;

// grad_cos1 with the pipeline order function for (u, 0, s) and K = 48.
struct Cos1Spectrum {
    VectorFieldSpec spec;
    SmaleGraph graph;
    OrderBuild order;
    OrderSymbol symbol;
    SpectralPair pair;

    explicit Cos1Spectrum(double s, const VectorFieldSpec& field = catalog_field("grad_cos1"))
        : spec(field),
          graph(build_smale_graph(find_fixed_points(spec, 32), spec)),
          order(build_order_function({-s, 0, s}, graph, spec)),
          symbol(order_symbol(order.order, 1)),
          pair(conjugate_pair(spec, symbol, 48)) {}

    ResonanceSet resonances(int k) const { return axioma::resonances(pair, k, -2.5 * Lam, 0.02 * Lam); }
};

const Cos1Spectrum& cos1() {
    static Cos1Spectrum c(8);
    return c;
}

double rel(const CMatrix& a, const CMatrix& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

// L_V on k-forms from the componentwise formulas, with V^j and its
// derivatives as multiplication matrices. Independent of the Cartan assembly.
CMatrix componentwise_lie(const VectorFieldSpec& spec, int k, int K) {
    const int n = spec.dim;
    ModeSet m(n, K);
    const int N = m.size();
    auto mult = [&](const TrigPoly& f) {
        CMatrix M = CMatrix::Zero(N, N);
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b) M(a, b) = f.coefficient({m[a][0] - m[b][0], m[a][1] - m[b][1]});
        return M;
    };
    auto deriv = [&](int j) {
        CMatrix D = CMatrix::Zero(N, N);
        for (int a = 0; a < N; ++a) D(a, a) = cplx(0.0, 2 * pi * m[a][j]);
        return D;
    };
    std::vector<CMatrix> V, dV[2];
    for (int j = 0; j < n; ++j) {
        TrigPoly p = spec.component_poly(j);
        V.push_back(mult(p));
        for (int i = 0; i < n; ++i) dV[i].push_back(mult(p.derivative(i)));
    }
    CMatrix transport = CMatrix::Zero(N, N);
    for (int j = 0; j < n; ++j) transport += V[j] * deriv(j);
    if (k == 0) return transport;
    if (k == n && n == 2) return transport + dV[0][0] + dV[1][1];
    if (n == 1) return transport + dV[0][0];
    // (L a)_i = V^j d_j a_i + a_j d_i V^j
    CMatrix L = CMatrix::Zero(2 * N, 2 * N);
    for (int i = 0; i < 2; ++i) {
        L.block(i * N, i * N, N, N) += transport;
        for (int j = 0; j < 2; ++j) L.block(i * N, j * N, N, N) += dV[i][j];
    }
    return L;
}

}  // namespace

TEST_CASE("form bases are component-major and lexicographic") {
    FormBasis b(2, 1, 3);
    CHECK(b.components() == 2);
    CHECK(b.size() == 2 * 49);
    CHECK(b.modes()[0] == Freq{-3, -3});
    CHECK(b.modes()[1] == Freq{-3, -2});
    CHECK(b.modes()[7] == Freq{-2, -3});
    CHECK(b.modes().index({1, 2}) == (1 + 3) * 7 + (2 + 3));
    CHECK(b.index(1, 0) == 49);
    CHECK(FormBasis(2, 2, 3).size() == 49);
    CHECK(FormBasis(1, 1, 5).size() == 11);
    CHECK(b.component_label(1) == "dy");
    CHECK_THROWS_AS(FormBasis(1, 2, 3), PreconditionError);
}

TEST_CASE("rotation generator is the diagonal multiplier") {
    auto spec = catalog_field("rotation", Vec2(1.0, std::sqrt(2.0)));
    CMatrix L = lie_derivative(spec, 0, 4);
    ModeSet m(2, 4);
    CMatrix D = CMatrix::Zero(m.size(), m.size());
    for (int a = 0; a < m.size(); ++a) D(a, a) = cplx(0.0, 2 * pi * (m[a][0] + std::sqrt(2.0) * m[a][1]));
    CHECK((L - D).norm() < 1e-12);
    CHECK(rel(assemble_lie_derivative(spec, 0, 4).P, -D) < 1e-15);
}

TEST_CASE("Cartan assembly matches the componentwise formulas") {
    for (const char* tag : {"grad_cos1", "grad_cos2", "t2_cancel_pair", "limit_cycle"}) {
        auto spec = catalog_field(tag);
        const int K = std::max(spec.max_frequency(), 5);
        for (int k = 0; k <= spec.dim; ++k) {
            INFO(tag << " k=" << k);
            CHECK(rel(lie_derivative(spec, k, K), componentwise_lie(spec, k, K)) < 1e-13);
        }
    }
}

TEST_CASE("Lie derivative intertwines d") {
    for (const char* tag : {"grad_cos1", "t2_cancel_pair"}) {
        auto spec = catalog_field(tag);
        const int K = 6;
        for (int k = 0; k < spec.dim; ++k) {
            CMatrix d(exterior_derivative(spec.dim, k, K));
            CMatrix lhs = lie_derivative(spec, k + 1, K) * d, rhs = d * lie_derivative(spec, k, K);
            CHECK((lhs - rhs).norm() <= 1e-12 * std::max(1.0, rhs.norm()));
        }
        if (spec.dim == 2) {
            CMatrix dd = CMatrix(exterior_derivative(2, 1, K)) * CMatrix(exterior_derivative(2, 0, K));
            CHECK(dd.norm() == 0.0);
        }
    }
}

TEST_CASE("cutoff below the field frequency is rejected") {
    auto spec = catalog_field("t2_cancel_pair");
    REQUIRE(spec.max_frequency() >= 2);
    CHECK_THROWS_AS(lie_derivative(spec, 0, spec.max_frequency() - 1), PreconditionError);
    CHECK_NOTHROW(lie_derivative(spec, 0, spec.max_frequency()));
}

TEST_CASE("raw truncation does not see the resonances") {
    // The truncated V d/dx is skew up to compression, so its spectrum sits on
    // the imaginary axis instead of at -Lam.
    auto spec = catalog_field("grad_cos1");
    auto rs = compute_resonances(assemble_lie_derivative(spec, 0, 32).P, assemble_lie_derivative(spec, 0, 24).P,
                                 -2.5 * Lam, 0.02 * Lam);
    CHECK(rs.near(-Lam, 0.1 * Lam) == nullptr);
    for (cplx z : rs.spectrum) CHECK(std::abs(z.real()) < 1e-6 * std::max(1.0, std::abs(z)));
}

TEST_CASE("quantized weights of simple symbols") {
    FormBasis b(1, 0, 6);
    auto zero = quantize_weight(b, [](const Vec2&, const Freq&) { return 0.0; });
    CHECK((zero.A - CMatrix::Identity(b.size(), b.size())).norm() < 1e-12);
    auto cst = quantize_weight(b, [](const Vec2&, const Freq&) { return 0.7; });
    CHECK((cst.A - std::exp(0.7) * CMatrix::Identity(b.size(), b.size())).norm() < 1e-12);
    CHECK_FALSE(cst.regularized);

    // x-independent G = m0 log <|k|> gives the Sobolev weight <|k|>^{m0}.
    FormBasis b2(2, 1, 3);
    const double m0 = 1.5;
    auto sob = quantize_weight(b2, [&](const Vec2&, const Freq& k) { return m0 * std::log(std::hypot(1.0, mode_norm(k))); });
    for (int c = 0; c < 2; ++c)
        for (int i = 0; i < b2.modes().size(); ++i) {
            int j = b2.index(c, i);
            CHECK(std::abs(sob.A(j, j) - std::pow(1.0 + std::pow(mode_norm(b2.modes()[i]), 2), m0 / 2)) < 1e-10);
        }
    CHECK((sob.A - CMatrix(sob.A.diagonal().asDiagonal())).norm() < 1e-10);
}

TEST_CASE("weight matrix regularization and conditioning limit") {
    FormBasis b(1, 0, 2);
    CMatrix Q = CMatrix::Zero(b.size(), b.size());
    Q(0, 0) = -30.0;  // sigma_min / sigma_max = e^-30 < 1e-10
    QuantizeOptions loose;
    loose.cond_limit = 1e20;
    auto w = weight_matrix(Q, loose);
    CHECK(w.regularized);
    CHECK(w.epsilon == Approx(1e-8));
    CHECK(w.condition == Approx(1e8).epsilon(1e-3));
    CHECK_THROWS_AS(weight_matrix(Q, QuantizeOptions{0.025, 1e12, 1e6}), NumericalDegeneracy);
}

TEST_CASE("conjugation by a weight matrix is a similarity") {
    auto spec = catalog_field("grad_cos1");
    auto raw = assemble_lie_derivative(spec, 0, 10);
    CMatrix I = CMatrix::Identity(raw.P.rows(), raw.P.cols());
    CHECK(rel(conjugated_generator(raw, I).P, raw.P) < 1e-15);
    FormBasis b(1, 0, 10);
    auto w = quantize_weight(b, [](const Vec2& x, const Freq& k) {
        return 0.5 * std::cos(2 * pi * x[0]) * std::log(std::hypot(1.0, mode_norm(k)));
    });
    auto P = conjugated_generator(raw, w.A);
    CHECK(P.kind == GeneratorKind::conjugated);
    CHECK(std::abs(P.P.trace() - raw.P.trace()) <= 1e-6 * std::max(1.0, std::abs(raw.P.trace())));
}

TEST_CASE("weight generators commute with d") {
    auto m = OrderSymbol::from_coefficients(2, 1, {{{1, 0}, 2.0}, {{-1, 0}, 2.0}, {{0, 1}, cplx(0, 1.5)}, {{0, -1}, cplx(0, -1.5)}});
    const int K = 5;
    auto Q = weight_generators(m, K, 0.05);
    CSparse d0 = exterior_derivative(2, 0, K), d1 = exterior_derivative(2, 1, K);
    CMatrix a = CMatrix(Q[1] * d0) - CMatrix(d0 * Q[0]);
    CMatrix b = CMatrix(d1 * Q[1]) - CMatrix(Q[2] * d1);
    CHECK(a.norm() <= 1e-12 * CMatrix(d0 * Q[0]).norm());
    CHECK(b.norm() <= 1e-12 * CMatrix(Q[2] * d1).norm());
    // The zero mode is untouched.
    ModeSet modes(2, K);
    CHECK(CMatrix(Q[0]).col(modes.zero_index()).norm() == 0.0);
}

TEST_CASE("order symbol keeps the low x-frequencies") {
    auto s = OrderSymbol::sample(
        1, [](const Vec2& x, double th) { return (th < 0.25 ? 3.0 : 1.0) * std::cos(2 * pi * x[0]) + std::sin(10 * pi * x[0]); },
        SymbolOptions{3, 32, 16});
    CHECK(std::abs(s.coefficient({1, 0}, 0.0) - 1.5) < 1e-12);
    CHECK(std::abs(s.coefficient({-1, 0}, 0.5) - 0.5) < 1e-12);
    CHECK(std::abs(s.coefficient({5, 0}, 0.0)) == 0.0);
    CHECK(s.value(Vec2(0.0, 0.0), 0.0) == Approx(3.0));
    CHECK(s.max_abs() == Approx(3.0).epsilon(1e-6));
}

TEST_CASE("weight scale follows the conditioning target") {
    auto small = OrderSymbol::from_coefficients(1, 1, {{{1, 0}, 4.0}, {{-1, 0}, 4.0}});
    auto big = OrderSymbol::from_coefficients(1, 1, {{{1, 0}, 8.0}, {{-1, 0}, 8.0}});
    double c1 = weight_scale(small, 48), c2 = weight_scale(big, 48);
    CHECK(c1 <= 0.025);
    CHECK(c2 < c1);
    // At the chosen scale the estimate exp(2 max|m| w) meets the target.
    double w = weight_radial({48, 0}, c2);
    CHECK(std::exp(2 * big.max_abs() * w) == Approx(1e12).epsilon(1e-6));
    CHECK(weight_scale(OrderSymbol::from_coefficients(1, 1, {}), 48) == 0.025);
}

TEST_CASE("grad_cos1 resonances sit on the linear lattice") {
    const auto& c = cos1();
    CHECK(c.pair.condition <= 1e12);
    for (int k = 0; k < 2; ++k) {
        auto rs = c.resonances(k);
        INFO("degree " << k);
        const Resonance* z0 = rs.near(0.0, 0.02 * Lam);
        REQUIRE(z0 != nullptr);
        CHECK(z0->multiplicity == 1);
        CHECK(std::abs(z0->value) < 1e-8);
        const Resonance* z1 = rs.near(-Lam, 0.1 * Lam);
        REQUIRE(z1 != nullptr);
        CHECK(z1->value.real() == Approx(-Lam).epsilon(1e-4));
        const Resonance* z2 = rs.near(-2 * Lam, 0.1 * Lam);
        REQUIRE(z2 != nullptr);
        CHECK(z2->value.real() == Approx(-2 * Lam).epsilon(1e-3));
        // Closed under conjugation.
        for (const auto& r : rs.values) CHECK(rs.near(std::conj(r.value), rs.tol) != nullptr);
    }
}

TEST_CASE("rotation resonances lie on the imaginary lattice") {
    auto spec = catalog_field("rotation", Vec2(1.0, std::sqrt(2.0)));
    auto zero = OrderSymbol::from_coefficients(2, 0, {}, 4);
    auto sp = conjugate_pair(spec, zero, 4);
    auto rs = resonances(sp, 0, -1.0, 0.02);
    CHECK(rs.count() == 49);  // the modes common to both cutoffs
    for (cplx z : rs.spectrum) {
        CHECK(std::abs(z.real()) < 1e-10);
        double t = z.imag() / (2 * pi);  // k1 + sqrt(2) k2
        bool on = false;
        for (int k2 = -4; k2 <= 4; ++k2) {
            double k1 = t - std::sqrt(2.0) * k2;
            if (std::abs(k1 - std::round(k1)) < 1e-9 && std::abs(std::round(k1)) <= 4) on = true;
        }
        CHECK(on);
    }
}

TEST_CASE("Riesz projectors at and away from resonances") {
    const auto& c = cos1();
    auto rs = c.resonances(0);
    double r = riesz_radius(rs, 0.0, 1.0);
    CHECK(r == Approx(Lam / 3).epsilon(1e-3));
    auto p = riesz_projector(c.pair.main.P[0], 0.0, r);
    CHECK(p.rank == 1);
    CHECK(p.trace == Approx(1.0).epsilon(1e-9));
    CHECK(p.nilpotency == 1);
    CHECK(p.idempotency <= 1e-6);

    auto none = riesz_projector(c.pair.main.P[0], -Lam / 2, Lam / 6);
    CHECK(none.rank == 0);
    CHECK(none.pi.norm() < 1e-8);

    auto p1 = riesz_projector(c.pair.main.P[1], 0.0, r);
    CMatrix d(c.pair.main.d[0]);
    CHECK((d * p.pi - p1.pi * d).norm() <= 1e-6 * d.norm() * p.pi.norm());

    // A contour with a node on an eigenvalue gives no projector.
    cplx node = std::polar(Lam / 3, pi / 32);
    CHECK_THROWS_AS(riesz_projector(c.pair.main.P[0], cplx(-Lam + 1e-7) - node, Lam / 3), NumericalDegeneracy);
}

TEST_CASE("d maps the generalized eigenspaces at -Lam into each other") {
    const auto& c = cos1();
    double r = Lam / 3;
    auto p0 = riesz_projector(c.pair.main.P[0], -Lam, r);
    auto p1 = riesz_projector(c.pair.main.P[1], -Lam, r);
    CHECK(p0.rank == 2);
    CHECK(p1.rank == 2);
    CMatrix B0 = range_basis(p0.pi, p0.rank), B1 = range_basis(p1.pi, p1.rank);
    CMatrix dB = c.pair.main.d[0] * B0;
    CHECK((dB - B1 * (B1.adjoint() * dB)).norm() <= 1e-6 * dB.norm());
    CHECK(dB.norm() > 1.0);
}

TEST_CASE("T1 spectral complex has the cohomology of the circle") {
    const auto& c = cos1();
    ComplexOptions opt;
    opt.region = -2.5 * Lam;
    opt.tol = 0.02 * Lam;
    auto cx = build_spectral_complex(c.pair, opt);
    CHECK_FALSE(cx.empty);
    CHECK(cx.ranks == std::vector<int>{1, 1});
    CHECK(cx.cohomology == betti_numbers(1));
    CHECK(cx.commutation_residual <= 1e-8);
    CHECK(cx.intertwining_residual <= 1e-8);
    CHECK(cx.dd_residual <= 1e-8);

    // Shifting the generator left removes the resonance at 0.
    SpectralPair shifted = c.pair;
    for (auto* f : {&shifted.main, &shifted.check})
        for (auto& P : f->P) P -= 5.0 * CMatrix::Identity(P.rows(), P.cols());
    opt.radius = 2.0;
    auto e = build_spectral_complex(shifted, opt);
    CHECK(e.empty);
    CHECK(e.cohomology == std::vector<int>{0, 0});
    CHECK_FALSE(e.diagnostic.empty());
}

TEST_CASE("dynamical homotopy identity on T1") {
    const auto& c = cos1();
    ComplexOptions opt;
    opt.region = -2.5 * Lam;
    opt.tol = 0.02 * Lam;
    auto cx = build_spectral_complex(c.pair, opt);
    auto rep = dynamical_identity_check(cx, c.pair.main, 20);
    REQUIRE(rep.max_residual.size() == 2);
    CHECK(rep.worst() <= 1e-6);
}

TEST_CASE("Hodge projector and homotopy on the flat torus") {
    CHECK(hodge_projector(2, 0, 4).rank == 1);
    CHECK(hodge_projector(2, 1, 4).rank == 2);
    CHECK(hodge_projector(2, 2, 4).rank == 1);
    CHECK(hodge_projector(1, 1, 4).rank == 1);
    for (int dim : {1, 2}) {
        auto rep = hodge_identity_check(dim, 6, 20);
        REQUIRE(int(rep.max_residual.size()) == dim + 1);
        CHECK(rep.worst() <= 1e-10);
    }
    std::mt19937_64 rng(2);
    for (int k : {1, 2}) CHECK(de_rham_exactness_residual(2, k, 5, rng) <= 1e-8);
    // A harmonic form is not exact.
    FormBasis b(2, 1, 3);
    CVector h = CVector::Zero(b.size());
    h[b.index(0, b.modes().zero_index())] = 1.0;
    CMatrix D(exterior_derivative(2, 0, 3));
    CVector w = D.colPivHouseholderQr().solve(h);
    CHECK((D * w - h).norm() == Approx(1.0));
}

TEST_CASE("resonances do not depend on the escape parameters") {
    Cos1Spectrum big(16);
    auto a = cos1().resonances(0), b = big.resonances(0);
    const double tol = 0.02 * Lam;
    int compared = 0;
    for (const auto* pr : {&a, &b}) {
        const auto& other = pr == &a ? b : a;
        for (const auto& r : pr->values) {
            if (r.value.real() < -1.5 * Lam) continue;
            const Resonance* q = other.near(r.value, tol);
            REQUIRE(q != nullptr);
            CHECK(q->multiplicity == r.multiplicity);
            ++compared;
        }
    }
    CHECK(compared >= 4);
    CHECK(big.pair.scale < cos1().pair.scale);
}

TEST_CASE("top-degree duality with the reversed field") {
    // Raw: L_{-V} on top forms is the transpose of L_V on functions after k -> -k.
    auto spec = catalog_field("t2_cancel_pair");
    const int K = 4;
    CMatrix L0 = lie_derivative(spec, 0, K), L2 = lie_derivative(spec.reversed(), 2, K);
    ModeSet m(2, K);
    CMatrix J = CMatrix::Zero(m.size(), m.size());
    for (int a = 0; a < m.size(); ++a) J(m.index({-m[a][0], -m[a][1]}), a) = 1.0;
    CHECK(rel(L2, J * L0.transpose() * J) < 1e-13);

    // Resonances: k = 0 for V equals k = 1 for -V on T^1.
    Cos1Spectrum rev(8, catalog_field("grad_cos1").reversed());
    auto a = cos1().resonances(0), b = rev.resonances(1);
    REQUIRE(a.values.size() == b.values.size());
    for (const auto& r : a.values) {
        const Resonance* q = b.near(r.value, a.tol);
        REQUIRE(q != nullptr);
        CHECK(q->multiplicity == r.multiplicity);
    }
}

TEST_CASE("resolvent report") {
    const auto& c = cos1();
    const CMatrix& P = c.pair.main.P[0];
    auto big = resolvent_norm_check(P, 0.05, {1e6});
    CHECK(big.samples[0].norm == Approx(1e-6).epsilon(0.1));
    auto rep = resolvent_norm_check(P, 0.05, {0.2, 1.0, 5.0});
    REQUIRE(rep.samples.size() == 3);
    CHECK(rep.samples[1].bound == Approx(1.0));
    CHECK(rep.samples[0].bound == Approx(5.0));
    // Each norm is at least 1/dist(z, spectrum).
    for (const auto& s : rep.samples) CHECK(s.norm >= 1.0 / std::abs(s.z) * (1 - 1e-9));
    CHECK_THROWS_AS(resolvent_norm_check(P, 0.05, {0.05}), PreconditionError);
}
