#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "axioma/escape/escape.hpp"
#include "axioma/morse/morse_complex.hpp"

using namespace axioma;

namespace {

const double Lam = 4.0 * std::numbers::pi * std::numbers::pi;

int count_index(const MorseComplex& c, int k) {
    int n = 0;
    for (const auto& g : c.generators) n += g.index == k;
    return n;
}

// Rank of a small integer matrix over Q.
int int_rank(const IntMatrix& m) {
    if (m.size() == 0) return 0;
    Eigen::MatrixXd d = m.cast<double>();
    return int(Eigen::FullPivLU<Eigen::MatrixXd>(d).rank());
}

}  // namespace

TEST_CASE("generators are graded by the Morse index of f") {
    auto c1 = morse_complex(catalog_field("grad_cos1"));
    REQUIRE(c1.generators.size() == 2);
    for (const auto& g : c1.generators) {
        // f = cos 2 pi x: maximum at 0 (index 1), minimum at 1/2 (index 0).
        if (g.index == 1) CHECK(g.value == Catch::Approx(1.0));
        if (g.index == 0) CHECK(g.value == Catch::Approx(-1.0));
    }
    auto c2 = morse_complex(catalog_field("grad_cos2"));
    CHECK(count_index(c2, 0) == 1);
    CHECK(count_index(c2, 1) == 2);
    CHECK(count_index(c2, 2) == 1);
    auto t = morse_complex(catalog_field("t2_cancel_pair"));
    CHECK(count_index(t, 0) == 1);
    CHECK(count_index(t, 1) == 3);
    CHECK(count_index(t, 2) == 2);
    // Euler characteristic of the torus is 0.
    for (const auto* c : {&c1, &c2, &t}) {
        int chi = 0;
        for (int k = 0; k <= c->dim; ++k) chi += (k % 2 ? -1 : 1) * c->count(k);
        CHECK(chi == 0);
    }
}

TEST_CASE("grad_cos1 has zero boundary and the homology of the circle") {
    auto c = morse_complex(catalog_field("grad_cos1"));
    REQUIRE(c.boundary[1].rows() == 1);
    REQUIRE(c.boundary[1].cols() == 1);
    CHECK(c.boundary[1](0, 0) == 0);
    CHECK(c.lines.size() == 2);
    CHECK(c.homology == std::vector<int>{1, 1});
}

TEST_CASE("grad_cos2 has zero boundaries and the homology of the torus") {
    auto c = morse_complex(catalog_field("grad_cos2"));
    CHECK(c.lines.size() == 8);
    for (int k = 1; k <= 2; ++k) CHECK((c.boundary[k].size() == 0 || c.boundary[k].cwiseAbs().maxCoeff() == 0));
    CHECK(c.homology == std::vector<int>{1, 2, 1});
}

TEST_CASE("t2_cancel_pair has a cancelling pair and the homology of the torus") {
    auto c = morse_complex(catalog_field("t2_cancel_pair"));
    CHECK(c.boundary[2].cwiseAbs().maxCoeff() == 1);
    CHECK(int_rank(c.boundary[2]) == 1);
    CHECK(boundary_squares_to_zero(c));
    CHECK(c.homology == std::vector<int>{1, 2, 1});
    for (const auto& t : c.torsion) CHECK(t.empty());
    for (const auto& l : c.lines) CHECK(std::abs(l.sign) == 1);
}

TEST_CASE("degenerate critical points are rejected") {
    CHECK_THROWS_AS(morse_complex(catalog_field("flat_constant")), NotMorse);
    try {
        morse_complex(catalog_field("flat_constant"));
    } catch (const NotMorse& e) {
        CHECK(std::string(e.what()).find("not a Morse function") != std::string::npos);
        CHECK(e.code() == ExitCode::check_failure);
    }
    CHECK_THROWS_AS(morse_complex(catalog_field("rotation")), PreconditionError);
}

TEST_CASE("Smith normal form") {
    IntMatrix a(2, 2);
    a << 2, 4, 6, 8;
    CHECK(smith_diagonal(a) == std::vector<long long>{2, 4});
    IntMatrix b(3, 3);
    b << 2, 0, 0, 0, 3, 0, 0, 0, 0;
    CHECK(smith_diagonal(b) == std::vector<long long>{1, 6});
    IntMatrix z = IntMatrix::Zero(2, 3);
    CHECK(smith_diagonal(z).empty());
    IntMatrix e(1, 2);
    e << 1, -1;
    CHECK(smith_diagonal(e) == std::vector<long long>{1});
}

TEST_CASE("torsion is reported from the invariant factors") {
    MorseComplex c;
    c.dim = 1;
    c.by_index = {{0}, {1}};
    c.boundary = {IntMatrix(), IntMatrix::Constant(1, 1, 2)};
    morse_homology(c);
    CHECK(c.homology == std::vector<int>{0, 0});
    CHECK(c.torsion[1] == std::vector<long long>{2});
}

TEST_CASE("reversing the orientation convention flips every incidence") {
    MorseOptions rev;
    rev.convention = -1;
    for (auto tag : {"grad_cos1", "grad_cos2", "t2_cancel_pair"}) {
        auto spec = catalog_field(tag);
        auto a = morse_complex(spec);
        auto b = morse_complex(spec, rev);
        for (int k = 1; k <= a.dim; ++k) CHECK(b.boundary[k] == IntMatrix(-a.boundary[k]));
        CHECK(a.homology == b.homology);
    }
}

TEST_CASE("the sign at the seed agrees with the sign at the middle of the line") {
    auto spec = catalog_field("t2_cancel_pair");
    auto c = morse_complex(spec);
    int checked = 0;
    for (const auto& l : c.lines) {
        if (c.generators[l.from].index != 2) continue;
        const auto& y = c.generators[l.to];
        // Carry the saddle's unstable direction back along the line with the
        // linearised flow and read the orientation where |V| is largest.
        double best = 0.0;
        int sign = 0;
        for (double t : {0.05, 0.1, 0.15, 0.2, 0.25, 0.3}) {
            auto fj = flow_jacobian(spec, TorusPoint(2, l.seed), -t);
            Vec2 v = evaluate_field(spec, fj.x).v;
            Vec2 e = (fj.jacobian * y.orientation).normalized();
            double det = v[0] * e[1] - v[1] * e[0];
            if (v.norm() > best) {
                best = v.norm();
                sign = det > 0 ? 1 : -1;
                REQUIRE(std::abs(det) > 1e-3 * v.norm());
            }
        }
        CHECK(best > 1.0);
        CHECK(sign == l.sign);
        ++checked;
    }
    CHECK(checked == 6);
}

TEST_CASE("boundary squares to zero on every catalog gradient") {
    for (auto tag : {"grad_cos1", "grad_cos2", "t2_cancel_pair"}) {
        auto c = morse_complex(catalog_field(tag));
        CHECK(boundary_squares_to_zero(c));
        IntMatrix dd = c.dim == 2 ? IntMatrix(c.boundary[1] * c.boundary[2]) : IntMatrix();
        if (dd.size()) CHECK(dd.cwiseAbs().maxCoeff() == 0);
    }
}

TEST_CASE("the reversed field has complementary indices and the same homology") {
    for (auto tag : {"grad_cos1", "grad_cos2", "t2_cancel_pair"}) {
        auto spec = catalog_field(tag);
        auto a = morse_complex(spec);
        auto b = morse_complex(spec.reversed());
        for (int k = 0; k <= a.dim; ++k) CHECK(a.count(k) == b.count(a.dim - k));
        CHECK(a.homology == b.homology);
        // Dual boundary is the transpose up to signs.
        for (int k = 1; k <= a.dim; ++k)
            CHECK(int_rank(a.boundary[k]) == int_rank(b.boundary[a.dim + 1 - k]));
    }
}

TEST_CASE("Morse homology matches the spectral complex on grad_cos1") {
    auto spec = catalog_field("grad_cos1");
    auto graph = build_smale_graph(find_fixed_points(spec, 32), spec);
    auto order = build_order_function({-8, 0, 8}, graph, spec);
    auto sp = conjugate_pair(spec, order_symbol(order.order, 1), 48);
    ComplexOptions opt;
    opt.region = -2.5 * Lam;
    opt.tol = 0.02 * Lam;
    auto spectral = build_spectral_complex(sp, opt);
    auto morse = morse_complex(spec);
    auto rep = compare_with_spectral(morse, spectral);
    CHECK_FALSE(rep.skipped);
    CHECK(rep.passed());
    CHECK(rep.checks.size() == 3);

    SpectralComplex empty;
    empty.empty = true;
    empty.diagnostic = "no resonance at 0";
    auto skipped = compare_with_spectral(morse, empty);
    CHECK(skipped.skipped);
    CHECK(skipped.diagnostic.find("skipped") != std::string::npos);

    SpectralComplex wrong = spectral;
    wrong.cohomology = {1, 0};
    CHECK_FALSE(compare_with_spectral(morse, wrong).passed());
}
