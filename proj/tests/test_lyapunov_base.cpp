#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "axioma/lyapunov/energy.hpp"

using namespace axioma;
using Catch::Approx;

namespace {

const double pi = std::numbers::pi;

// theta' = c sin(2 pi theta) has tan(pi theta(t)) = tan(pi theta0) exp(2 pi c t).
double separable(double theta0, double c, double t) {
    return wrap01(std::atan(std::tan(pi * theta0) * std::exp(two_pi * c * t)) / pi);
}

VectorFieldSpec slow_saddle_field() {
    // -grad of 0.01 (cos 2 pi x + cos 2 pi y).
    return gradient_field({{{1, 0}, 0.01, 0.0}, {{0, 1}, 0.01, 0.0}}, 2, "slow");
}

struct Cos2 {
    VectorFieldSpec spec = catalog_field("grad_cos2");
    std::vector<BasicSetRecord> sets = find_fixed_points(spec, 32);
    SmaleGraph graph = build_smale_graph(sets, spec);
};

const Cos2& cos2() {
    static Cos2 c;
    return c;
}

}  // namespace

TEST_CASE("whole torus is unrevisited") {
    auto spec = catalog_field("grad_cos2");
    auto res = check_unrevisited(RegionMask::whole({2, 16}, spec), spec, 5, 50);
    CHECK(res.pass);
    CHECK(res.samples == 50);
}

TEST_CASE("sink disk of grad_cos2 is unrevisited") {
    auto spec = catalog_field("grad_cos2");
    const Vec2 sink(0.5, 0.5);
    // Oracle: the field points strictly inward on the boundary circle.
    for (int a = 0; a < 360; ++a) {
        Vec2 d(std::cos(a * pi / 180), std::sin(a * pi / 180));
        CHECK(evaluate_field(spec, Vec2(sink + 0.1 * d)).v.dot(d) < 0.0);
    }
    auto res = check_unrevisited(disk_mask({2, 32}, spec, sink, 0.1), spec, 20, 200);
    CHECK(res.pass);
    CHECK(res.samples == 200);
}

TEST_CASE("annulus around a saddle is revisited") {
    auto spec = slow_saddle_field();
    const Vec2 saddle(0.5, 0.0);
    auto in_annulus = [&](const Vec2& x) {
        double r = torus_distance(saddle, x, 2);
        return r > 0.1 && r < 0.3 && std::abs(wrap_centered(x[1])) > 0.005;
    };
    auto mask = RegionMask::from_predicate({2, 64}, spec, in_annulus, "annulus");
    auto res = check_unrevisited(mask, spec, 50, 400);
    REQUIRE_FALSE(res.pass);
    REQUIRE(res.witness);
    const auto& w = *res.witness;
    // Closed-form separatrix dynamics: x relaxes to 1/2, y leaves 0.
    const double c = 0.02 * pi;
    auto at = [&](int k) { return Vec2(separable(w.x[0], c, k), separable(w.x[1], c, k)); };
    CHECK(in_annulus(w.x));
    CHECK_FALSE(in_annulus(at(w.left_at)));
    CHECK(in_annulus(at(w.returned_at)));
    CHECK(torus_distance(saddle, at(w.left_at), 2) < 0.1);
}

TEST_CASE("unrevisited check rejects a zero horizon") {
    auto spec = catalog_field("grad_cos2");
    CHECK_THROWS_AS(check_unrevisited(RegionMask::whole({2, 8}, spec), spec, 0, 1), PreconditionError);
}

TEST_CASE("single attractor gives the trivial chain") {
    auto spec = catalog_field("grad_cos2");
    std::vector<BasicSetRecord> one;
    for (auto k : cos2().sets)
        if (k.index == 0) {
            k.id = 0;
            one.push_back(k);
        }
    auto g = smale_graph_from_edges(one, {});
    FiltrationOptions opt;
    opt.grid_res = 16;
    auto F = build_filtration(g, spec, 0.1, opt);
    REQUIRE(F.minus.size() == 2);
    CHECK(F.minus[0].member_cells() == 0);
    CHECK(F.minus[1].member_cells() == 256);
}

TEST_CASE("grad_cos2 filtration is a four step chain") {
    const auto& c = cos2();
    FiltrationOptions opt;
    opt.grid_res = 32;
    auto F = build_filtration(c.graph, c.spec, 0.1, opt);
    REQUIRE(F.size() == 4);
    REQUIRE(F.minus.size() == 5);
    CHECK(F.report.nested);
    CHECK(F.report.stability_violations == 0);
    CHECK(F.report.separates);
    for (double h : F.report.hausdorff) CHECK(h < 0.1);
    // Strictly growing chain ending at the whole torus.
    for (int j = 1; j <= 4; ++j) CHECK(F.minus[j].member_cells() > F.minus[j - 1].member_cells());
    CHECK(F.minus[4].member_cells() == 32 * 32);

    // Plus masks are complements of the minus masks in reverse order.
    for (int j = 0; j <= 4; ++j)
        for (std::size_t i = 0; i < 64; ++i) {
            Vec2 x = F.minus[0].grid().point(i * 13 % 1024);
            CHECK(F.plus[j].contains(x) == !F.minus[4 - j].contains(x));
        }
    for (const auto& v : F.cores) {
        auto res = check_unrevisited(v, c.spec, 50, 200);
        CHECK(res.pass);
        CHECK(res.samples == 200);
    }
}

TEST_CASE("time-reversed construction starts with a small disk at the sink") {
    const auto& c = cos2();
    auto rspec = c.spec.reversed();
    auto rsets = find_fixed_points(rspec, 32);
    auto rg = build_smale_graph(rsets, rspec);
    FiltrationOptions opt;
    opt.grid_res = 32;
    auto F = build_filtration(rg, rspec, 0.1, opt);
    const RegionMask& first = F.minus[1];
    CHECK(first.contains(Vec2(0.5, 0.5)));
    CHECK(first.member_cells() < 20);
    // Forward invariant for the original flow.
    auto res = check_unrevisited(first, c.spec, 10, 100);
    CHECK(res.pass);
}

TEST_CASE("averaged energy edge cases") {
    auto spec = catalog_field("grad_cos1");
    Grid g{1, 32};
    AveragingOptions opt;
    opt.grid_res = 32;
    auto none = averaged_energy(RegionMask::empty(g, spec), RegionMask::empty(g, spec), spec, 1.0, opt);
    for (double v : none.values()) CHECK(v == 1.0);
    auto all = averaged_energy(RegionMask::whole(g, spec), RegionMask::empty(g, spec), spec, 1.0, opt);
    for (double v : all.values()) CHECK(v == 0.0);
    CHECK_THROWS_AS(averaged_energy(RegionMask::whole(g, spec), RegionMask::whole(g, spec), spec, 1.0, opt),
                    PreconditionError);
}

TEST_CASE("averaged energy on grad_cos1 matches orbit quadrature") {
    auto spec = catalog_field("grad_cos1");
    Grid g{1, 64};
    auto vm = disk_mask(g, spec, Vec2(0.0, 0.0), 0.1);
    auto vp = disk_mask(g, spec, Vec2(0.5, 0.0), 0.1);
    const double T = 3.0;
    auto m = averaged_energy(vm, vp, spec, T);
    const double lam = two_pi * two_pi;
    for (double x : {0.12, 0.2, 0.3, 0.38, 0.62, 0.75, 0.88}) {
        // Closed-form exit from |x| < 0.1 and entry into |x - 1/2| < 0.1.
        double tx = std::abs(std::tan(pi * x));
        double L = std::log(std::tan(pi * 0.1) / tx) / lam;
        double P = std::log(std::tan(pi * 0.4) / tx) / lam;
        // Trapezoid quadrature of the transit coordinate along the orbit.
        const int n = 600000;
        double acc = 0.0;
        for (int i = 0; i <= n; ++i) {
            double t = -T + 2 * T * i / n;
            double w = (i == 0 || i == n) ? 0.5 : 1.0;
            acc += w * std::clamp((t - L) / (P - L), 0.0, 1.0);
        }
        double oracle = acc / n;
        auto v = m.exact(Vec2(x, 0.0));
        CHECK(v.value == Approx(oracle).margin(1e-6));
        CHECK(v.lie > 0.0);
    }
    // Monotone along orbits.
    for (double x : {0.15, 0.3, 0.7}) {
        double prev = m(Vec2(x, 0.0));
        for (int k = 1; k <= 10; ++k) {
            double cur = m(Vec2(separable(x, two_pi, 0.005 * k), 0.0));
            CHECK(cur >= prev - 1e-9);
            prev = cur;
        }
    }
}

TEST_CASE("global energy for a single set is constant") {
    const auto& c = cos2();
    std::vector<BasicSetRecord> one;
    for (auto k : c.sets)
        if (k.index == 0) {
            k.id = 0;
            one.push_back(k);
        }
    EnergyOptions opt;
    opt.grid_res = 8;
    auto E = global_energy(smale_graph_from_edges(one, {}), c.spec, {2.5}, 0.1, opt);
    for (double v : E.field.values()) CHECK(v == 2.5);
}

TEST_CASE("global energy for grad_cos1") {
    auto spec = catalog_field("grad_cos1");
    auto sets = find_fixed_points(spec, 16);
    auto g = build_smale_graph(sets, spec);
    EnergyOptions opt;
    auto E = global_energy(g, spec, {0.0, 1.0}, 0.1, opt);
    CHECK(E.function.evaluate(Vec2(0.0, 0.0)).value == Approx(0.0).margin(1e-12));
    CHECK(E.function.evaluate(Vec2(0.5, 0.0)).value == Approx(1.0).margin(1e-12));
    CHECK(E.report.min_lie >= -1e-6);
    CHECK(E.report.eta > 0.0);
    CHECK(E.report.max_pin_error <= 0.1);
    // Strictly increasing along the orbit from near the source to near the sink.
    double prev = E.function.evaluate(Vec2(0.06, 0.0)).value;
    for (int k = 1; k <= 40; ++k) {
        double x = separable(0.06, two_pi, 0.002 * k);
        if (x > 0.44) break;
        double cur = E.function.evaluate(Vec2(x, 0.0)).value;
        CHECK(cur > prev);
        prev = cur;
    }
    CHECK_THROWS_AS(global_energy(g, spec, {1.0, 0.0}, 0.1, opt), PreconditionError);
}

TEST_CASE("global energy for grad_cos2 satisfies the energy properties") {
    const auto& c = cos2();
    std::vector<double> levels{0.0, 1.0 / 3, 2.0 / 3, 1.0};
    auto E = global_energy(c.graph, c.spec, levels, 0.1);
    const auto& r = E.report;
    CHECK(E.field.grid().res == 64);
    CHECK(r.min_lie >= -1e-6);
    CHECK(r.eta > 0.0);
    CHECK(r.max_pin_error <= 0.1);
    CHECK(r.max_level_error <= 1e-3);

    // Monotone along the flow at random points.
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int s = 0; s < 100; ++s) {
        Vec2 x(u(rng), u(rng));
        double t = 2.0 * u(rng);
        double e0 = E.function.evaluate(x).value;
        double e1 = E.function.evaluate(integrate_flow(c.spec, TorusPoint(2, x), t).c).value;
        CHECK(e1 >= e0 - 1e-6);
    }
}

TEST_CASE("scalar field CSV has a resolution header") {
    auto f = ScalarFieldGrid({2, 4}, [](const Vec2& x) { return ValueAndFlowDerivative{x[0] + x[1], 0.0}; });
    std::ostringstream os;
    f.write_csv(os);
    CHECK(os.str().rfind("# dim=2 res=4\nx,y,value,lie\n", 0) == 0);
    CHECK(f.max() == Approx(1.5));
}

TEST_CASE("Fourier interpolant reproduces a trigonometric field") {
    auto f = ScalarFieldGrid({2, 16}, [](const Vec2& x) {
        return ValueAndFlowDerivative{std::cos(two_pi * x[0]) + 0.5 * std::sin(two_pi * 2 * x[1]), 0.0};
    }, 4);
    Vec2 p(0.123, 0.456);
    CHECK(f.interpolate(p) == Approx(std::cos(two_pi * p[0]) + 0.5 * std::sin(4 * pi * p[1])).margin(1e-12));
    CHECK(f.interpolant_gradient(p)[0] == Approx(-two_pi * std::sin(two_pi * p[0])).margin(1e-10));
}
