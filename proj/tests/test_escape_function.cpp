#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "axioma/escape/escape.hpp"

using namespace axioma;
using Catch::Approx;

namespace {

const double pi = std::numbers::pi;
const double Lam = 4.0 * pi * pi;

struct Cos2Escape {
    VectorFieldSpec spec = catalog_field("grad_cos2");
    SmaleGraph graph = build_smale_graph(find_fixed_points(spec, 32), spec);
    OrderBuild order = build_order_function({-20, 0, 20}, graph, spec);
    std::pair<WeightShape, WeightReport> weight = build_weight_shape(spec, order.cones, WeightOptions{}, 1500);
    EscapeFunction G{spec, order.order, weight.first, 0.1, graph.sets};
};

const Cos2Escape& cos2() {
    static Cos2Escape c;
    return c;
}

// limit_cycle with n0 > 0, so the neutral cone carries a moving base energy.
struct CycleEscape {
    VectorFieldSpec spec = catalog_field("limit_cycle");
    SmaleGraph graph = build_smale_graph(find_basic_sets(spec, 16, {{0.3, 0.05}}, 5.0), spec);
    OrderOptions opt = [] {
        OrderOptions o;
        o.fiber_grid = 12;
        o.fiber_theta = 8;
        o.sigma_budget = 400;
        o.cone_samples = 600;
        o.base_grid = 8;
        return o;
    }();
    OrderBuild order = build_order_function({-20, 4, 20}, graph, spec, opt);
    WeightShape weight{spec, order.cones, WeightOptions{}};
    EscapeFunction G{spec, order.order, weight, 0.1, graph.sets};
};

const CycleEscape& cycle() {
    static CycleEscape c;
    return c;
}

}  // namespace

TEST_CASE("order formula on constant energies") {
    OrderParameters p{-20, 0, 20};
    CHECK(p.combine(0.0, 1.0, 1.0) == p.u);
    CHECK(p.combine(p.s / 4.0, 0.0, 0.0) == Approx(0.75 * p.s));
    CHECK(p.combine(0.0, 0.0, 1.0) == p.n0);
    OrderParameters q{-8, 2, 10};
    CHECK(q.combine(0.0, 1.0, 1.0) == Approx(q.u));
    CHECK(q.combine(0.0, 0.0, 0.0) == Approx(q.s));
}

TEST_CASE("order parameters are validated") {
    CHECK_THROWS_AS((OrderParameters{0, 0, 1}.validate()), PreconditionError);
    CHECK_THROWS_AS((OrderParameters{1, 0, 2}.validate()), PreconditionError);
    CHECK_THROWS_AS((OrderParameters{-1, -0.5, 2}.validate()), PreconditionError);
    CHECK_THROWS_AS((OrderParameters{-1, 3, 2}.validate()), PreconditionError);
    CHECK_NOTHROW((OrderParameters{-1, 0, 2}.validate()));
    auto l = OrderParameters{-20, 8, 20}.levels(5);
    REQUIRE(l.size() == 5);
    CHECK(l.front() == 0.0);
    CHECK(l.back() == Approx(2.0));
    CHECK(l[2] == Approx(1.0));
}

TEST_CASE("cutoff vanishes below one half and is one above one") {
    CHECK(order_cutoff(0.0) == 0.0);
    CHECK(order_cutoff(0.5) == 0.0);
    CHECK(order_cutoff(1.0) == 1.0);
    CHECK(order_cutoff(4.0) == 1.0);
    CHECK(order_cutoff(0.75) == Approx(0.5));
}

TEST_CASE("escape function vanishes under the cutoff and where m does") {
    const auto& c = cos2();
    SigmaPoint q{Vec2(0.3, 0.7), 0.1};
    CHECK(c.G.value(q, 0.5) == 0.0);
    CHECK(c.G.value(q, 0.3) == 0.0);
    CHECK(c.G.flow_derivative(q, 0.3) == 0.0);
    EscapeSample s = c.G.sample(q);
    for (double& e : s.E) e = 0.0;
    CHECK(EscapeFunction::sample_value(s, 0, 5.0) == 0.0);
    CHECK(EscapeFunction::flow_derivative(s, 5.0) == 0.0);
}

TEST_CASE("escape function is asymptotically log-homogeneous") {
    const auto& c = cos2();
    std::mt19937_64 rng(21);
    for (int i = 0; i < 20; ++i) {
        SigmaPoint q = detail::random_sphere_point(2, rng);
        double m = c.order.order.sphere(q).value;
        if (std::abs(m) < 1.0) continue;
        for (double r : {10.0, 100.0}) {
            double diff = c.G.value(q, 2 * r) - c.G.value(q, r);
            CHECK(diff == Approx(m * std::log(2.0)).epsilon(0.01));
        }
    }
}

TEST_CASE("order function on grad_cos2 meets the cone bounds") {
    const auto& b = cos2().order.bounds;
    CHECK(b.passed);
    CHECK(b.samples_u > 50);
    CHECK(b.samples_s > 50);
    CHECK(b.max_on_u <= -10.0);
    CHECK(b.min_on_s >= 5.0);
    CHECK(b.min_value >= -20.0 - 1e-9);
    CHECK(b.max_value <= 20.0 + 1e-9);
}

TEST_CASE("reversed fibre couple breaks the cone bounds") {
    // E+ built with attractor and repeller exchanged is about 1 - E+, which puts
    // m near 0 on the unstable-dual cone.
    const auto& c = cos2();
    FiberEnergyOptions fo;
    fo.grid_res = 8;
    fo.theta_res = 8;
    auto flipped = fiber_energy(c.spec, c.order.clouds.uo, c.order.clouds.s, fo);
    OrderFunction bad({-20, 0, 20}, std::nullopt, flipped.energy, c.order.order.minus());
    auto rep = check_cone_bounds(bad, c.order.cones, 400);
    CHECK_FALSE(rep.passed);
    CHECK(rep.violations > 0);
    CHECK(rep.max_on_u > -10.0);
}

TEST_CASE("neutral weight is invariant for a constant field") {
    // Constant V: the lift keeps xi fixed, so |xi(V)| and |xi| never change.
    auto spec = catalog_field("rotation", Vec2(1.0, std::sqrt(2.0)));
    const auto& c = cos2();
    WeightShape w(spec, c.order.cones, WeightOptions{});
    std::mt19937_64 rng(4);
    for (int i = 0; i < 20; ++i) {
        SigmaPoint q = detail::random_sphere_point(2, rng);
        LiftedPoint a = lift_point(spec, q, 0.3, 1e-3);
        CHECK(a.log_growth == Approx(0.0).margin(1e-12));
        CHECK(std::log(w.neutral(a.q)) - std::log(w.neutral(q)) == Approx(0.0).margin(1e-10));
    }
}

TEST_CASE("growth integral matches the linear saddle") {
    // At the grad_cos2 saddle (1/2, 0) the lift is linear: dx grows like e^{Lam t},
    // dy decays, so both integrals equal (e^{Lam T} - 1) / Lam.
    const auto& c = cos2();
    WeightOptions opt;
    opt.T = 0.1;
    opt.step = 1e-4;
    WeightShape w(c.spec, c.order.cones, opt);
    SigmaPoint dx{Vec2(0.5, 0.0), 0.0}, dy{Vec2(0.5, 0.0), 0.25};
    double exact = std::expm1(Lam * opt.T) / Lam;
    // Trapezoid error (h Lam)^2 / 12 ~ 1.3e-6 relative.
    CHECK(w.forward_integral(dx) == Approx(exact).epsilon(3e-6));
    CHECK(w.backward_integral(dy) == Approx(exact).epsilon(3e-6));
    CHECK(w.backward_integral(dx) == Approx(-std::expm1(-Lam * opt.T) / Lam).epsilon(3e-6));
    // X(log f) of the forward piece: (|Phi^T xi| - |xi|) / int = Lam.
    double h = 1e-5;
    LiftedPoint a = lift_point(c.spec, dx, h, h), b = lift_point(c.spec, dx, -h, h);
    double d = (a.log_growth - b.log_growth + std::log(w.forward_integral(a.q)) - std::log(w.forward_integral(b.q))) /
               (2 * h);
    CHECK(d == Approx(Lam).epsilon(1e-4));
}

TEST_CASE("weight shape on grad_cos2 has the sign law") {
    const auto& r = cos2().weight.second;
    CHECK(r.violations == 0);
    CHECK(r.samples_u > 20);
    CHECK(r.samples_s > 20);
    CHECK(r.min_value > 0.0);
    CHECK(r.min_on_u >= r.gamma / 2);
    CHECK(r.max_on_s <= -r.gamma / 2);
    // The slowest rate on the sampled cones is the fixed-point rate Lam.
    CHECK(r.gamma == Approx(2 * Lam).epsilon(0.05));
}

TEST_CASE("build_weight_shape rejects a non-positive gamma") {
    // Constant field: no growth anywhere, so gamma = 0.
    auto spec = catalog_field("rotation", Vec2(1.0, std::sqrt(2.0)));
    CHECK_THROWS_AS(build_weight_shape(spec, cos2().order.cones, WeightOptions{}, 300), CheckFailure);
}

TEST_CASE("escape decay on grad_cos2") {
    const auto& c = cos2();
    DecayOptions opt;
    opt.samples = 1500;
    auto rep = verify_decay(c.G, c.weight.second.gamma, opt);
    CHECK(rep.passed);
    CHECK(std::isfinite(rep.R));
    CHECK(rep.max_derivative <= 1e-6);
    CHECK(rep.max_strict <= -rep.C_m);
    CHECK(rep.C_m == Approx(c.weight.second.gamma / 8 * 20));
    CHECK(rep.violations.empty());
    // Unstable-dual cone samples decay at least at rate (gamma/8) s.
    CHECK(rep.region_samples[static_cast<int>(ConeRegion::u)] > 0);
    CHECK(rep.region_violations[static_cast<int>(ConeRegion::u)] == 0);
}

TEST_CASE("doubling s doubles C_m when |u| >= s") {
    const auto& c = cos2();
    double gamma = c.weight.second.gamma;
    auto cm = [&](OrderParameters p) {
        OrderFunction m(p, std::nullopt, c.order.order.plus(), c.order.order.minus());
        EscapeFunction G(c.spec, m, c.weight.first, 0.1, c.graph.sets);
        DecayOptions opt;
        opt.samples = 50;
        return verify_decay(G, gamma, opt).C_m;
    };
    CHECK(cm({-40, 0, 20}) == Approx(2 * cm({-40, 0, 10})));
}

TEST_CASE("neutral cone derivative follows the product rule") {
    // On the neutral cone f = |xi(V)| is invariant, so X(G) = (X~ E) log<f>.
    const auto& c = cycle();
    REQUIRE(c.order.bounds.samples_o > 0);
    CHECK(c.order.bounds.min_on_o >= 2.0 - 1e-9);
    CHECK(c.order.bounds.max_on_o <= 4.0 + 1e-9);
    std::mt19937_64 rng(3);
    int checked = 0, moving = 0;
    for (const auto& q : detail::stratified_samples(c.order.cones, 2, 600, rng)) {
        if (c.order.cones.classify(q) != ConeRegion::o) continue;
        auto w = c.weight.weights(q);
        if (w.u > 0 || w.s > 0 || w.rest > 0) continue;
        EscapeSample s = c.G.sample(q);
        for (double r : {5.0, 50.0}) {
            double d = EscapeFunction::flow_derivative(s, r);
            double oracle = s.E_lie * EscapeFunction::log_bracket(r * c.weight.neutral(q));
            CHECK(d == Approx(oracle).epsilon(2e-3).margin(1e-6));
            if (std::abs(oracle) > 1e-3) ++moving;
        }
        ++checked;
    }
    CHECK(checked > 10);
    CHECK(moving > 0);
}
