#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "axioma/cotangent/adapted_metric.hpp"
#include "axioma/cotangent/cones.hpp"
#include "axioma/cotangent/fiber_energy.hpp"

using namespace axioma;
using Catch::Approx;

namespace {

const double pi = std::numbers::pi;
const double Lam = 4.0 * pi * pi;  // |DV| at the fixed points of grad_cos1/grad_cos2

struct Cos2 {
    VectorFieldSpec spec = catalog_field("grad_cos2");
    std::vector<BasicSetRecord> sets = find_fixed_points(spec, 32);
    SmaleGraph graph = build_smale_graph(sets, spec);

    const BasicSetRecord& at(double x, double y) const {
        for (const auto& k : sets)
            if (torus_distance(k.location.c, Vec2(x, y), 2) < 1e-9) return k;
        throw std::runtime_error("no set there");
    }
};

const Cos2& cos2() {
    static Cos2 c;
    return c;
}

struct Cycle {
    VectorFieldSpec spec = catalog_field("limit_cycle");
    std::vector<BasicSetRecord> sets = find_basic_sets(spec, 16, {{0.3, 0.05}}, 5.0);
    const BasicSetRecord& attracting() const { return sets[0].index == 0 ? sets[0] : sets[1]; }
};

const Cycle& cycle() {
    static Cycle c;
    return c;
}

// |sin| of the angle between two covectors.
double misalignment(const Covector& a, const Covector& b) {
    return std::abs(a[0] * b[1] - a[1] * b[0]) / (a.norm() * b.norm());
}

}  // namespace

// ---- frames on K -------------------------------------------------------

TEST_CASE("sink frame spans the whole fibre as unstable dual") {
    auto f = frames_on_basic_set(cos2().at(0.5, 0.5), cos2().spec);
    REQUIRE(f.size() == 1);
    CHECK(f[0].u.size() == 2);
    CHECK(f[0].s.empty());
    CHECK(f[0].o.empty());
    CHECK(f[0].provenance == FrameProvenance::on_set);
}

TEST_CASE("saddle frame matches the left eigenvectors") {
    // DV = diag(-L, L) at (1/2, 0): unstable dual dx, stable dual dy.
    auto f = frames_on_basic_set(cos2().at(0.5, 0.0), cos2().spec)[0];
    REQUIRE(f.u.size() == 1);
    REQUIRE(f.s.size() == 1);
    CHECK(misalignment(f.u[0], Covector(1, 0)) < 1e-12);
    CHECK(misalignment(f.s[0], Covector(0, 1)) < 1e-12);
    CHECK(f.complete());
    auto g = frames_on_basic_set(cos2().at(0.0, 0.5), cos2().spec)[0];
    CHECK(misalignment(g.u[0], Covector(0, 1)) < 1e-12);
    CHECK(misalignment(g.s[0], Covector(1, 0)) < 1e-12);
}

TEST_CASE("orbit frame carries a flow-positive neutral dual") {
    const auto& k = cycle().attracting();
    auto fr = frames_on_basic_set(k, cycle().spec, 8);
    REQUIRE(fr.size() == 8);
    for (const auto& f : fr) {
        Vec2 v = evaluate_field(cycle().spec, f.x).v;
        REQUIRE(f.o.size() == 1);
        CHECK(f.o[0].dot(v) > 0.0);
        // Attracting circle: E_s is transverse, so E*_u = ann(E_o) and E*_s = 0.
        REQUIRE(f.u.size() == 1);
        CHECK(std::abs(f.u[0].dot(v)) < 1e-9 * f.u[0].norm() * v.norm());
        CHECK(f.s.empty());
    }
}

TEST_CASE("defective linearization is rejected") {
    // DV(0) = 2 pi [[1, 1], [0, 1]].
    VectorFieldSpec spec;
    spec.dim = 2;
    spec.tag = "jordan";
    spec.components[0] = {{{1, 0}, 0.0, 1.0}, {{0, 1}, 0.0, 1.0}};
    spec.components[1] = {{{0, 1}, 0.0, 1.0}};
    BasicSetRecord k = classify_fixed_point(spec, Vec2(0, 0));
    CHECK_THROWS_AS(split_basic_set(k, spec), NumericalDegeneracy);
}

// ---- adapted metric ----------------------------------------------------

TEST_CASE("adapted metric at the grad_cos1 sink") {
    auto spec = catalog_field("grad_cos1");
    auto sets = find_fixed_points(spec, 16);
    const BasicSetRecord* sink = nullptr;
    for (const auto& k : sets)
        if (k.index == 0) sink = &k;
    REQUIRE(sink);
    auto m = adapted_metric(*sink, spec, 2.0);
    REQUIRE(m.size() == 1);
    // int_0^inf e^{L t/2} e^{-2 L t} dt with L = 4 pi^2.
    CHECK(m[0].g(0, 0) == Approx(1.0 / (2.0 * Lam - 0.5 * Lam)).epsilon(1e-6));
}

TEST_CASE("adapted metric at a diagonal saddle") {
    // DV = diag(-a, b): g = diag(1/(2a - lam/2), 1/(2b - lam/2)), lam = min(a, b).
    const auto& k = cos2().at(0.5, 0.0);
    double a = -k.linearization(0, 0), b = k.linearization(1, 1), lam = std::min(a, b);
    auto m = adapted_metric(k, cos2().spec, 1.5)[0];
    CHECK(m.g(0, 0) == Approx(1.0 / (2 * a - lam / 2)).epsilon(1e-6));
    CHECK(m.g(1, 1) == Approx(1.0 / (2 * b - lam / 2)).epsilon(1e-6));
    CHECK(std::abs(m.g(0, 1)) < 1e-12);
    auto c = check_adapted_metric(m, cos2().spec, 0.0, 0.05, 1.5);
    CHECK(c.stable <= std::exp(-lam * 0.05 / 2) * (1 + 1e-9));
    CHECK(c.unstable <= std::exp(-lam * 0.05 / 2) * (1 + 1e-9));
}

TEST_CASE("T_trunc too small is rejected") {
    const auto& k = cos2().at(0.5, 0.0);
    CHECK_THROWS_AS(adapted_metric(k, cos2().spec, 0.1), PreconditionError);
}

TEST_CASE("adapted metric on a periodic orbit") {
    const auto& k = cycle().attracting();
    double lam = k.lambda;
    REQUIRE(lam == Approx(2 * pi).epsilon(1e-4));
    double T = 8.0;
    auto ms = adapted_metric(k, cycle().spec, T, 4);
    SetSplitting sp = split_basic_set(k, cycle().spec);
    for (const auto& m : ms) {
        auto c = check_adapted_metric(m, cycle().spec, sp.neutral_norm2, 0.3, T);
        CHECK(c.neutral == Approx(1.0).epsilon(1e-6));
        // The definition controls the squared norm by e^{-lam t/2}.
        CHECK(c.stable * c.stable <= std::exp(-lam * 0.3 / 2) * (1 + 1e-6));
    }
}

// ---- extension ---------------------------------------------------------

TEST_CASE("extended saddle frames") {
    const auto& k = cos2().at(0.5, 0.0);
    auto ext = extend_frames(k, cos2().spec, 0.1, cos2().sets, {32, 0.0});
    REQUIRE(!ext.frames().empty());

    auto on = ext.at(k.location.c);
    CHECK(on.provenance == FrameProvenance::on_set);
    CHECK(misalignment(on.u[0], Covector(1, 0)) < 1e-12);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    int extended = 0;
    for (const auto& f : ext.frames()) {
        if (f.provenance == FrameProvenance::extended) ++extended;
        // DV is diagonal on the whole torus, so the splitting is the coordinate one.
        REQUIRE(f.u.size() == 1);
        REQUIRE(f.s.size() == 1);
        CHECK(misalignment(f.u[0], Covector(1, 0)) < 1e-6);
        CHECK(misalignment(f.s[0], Covector(0, 1)) < 1e-6);
        Covector xi(g(rng), g(rng));
        FiberParts p = f.decompose(xi);
        CHECK((p.u + p.s + p.o - xi).norm() < 1e-10);
    }
    CHECK(extended > 0);

    // On the local stable manifold y = 0 the stable dual annihilates W^s.
    auto w = ext.at(Vec2(0.55, 0.0));
    CHECK(std::abs(w.s[0].normalized().dot(Vec2(1, 0))) < 1e-4);

    std::ostringstream os;
    ext.write_csv(os);
    CHECK(os.str().rfind("x,y,provenance,kind,xi_x,xi_y\n", 0) == 0);
}

TEST_CASE("extension radius must keep other sets out") {
    const auto& k = cos2().at(0.5, 0.0);
    CHECK_THROWS_AS(extend_frames(k, cos2().spec, 0.3, cos2().sets), PreconditionError);
    CHECK_THROWS_AS(extend_frames(k, cos2().spec, 0.0, cos2().sets), PreconditionError);
}

// ---- cones -------------------------------------------------------------

TEST_CASE("cone nesting") {
    auto f = frames_on_basic_set(cos2().at(0.5, 0.0), cos2().spec)[0];
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    for (int i = 0; i < 500; ++i) {
        Covector xi(g(rng), g(rng));
        for (ConeKind kind : {ConeKind::u, ConeKind::uo, ConeKind::s, ConeKind::so})
            if (in_cone({kind, 0.2}, f, xi)) CHECK(in_cone({kind, 0.7}, f, xi));
        if (in_cone({ConeKind::u, 0.3}, f, xi)) CHECK(in_cone({ConeKind::uo, 0.3}, f, xi));
    }
    CHECK_THROWS_AS(in_cone({ConeKind::u, 0.0}, f, Covector(1, 0)), PreconditionError);
    CHECK_THROWS_AS(in_cone({ConeKind::u, 1.5}, f, Covector(1, 0)), PreconditionError);
}

TEST_CASE("linear saddle cones contract from the first iterate") {
    Mat2 A = Mat2::Zero();
    A(0, 0) = std::exp(-2.0);
    A(1, 1) = std::exp(2.0);
    auto rep = cone_contraction_check(linear_cone_dynamics(A, 2.0, 0.1), 0.1, 3, 300);
    CHECK(rep.passed);
    CHECK(rep.m_delta0 == 1);
    CHECK(rep.violations == 0);
    CHECK(rep.min_growth >= rep.growth_bound);
    // Linear model: the squared ratio shrinks by e^{-8} exactly.
    CHECK(rep.worst_factor == Approx(std::exp(-8.0)).epsilon(1e-9));
}

TEST_CASE("grad_cos2 saddle cone check") {
    const auto& k = cos2().at(0.5, 0.0);
    auto ext = extend_frames(k, cos2().spec, 0.1, cos2().sets, {32, 0.0});
    auto rep = cone_contraction_check(flow_cone_dynamics(ext), 0.1, 4, 150);
    CHECK(rep.passed);
    CHECK(rep.violations == 0);
    CHECK(rep.m_delta0 >= 1);
    CHECK(rep.contraction_samples > 0);
    CHECK(rep.growth_samples > 0);
}

TEST_CASE("neutral cone ratio on a periodic orbit") {
    const auto& k = cycle().attracting();
    auto ext = extend_frames(k, cycle().spec, 0.1, cycle().sets, {32, 0.0});
    auto rep = cone_contraction_check(flow_cone_dynamics(ext), 0.1, 3, 50);
    CHECK(rep.neutral_ratio == Approx(1.0).epsilon(1e-6));
}

// ---- Sigma sets --------------------------------------------------------

TEST_CASE("grad_cos1 Sigma clouds sit over the fixed points") {
    auto spec = catalog_field("grad_cos1");
    auto sets = find_fixed_points(spec, 16);
    auto c = sigma_sets(build_smale_graph(sets, spec), spec, 64);
    auto over = [](const std::vector<SigmaPoint>& pts, double x) {
        if (pts.size() != 2) return false;
        for (const auto& p : pts)
            if (torus_distance(p.x, Vec2(x, 0), 1) > 1e-12) return false;
        return std::abs(wrap_centered(pts[0].theta - pts[1].theta)) == Approx(0.5);
    };
    CHECK(over(c.uo, 0.0));
    CHECK(over(c.u, 0.0));
    CHECK(over(c.s, 0.5));
    CHECK(over(c.so, 0.5));
    CHECK(c.separation_s_uo == Approx(0.5));
}

TEST_CASE("Sigma sets need a basic set") {
    auto spec = catalog_field("rotation");
    SmaleGraph g;
    CHECK_THROWS_AS(sigma_sets(g, spec, 64), PreconditionError);
}

TEST_CASE("grad_cos2 Sigma_s matches the conormals of the unstable separatrices") {
    auto c = sigma_sets(cos2().graph, cos2().spec, 800);
    REQUIRE(!c.s.empty());
    CHECK(c.unresolved == 0);
    for (const auto& p : c.s) {
        bool sink = torus_distance(p.x, Vec2(0.5, 0.5), 2) < 1e-6;
        bool vline = std::abs(p.x[0] - 0.5) < 1e-6 && std::abs(wrap_centered(2 * p.theta)) < 1e-6;
        bool hline = std::abs(p.x[1] - 0.5) < 1e-6 && std::abs(wrap_centered(2 * p.theta - 0.5)) < 1e-6;
        CHECK((sink || vline || hline));
    }
    CHECK(c.separation_s_uo > 0.1);
    CHECK(c.separation_u_so > 0.1);
}

TEST_CASE("Sigma_s is invariant under the unit cotangent flow") {
    auto c = sigma_sets(cos2().graph, cos2().spec, 4000);
    CloudIndex idx(c.s, 2, 0.02);
    double worst = 0.0;
    for (std::size_t i = 0; i < c.s.size(); i += 7) {
        const auto& p = c.s[i];
        CotangentPoint q{TorusPoint(2, p.x), covector_from_angle(p.theta)};
        CotangentPoint r = unit_lift(cos2().spec, q, 0.01);
        worst = std::max(worst, idx.exact_distance({r.base.c, covector_angle(r.fiber)}));
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("time reversal swaps Sigma_u and Sigma_s") {
    auto rev = cos2().spec.reversed();
    auto sets = find_fixed_points(rev, 32);
    auto back = sigma_sets(build_smale_graph(sets, rev), rev, 800);
    auto fwd = sigma_sets(cos2().graph, cos2().spec, 800);
    CHECK(hausdorff_distance(back.u, fwd.s, 2) < 1e-2);
    CHECK(hausdorff_distance(back.s, fwd.u, 2) < 1e-2);
}

TEST_CASE("Sigma clouds converge as the budget grows") {
    auto fine = sigma_sets(cos2().graph, cos2().spec, 3200);
    double coarse = hausdorff_distance(sigma_sets(cos2().graph, cos2().spec, 100).s, fine.s, 2);
    double mid = hausdorff_distance(sigma_sets(cos2().graph, cos2().spec, 800).s, fine.s, 2);
    CHECK(mid < coarse);
}

// ---- fiber energies ----------------------------------------------------

TEST_CASE("empty repeller gives the constant energy") {
    auto c = sigma_sets(cos2().graph, cos2().spec, 64);
    FiberEnergyOptions o;
    o.grid_res = 6;
    o.theta_res = 4;
    auto r = fiber_energy(cos2().spec, c.s, {}, o);
    CHECK(r.field.min() == 1.0);
    CHECK(r.field.max() == 1.0);
    CHECK(r.report.min_lie == 0.0);
}

TEST_CASE("grad_cos1 fiber energy on both sheets") {
    auto spec = catalog_field("grad_cos1");
    auto sets = find_fixed_points(spec, 16);
    auto c = sigma_sets(build_smale_graph(sets, spec), spec, 64);
    FiberEnergyOptions o;
    o.grid_res = 40;
    auto r = fiber_energy(spec, c.s, c.uo, o);
    const double rho = o.fatten, T = r.report.T;
    REQUIRE(T > 0.0);
    // tan(pi x(t)) = tan(pi x0) e^{L t}.
    for (double x0 : {0.1, 0.2, 0.3, 0.4, 0.7, 0.85}) {
        double tx = std::abs(std::tan(pi * x0));
        double L = std::log(std::tan(pi * rho) / tx) / Lam;
        double P = std::log(1.0 / std::tan(pi * rho) / tx) / Lam;
        // Independent average of the clamped ramp over [-T, T].
        int n = 20000;
        double sum = 0.0;
        for (int i = 0; i <= n; ++i) {
            double t = -T + 2 * T * i / n;
            double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
            sum += w * std::clamp((t - L) / (P - L), 0.0, 1.0);
        }
        double expect = sum * (2 * T / n) / 3 / (2 * T);
        for (double theta : {0.0, 0.5}) {
            Transit t = r.energy.transit({Vec2(x0, 0), theta});
            CHECK(t.exit == Approx(L).margin(2e-5));
            CHECK(t.entry == Approx(P).margin(2e-5));
            CHECK(r.energy.evaluate({Vec2(x0, 0), theta}).value == Approx(expect).margin(2e-3));
        }
    }
    CHECK(r.report.min_lie >= 0.0);
    CHECK(r.report.eta > 0.0);
    CHECK(r.report.attract_error < 1e-12);
    CHECK(r.report.repel_error < 1e-12);
}

TEST_CASE("grad_cos2 fiber energy is a Lyapunov function") {
    auto c = sigma_sets(cos2().graph, cos2().spec, 400);
    FiberEnergyOptions o;
    o.grid_res = 12;
    o.theta_res = 8;
    auto r = fiber_energy(cos2().spec, c.s, c.uo, o);
    CHECK(r.report.min_lie >= 0.0);
    CHECK(r.field.min() >= 0.0);
    CHECK(r.field.max() <= 1.0);
    CHECK(r.report.outside_points > 0);
    CHECK(r.report.eta > 0.0);
    std::ostringstream os;
    r.field.write_csv(os);
    CHECK(os.str().find("x,y,theta,value,lie\n") != std::string::npos);

    auto m = fiber_energy(cos2().spec, c.so, c.u, o);
    CHECK(m.report.min_lie >= 0.0);
}

TEST_CASE("overlapping clouds are rejected") {
    auto c = sigma_sets(cos2().graph, cos2().spec, 64);
    FiberEnergyOptions o;
    o.fatten = 0.2;
    CHECK_THROWS_AS(fiber_energy(cos2().spec, c.s, c.uo, o), PreconditionError);
}
