#ifndef AXIOMA_CLI_PIPELINE_HPP
#define AXIOMA_CLI_PIPELINE_HPP

// Stage orchestration: dynamics, graph, lyapunov, cotangent, escape,
// spectral, morse, compare. Every stage writes <stage>.json with its checks;
// the run writes summary.json and, on failure, error.json.

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "axioma/cli/config.hpp"
#include "axioma/cli/report.hpp"
#include "axioma/cotangent/cones.hpp"
#include "axioma/escape/escape.hpp"
#include "axioma/lyapunov/energy.hpp"
#include "axioma/morse/morse_complex.hpp"

namespace axioma {

struct StageCheck {
    std::string name;
    bool passed = false;
    bool gating = true;  // informational checks are reported but do not fail the stage
    json value;
};

struct StageResult {
    std::string name;
    std::string status = "pass";  // pass, fail or skipped
    std::vector<StageCheck> checks;
    json data = json::object();
    std::vector<std::string> files;
    std::string reason;  // why a stage was skipped

    void check(std::string what, bool ok, json value = nullptr, bool gating = true) {
        checks.push_back({std::move(what), ok, gating, std::move(value)});
    }
};

struct PipelineOptions {
    bool with_complex = true;  // spectral stage builds the complex and the homotopy checks
    bool strict = false;       // every check gates, informational ones included
    std::optional<std::string> output_dir;
};

struct PipelineState {
    RunConfig config;
    VectorFieldSpec spec;
    std::filesystem::path out;
    double lambda = 1.0;

    std::optional<std::vector<BasicSetRecord>> sets;
    std::optional<SmaleGraph> graph;
    std::optional<TransversalityReport> transversality;
    std::optional<Filtration> filtration;
    std::optional<GlobalEnergy> energy;
    std::optional<SigmaClouds> clouds;
    std::optional<EscapeBuild> escape;
    std::optional<DecayReport> decay;
    std::optional<SpectralPair> spectral;
    std::vector<ResonanceSet> resonances;
    std::optional<SpectralComplex> complex;
    std::optional<MorseComplex> morse;
    std::optional<ComparisonReport> comparison;

    std::vector<StageResult> results;
};

struct PipelineOutcome {
    int exit_code = 0;
    std::string failed_stage;
    std::string message;
    PipelineState state;
};

enum class PlotKind { energy_contours, sigma_clouds, resonance_scatter, filtration_masks };

inline const char* to_string(PlotKind k) {
    switch (k) {
        case PlotKind::energy_contours: return "energy_contours";
        case PlotKind::sigma_clouds: return "sigma_clouds";
        case PlotKind::resonance_scatter: return "resonance_scatter";
        default: return "filtration_masks";
    }
}

namespace detail {

inline const std::vector<std::string>& stage_dependencies(const std::string& s) {
    static const std::map<std::string, std::vector<std::string>> deps{
        {"dynamics", {}},           {"graph", {"dynamics"}},   {"lyapunov", {"graph"}},
        {"cotangent", {"graph"}},   {"escape", {"graph"}},     {"spectral", {"escape"}},
        {"morse", {}},              {"compare", {"spectral", "morse"}}};
    return deps.at(s);
}

inline void add_with_dependencies(const std::string& s, std::set<std::string>& out) {
    if (!out.insert(s).second) return;
    for (const auto& d : stage_dependencies(s)) add_with_dependencies(d, out);
}

inline json sets_json(const std::vector<BasicSetRecord>& sets) {
    json a = json::array();
    for (const auto& k : sets) {
        json rates = json::array();
        for (auto r : k.rates) rates.push_back(to_json(r));
        a.push_back({{"id", k.id},
                     {"kind", to_string(k.kind)},
                     {"location", to_json(k.location.c, k.ambient_dim())},
                     {"index", k.index},
                     {"lambda", k.lambda},
                     {"period", k.period},
                     {"rates", rates}});
    }
    return a;
}

inline std::string write_resonance_csv(const ResonanceSet& rs) {
    CsvWriter w({"re", "im", "multiplicity", "matched"});
    for (const auto& r : rs.values)
        w.row({csv_number(r.value.real()), csv_number(r.value.imag()), std::to_string(r.multiplicity), "true"});
    for (auto z : rs.unmatched) w.row({csv_number(z.real()), csv_number(z.imag()), "1", "false"});
    return w.str();
}

inline json resonance_json(const ResonanceSet& rs) {
    json v = json::array();
    for (const auto& r : rs.values) v.push_back({{"value", to_json(r.value)}, {"multiplicity", r.multiplicity}});
    json u = json::array();
    for (auto z : rs.unmatched) u.push_back(to_json(z));
    return {{"region", rs.region},        {"tol", rs.tol},     {"cutoff", rs.cutoff},
            {"check_cutoff", rs.check_cutoff}, {"matched", v}, {"unmatched", u},
            {"diagnostic", rs.diagnostic}};
}

inline json int_matrix_json(const IntMatrix& m) {
    json a = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (int j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
        a.push_back(r);
    }
    return a;
}

inline std::vector<double> levels_for(std::size_t n) {
    std::vector<double> l(n, 0.0);
    for (std::size_t j = 1; j < n; ++j) l[j] = double(j) / double(n - 1);
    return l;
}

}  // namespace detail

// Writes the plot table of `kind` from the stage output held in `st`; throws
// naming the stage when that output is missing. Returns the file name.
inline std::string emit_plot_data(const PipelineState& st, PlotKind kind) {
    auto missing = [&](const char* stage) {
        return PreconditionError(std::string("plot '") + to_string(kind) + "' needs the output of stage '" + stage + "'");
    };
    const int dim = st.spec.dim;
    std::string name;
    std::string text;
    switch (kind) {
        case PlotKind::energy_contours: {
            if (!st.energy) throw missing("lyapunov");
            const auto& f = st.energy->field;
            CsvWriter w(dim == 2 ? std::vector<std::string>{"x", "y", "energy", "lie"}
                                 : std::vector<std::string>{"x", "energy", "lie"});
            for (std::size_t i = 0; i < f.grid().size(); ++i) {
                Vec2 p = f.grid().point(i);
                std::vector<std::string> row{csv_number(p[0])};
                if (dim == 2) row.push_back(csv_number(p[1]));
                row.push_back(csv_number(f.values()[i]));
                row.push_back(csv_number(f.lie_values()[i]));
                w.row(row);
            }
            name = "energy_contours.csv";
            text = w.str();
            break;
        }
        case PlotKind::sigma_clouds: {
            if (!st.clouds) throw missing("cotangent");
            // Exactly `samples.sigma` rows, taken at an even stride through the
            // concatenated clouds (all rows when the clouds are smaller).
            std::vector<std::pair<SigmaKind, const SigmaPoint*>> all;
            for (SigmaKind k : {SigmaKind::u, SigmaKind::uo, SigmaKind::s, SigmaKind::so})
                for (const auto& p : st.clouds->cloud(k)) all.emplace_back(k, &p);
            const std::size_t budget = std::size_t(st.config.samples.sigma);
            const std::size_t n = std::min(budget, all.size());
            CsvWriter w({"x", "y", "theta", "kind"});
            for (std::size_t i = 0; i < n; ++i) {
                const auto& [k, p] = all[i * all.size() / n];
                w.row({csv_number(p->x[0]), csv_number(p->x[1]), csv_number(p->theta), to_string(k)});
            }
            name = "sigma_clouds.csv";
            text = w.str();
            break;
        }
        case PlotKind::resonance_scatter: {
            if (st.resonances.empty()) throw missing("spectral");
            CsvWriter w({"degree", "re", "im", "multiplicity", "matched"});
            for (std::size_t k = 0; k < st.resonances.size(); ++k) {
                const auto& rs = st.resonances[k];
                for (const auto& r : rs.values)
                    w.row({std::to_string(k), csv_number(r.value.real()), csv_number(r.value.imag()),
                           std::to_string(r.multiplicity), "true"});
            }
            name = "resonance_scatter.csv";
            text = w.str();
            break;
        }
        case PlotKind::filtration_masks: {
            if (!st.filtration) throw missing("lyapunov");
            const auto& F = *st.filtration;
            std::vector<std::string> header{"x"};
            if (dim == 2) header.push_back("y");
            for (std::size_t j = 1; j < F.minus.size(); ++j) header.push_back("O" + std::to_string(j));
            CsvWriter w(header);
            const Grid& g = F.minus[0].grid();
            for (std::size_t i = 0; i < g.size(); ++i) {
                Vec2 p = g.point(i);
                std::vector<std::string> row{csv_number(p[0])};
                if (dim == 2) row.push_back(csv_number(p[1]));
                for (std::size_t j = 1; j < F.minus.size(); ++j)
                    row.push_back(F.minus[j].weights()[i] > 0.5 ? "1" : "0");
                w.row(row);
            }
            name = "filtration_masks.csv";
            text = w.str();
            break;
        }
    }
    write_text(st.out / "plots" / name, text);
    return "plots/" + name;
}

// ---- stages -------------------------------------------------------------

namespace stages {

inline void dynamics(PipelineState& st, StageResult& r) {
    const auto& f = st.config.field;
    DetectionLog log;
    st.sets = find_basic_sets(st.spec, st.config.grid.fixed_point, f.orbit_seeds, f.period_cap, &log);
    st.lambda = lambda_scale(*st.sets);
    r.data["field"] = st.spec.tag;
    r.data["dim"] = st.spec.dim;
    r.data["gradient"] = st.spec.is_gradient();
    r.data["lambda"] = st.lambda;
    r.data["sets"] = detail::sets_json(*st.sets);
    r.data["warnings"] = log.warnings;
    bool hyperbolic = true;
    for (const auto& k : *st.sets) hyperbolic = hyperbolic && k.lambda > 0.0;
    r.check("every basic set is hyperbolic", hyperbolic);
}

inline void graph(PipelineState& st, StageResult& r) {
    if (st.sets->empty()) throw PreconditionError("stage 'graph' needs at least one basic set");
    st.graph = build_smale_graph(*st.sets, st.spec);
    st.transversality = check_transversality(*st.sets, st.spec);
    const auto& g = *st.graph;
    json edges = json::array(), raw = json::array();
    for (auto [a, b] : g.edges) edges.push_back({a, b});
    for (auto [a, b] : g.raw_edges) raw.push_back({a, b});
    r.data["nodes"] = g.size();
    r.data["edges"] = edges;
    r.data["raw_edges"] = raw;
    r.data["order"] = g.order;
    r.data["diagnostics"] = g.diagnostics;
    json conns = json::array();
    for (const auto& c : st.transversality->connections)
        conns.push_back({{"from", c.from}, {"to", c.to}, {"angle", c.angle}, {"flagged", c.flagged}});
    r.data["connections"] = conns;
    r.check("acyclic with a topological order", g.order.size() == g.size(), g.order.size());
    r.check("transversality", st.transversality->pass);
}

inline void lyapunov(PipelineState& st, StageResult& r) {
    const auto& c = st.config;
    FiltrationOptions fo;
    fo.grid_res = c.grid.filtration;
    st.filtration = build_filtration(*st.graph, st.spec, c.tolerances.eps, fo);
    const auto& F = *st.filtration;
    r.check("filtration nested", F.report.nested);
    r.check("filtration phi^-1-stable", F.report.stability_violations == 0, F.report.stability_violations);
    r.check("filtration separates the basic sets", F.report.separates);
    json cores = json::array();
    for (std::size_t i = 0; i < F.cores.size(); ++i) {
        auto u = check_unrevisited(F.cores[i], st.spec, c.tolerances.unrevisited_steps, std::size_t(c.samples.unrevisited),
                                   7u + unsigned(c.samples.seed));
        json w = nullptr;
        if (u.witness) w = {{"x", to_json(u.witness->x, st.spec.dim)}, {"left_at", u.witness->left_at},
                            {"returned_at", u.witness->returned_at}};
        cores.push_back({{"core", i + 1}, {"cells", F.cores[i].member_cells()}, {"samples", u.samples},
                         {"unrevisited", u.pass}, {"witness", w}});
        r.check("V" + std::to_string(i + 1) + " unrevisited", u.pass, u.samples);
    }
    r.data["steps"] = F.size();
    r.data["hausdorff"] = F.report.hausdorff;
    r.data["notes"] = F.report.notes;
    r.data["cores"] = cores;

    EnergyOptions eo;
    eo.grid_res = c.grid.energy;
    auto levels = detail::levels_for(st.graph->size());
    st.energy = global_energy(*st.graph, st.spec, levels, c.tolerances.eps, eo);
    const auto& e = st.energy->report;
    r.data["energy"] = {{"levels", levels},       {"T", e.T},
                        {"min_lie", e.min_lie},   {"eta", e.eta},
                        {"max_pin_error", e.max_pin_error}, {"max_level_error", e.max_level_error},
                        {"neighborhood_radius", e.neighborhood_radius}};
    r.check("L_V E >= -1e-6", e.min_lie >= -1e-6, e.min_lie);
    if (st.graph->size() > 1) r.check("L_V E > 0 outside the neighbourhoods", e.eta > 0.0, e.eta);
    r.check("E pinned near each set", e.max_pin_error <= c.tolerances.eps, e.max_pin_error);
    r.check("E(K_i) = level", e.max_level_error <= 1e-3, e.max_level_error);
    r.files.push_back(emit_plot_data(st, PlotKind::energy_contours));
    r.files.push_back(emit_plot_data(st, PlotKind::filtration_masks));
}

inline void cotangent(PipelineState& st, StageResult& r) {
    const auto& c = st.config;
    st.clouds = sigma_sets(*st.graph, st.spec, c.samples.sigma);
    const auto& cl = *st.clouds;
    r.data["sigma"] = {{"u", cl.u.size()},   {"uo", cl.uo.size()}, {"s", cl.s.size()},  {"so", cl.so.size()},
                       {"separation_s_uo", cl.separation_s_uo}, {"separation_u_so", cl.separation_u_so},
                       {"unresolved", cl.unresolved}};
    r.check("Sigma_s and Sigma_uo are separated", cl.separation_s_uo > 0.0, cl.separation_s_uo);
    r.check("Sigma_u and Sigma_so are separated", cl.separation_u_so > 0.0, cl.separation_u_so);
    json cones = json::array();
    for (const auto& k : *st.sets) {
        if (k.is_orbit() || k.index == 0 || k.index == k.ambient_dim()) continue;
        auto ext = extend_frames(k, st.spec, c.tolerances.eps, *st.sets, {c.grid.cone, 0.0});
        auto rep = cone_contraction_check(flow_cone_dynamics(ext), c.tolerances.delta0, c.tolerances.cone_depth,
                                          c.samples.cone, 11u + unsigned(c.samples.seed));
        cones.push_back({{"set", k.id},
                         {"m_delta0", rep.m_delta0},
                         {"lambda", rep.lambda},
                         {"worst_factor", json_number(rep.worst_factor)},
                         {"factor_bound", rep.factor_bound},
                         {"min_growth", json_number(rep.min_growth)},
                         {"growth_bound", rep.growth_bound},
                         {"contraction_samples", rep.contraction_samples},
                         {"growth_samples", rep.growth_samples},
                         {"violations", rep.violations}});
        r.check("cone contraction at set " + std::to_string(k.id), rep.passed && rep.violations == 0, rep.violations);
    }
    r.data["cones"] = cones;
    r.files.push_back(emit_plot_data(st, PlotKind::sigma_clouds));
}

inline void escape(PipelineState& st, StageResult& r) {
    const auto& c = st.config;
    EscapeOptions eo;
    eo.order.fiber_grid = c.grid.fiber;
    eo.order.fiber_theta = c.grid.fiber_theta;
    eo.order.sigma_budget = c.samples.sigma;
    eo.order.seed = 5u + unsigned(c.samples.seed);
    eo.weight_samples = c.samples.weight;
    eo.neighborhood = c.tolerances.eps;
    st.escape = build_escape_function({c.escape.u, c.escape.n0, c.escape.s}, *st.graph, st.spec, eo);
    const auto& b = st.escape->order.bounds;
    const auto& w = st.escape->weight_report;
    r.data["parameters"] = {{"u", c.escape.u}, {"n0", c.escape.n0}, {"s", c.escape.s}};
    r.data["cone_bounds"] = {{"samples_s", b.samples_s},     {"samples_o", b.samples_o},
                             {"samples_u", b.samples_u},     {"min_on_s", json_number(b.min_on_s)},
                             {"max_on_u", json_number(b.max_on_u)}, {"min_on_o", json_number(b.min_on_o)},
                             {"max_on_o", json_number(b.max_on_o)}, {"violations", b.violations}};
    r.data["weight"] = {{"gamma", w.gamma}, {"samples", w.samples}, {"violations", w.violations}};
    r.check("order function cone bounds", b.passed && b.violations == 0, b.violations);
    r.check("weight sign law", w.violations == 0 && w.gamma > 0.0, w.gamma);
    DecayOptions d;
    d.samples = c.samples.decay;
    d.global_tol = c.tolerances.decay_global;
    d.seed = 13u + unsigned(c.samples.seed);
    st.decay = verify_decay(st.escape->escape, w.gamma, d);
    const auto& dr = *st.decay;
    r.data["decay"] = {{"R", json_number(dr.R)},
                       {"C_m", dr.C_m},
                       {"gamma", dr.gamma},
                       {"samples", dr.samples},
                       {"exempt_samples", dr.exempt_samples},
                       {"max_derivative", json_number(dr.max_derivative)},
                       {"max_strict", json_number(dr.max_strict)},
                       {"radii_tried", dr.radii_tried},
                       {"violations_per_radius", dr.violations_per_radius}};
    r.check("X_H G_m decays", dr.passed, json_number(dr.max_strict));
}

inline void spectral(PipelineState& st, StageResult& r, const PipelineOptions& opt) {
    const auto& c = st.config;
    const int dim = st.spec.dim;
    const double Lam = st.lambda;
    const int K = c.cutoff(dim);
    OrderSymbol m = order_symbol(st.escape->order.order, dim);
    st.spectral = conjugate_pair(st.spec, m, K);
    const auto& sp = *st.spectral;
    const double region = -c.tolerances.region * Lam;
    const double tol = c.tolerances.match_tol * Lam;
    r.data["cutoff"] = K;
    r.data["check_cutoff"] = sp.check.cutoff;
    r.data["weight_scale"] = sp.scale;
    r.data["condition"] = sp.condition;
    r.data["series_terms"] = sp.main.series_terms;
    r.data["lambda"] = Lam;
    json degrees = json::array();
    st.resonances.clear();
    for (int k = 0; k <= dim; ++k) {
        st.resonances.push_back(resonances(sp, k, region, tol));
        degrees.push_back(detail::resonance_json(st.resonances.back()));
        std::string name = "resonances_k" + std::to_string(k) + ".csv";
        write_text(st.out / name, detail::write_resonance_csv(st.resonances.back()));
        r.files.push_back(name);
    }
    r.data["resonances"] = degrees;
    r.files.push_back(emit_plot_data(st, PlotKind::resonance_scatter));

    const auto& rs0 = st.resonances[0];
    r.check("matched resonance at 0", rs0.near(0.0, tol) != nullptr);
    auto pi0 = riesz_projector(sp.main.P[0], 0.0, riesz_radius(rs0, 0.0, std::abs(region) / 3.0), 32,
                               c.tolerances.riesz_idempotency);
    r.data["riesz0"] = {{"rank", pi0.rank}, {"trace", pi0.trace}, {"idempotency", pi0.idempotency},
                        {"nilpotency", pi0.nilpotency}, {"radius", pi0.radius}};
    r.check("Riesz projector at 0 is idempotent", pi0.idempotency <= c.tolerances.riesz_idempotency, pi0.idempotency);

    double C0 = spectral_abscissa(rs0) + 0.05;
    auto res = resolvent_norm_check(sp.main.P[0], C0, {0.2, 1.4, 2.6, 3.8, 5.0});
    json samples = json::array();
    for (const auto& s : res.samples)
        samples.push_back({{"z", s.z.real()}, {"norm", s.norm}, {"bound", s.bound}, {"ok", s.ok}});
    r.data["resolvent"] = {{"C0", C0}, {"numerical_abscissa", res.numerical_abscissa}, {"samples", samples}};
    r.check("resolvent bound 1/(Re z - C0)", res.passed, res.numerical_abscissa, false);

    if (!opt.with_complex) return;
    ComplexOptions co;
    co.region = region;
    co.tol = tol;
    co.rank_tol = c.tolerances.rank_tol;
    st.complex = build_spectral_complex(sp, co);
    const auto& cx = *st.complex;
    r.data["complex"] = {{"ranks", cx.ranks},
                         {"cohomology", cx.cohomology},
                         {"dd_residual", cx.dd_residual},
                         {"commutation_residual", cx.commutation_residual},
                         {"intertwining_residual", cx.intertwining_residual},
                         {"empty", cx.empty},
                         {"diagnostic", cx.diagnostic}};
    r.check("complex is nonempty", !cx.empty);
    r.check("cohomology equals the Betti numbers", cx.cohomology == betti_numbers(dim), cx.cohomology);
    r.check("d d residual", cx.dd_residual <= c.tolerances.complex_residual, cx.dd_residual);
    r.check("pi d commutation residual", cx.commutation_residual <= c.tolerances.complex_residual,
            cx.commutation_residual);
    auto hodge = hodge_identity_check(dim, K, c.samples.homotopy, 31u + unsigned(c.samples.seed));
    auto dyn = dynamical_identity_check(cx, sp.main, c.samples.homotopy, 37u + unsigned(c.samples.seed));
    r.data["homotopy"] = {{"samples", c.samples.homotopy},
                          {"hodge", hodge.max_residual},
                          {"dynamical", dyn.max_residual}};
    r.check("homotopy identity, Hodge side", hodge.worst() <= c.tolerances.homotopy_hodge, hodge.worst());
    r.check("homotopy identity, dynamical side", dyn.worst() <= c.tolerances.homotopy_dynamical, dyn.worst());
}

inline void morse(PipelineState& st, StageResult& r) {
    if (!st.spec.is_gradient()) {
        r.status = "skipped";
        r.reason = "field is not a gradient";
        return;
    }
    st.morse = morse_complex(st.spec);
    const auto& m = *st.morse;
    json gens = json::array();
    for (const auto& g : m.generators)
        gens.push_back({{"x", to_json(g.x, m.dim)}, {"index", g.index}, {"value", g.value}});
    json bd = json::array();
    for (int k = 1; k <= m.dim; ++k) bd.push_back(detail::int_matrix_json(m.boundary[k]));
    json lines = json::array();
    for (const auto& l : m.lines) lines.push_back({{"from", l.from}, {"to", l.to}, {"sign", l.sign}});
    r.data["generators"] = gens;
    r.data["boundary"] = bd;
    r.data["lines"] = lines;
    r.data["homology"] = m.homology;
    r.data["torsion"] = m.torsion;
    r.check("boundary squares to zero", boundary_squares_to_zero(m));
    r.check("homology equals the Betti numbers", m.homology == betti_numbers(m.dim), m.homology);
}

inline void compare(PipelineState& st, StageResult& r) {
    if (!st.morse || !st.complex) {
        r.status = "skipped";
        r.reason = !st.morse ? "no Morse complex" : "no spectral complex";
        return;
    }
    st.comparison = compare_with_spectral(*st.morse, *st.complex);
    const auto& c = *st.comparison;
    r.data["skipped"] = c.skipped;
    r.data["diagnostic"] = c.diagnostic;
    for (const auto& x : c.checks) r.check(x.name, x.passed, x.detail);
}

}  // namespace stages

inline json stage_json(const StageResult& r) {
    json checks = json::array();
    for (const auto& c : r.checks)
        checks.push_back({{"name", c.name}, {"passed", c.passed}, {"gating", c.gating}, {"value", c.value}});
    json j = {{"schema_version", schema_version}, {"stage", r.name}, {"status", r.status}};
    if (!r.reason.empty()) j["reason"] = r.reason;
    j["checks"] = checks;
    j["files"] = r.files;
    j["data"] = r.data;
    return j;
}

// Runs the requested stages (and what they depend on) in pipeline order. The
// first failing stage halts the run with its exit code.
inline PipelineOutcome run_pipeline(const RunConfig& config, const PipelineOptions& opt = {}) {
    PipelineOutcome out;
    PipelineState& st = out.state;
    st.config = config;
    st.out = opt.output_dir ? *opt.output_dir : config.output_dir;
    std::set<std::string> todo;
    json stage_list = json::array();
    std::string current = "config";
    auto fail = [&](int code, const std::string& msg) {
        out.exit_code = code;
        out.failed_stage = current;
        out.message = msg;
        try {
            write_json(st.out / "error.json", {{"schema_version", schema_version},
                                               {"stage", current},
                                               {"exit_code", code},
                                               {"message", msg}});
        } catch (const Error&) {
        }
    };
    try {
        config.validate();
        st.spec = config.field_spec();
        for (const auto& s : config.stages) detail::add_with_dependencies(s, todo);
        std::filesystem::create_directories(st.out);
        std::filesystem::remove(st.out / "error.json");
        write_text(st.out / "config.toml", serialize_config(config));
        for (const auto& name : pipeline_stages()) {
            if (!todo.count(name)) continue;
            current = name;
            StageResult r;
            r.name = name;
            if (name == "dynamics") stages::dynamics(st, r);
            else if (name == "graph") stages::graph(st, r);
            else if (name == "lyapunov") stages::lyapunov(st, r);
            else if (name == "cotangent") stages::cotangent(st, r);
            else if (name == "escape") stages::escape(st, r);
            else if (name == "spectral") stages::spectral(st, r, opt);
            else if (name == "morse") stages::morse(st, r);
            else stages::compare(st, r);
            std::string failed;
            for (const auto& c : r.checks)
                if (!c.passed && (c.gating || opt.strict)) failed += (failed.empty() ? "" : "; ") + c.name;
            if (!failed.empty()) r.status = "fail";
            write_json(st.out / (name + ".json"), stage_json(r));
            stage_list.push_back({{"stage", name}, {"status", r.status}});
            st.results.push_back(std::move(r));
            if (!failed.empty()) {
                fail(int(ExitCode::check_failure), "stage '" + name + "' failed: " + failed);
                break;
            }
        }
    } catch (const Error& e) {
        fail(int(e.code()), e.what());
    } catch (const std::exception& e) {
        fail(int(ExitCode::numerical_degeneracy), e.what());
    }
    json summary = {{"schema_version", schema_version},
                    {"field", config.field.tag},
                    {"stages", stage_list},
                    {"exit_code", out.exit_code},
                    {"passed", out.exit_code == 0}};
    if (out.exit_code != 0) summary["error"] = {{"stage", out.failed_stage}, {"message", out.message}};
    try {
        write_json(st.out / "summary.json", summary);
    } catch (const Error&) {
        // Unwritable output directory: the exit code still reports the failure.
    }
    return out;
}

}  // namespace axioma

#endif
