#ifndef AXIOMA_CLI_CONFIG_HPP
#define AXIOMA_CLI_CONFIG_HPP

// Run configuration: a line-oriented TOML subset ([section], key = value with
// numbers, strings, booleans and nested arrays) and the typed RunConfig.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "axioma/core/errors.hpp"
#include "axioma/flow/vector_field.hpp"

namespace axioma {

struct ConfigValue {
    std::variant<bool, double, std::string, std::vector<ConfigValue>> v;

    bool is_number() const { return std::holds_alternative<double>(v); }
    bool is_string() const { return std::holds_alternative<std::string>(v); }
    bool is_bool() const { return std::holds_alternative<bool>(v); }
    bool is_array() const { return std::holds_alternative<std::vector<ConfigValue>>(v); }
    bool operator==(const ConfigValue&) const = default;
};

// section -> key -> value; keys before any section header live in "".
using ConfigDocument = std::map<std::string, std::map<std::string, ConfigValue>>;

namespace detail {

class ConfigParser {
public:
    ConfigParser(const std::string& text, int line) : s_(text), line_(line) {}

    ConfigValue value() {
        skip();
        if (i_ >= s_.size()) fail("missing value");
        char c = s_[i_];
        if (c == '"') return {string()};
        if (c == '[') {
            ++i_;
            std::vector<ConfigValue> items;
            skip();
            if (peek() == ']') {
                ++i_;
                return {items};
            }
            while (true) {
                items.push_back(value());
                skip();
                if (peek() == ',') {
                    ++i_;
                    skip();
                    if (peek() == ']') {
                        ++i_;
                        break;
                    }
                    continue;
                }
                if (peek() == ']') {
                    ++i_;
                    break;
                }
                fail("expected ',' or ']' in array");
            }
            return {items};
        }
        if (s_.compare(i_, 4, "true") == 0) {
            i_ += 4;
            return {true};
        }
        if (s_.compare(i_, 5, "false") == 0) {
            i_ += 5;
            return {false};
        }
        std::size_t start = i_;
        while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '.' ||
                                  s_[i_] == '-' || s_[i_] == '+' || s_[i_] == '_'))
            ++i_;
        std::string tok = s_.substr(start, i_ - start);
        tok.erase(std::remove(tok.begin(), tok.end(), '_'), tok.end());
        if (tok == "inf" || tok == "+inf") return {std::numeric_limits<double>::infinity()};
        if (tok == "-inf") return {-std::numeric_limits<double>::infinity()};
        if (tok == "nan" || tok == "+nan" || tok == "-nan") fail("NaN is not accepted");
        char* end = nullptr;
        double d = std::strtod(tok.c_str(), &end);
        if (tok.empty() || end != tok.c_str() + tok.size()) fail("cannot parse value '" + tok + "'");
        return {d};
    }

    void finish() {
        skip();
        if (i_ < s_.size()) fail("trailing characters");
    }

private:
    char peek() const { return i_ < s_.size() ? s_[i_] : '\0'; }
    void skip() {
        while (i_ < s_.size()) {
            if (std::isspace(static_cast<unsigned char>(s_[i_]))) {
                ++i_;
            } else if (s_[i_] == '#') {
                while (i_ < s_.size() && s_[i_] != '\n') ++i_;
            } else {
                break;
            }
        }
    }
    std::string string() {
        ++i_;
        std::string out;
        while (i_ < s_.size() && s_[i_] != '"') {
            if (s_[i_] == '\\' && i_ + 1 < s_.size()) {
                char e = s_[++i_];
                out += e == 'n' ? '\n' : e == 't' ? '\t' : e;
            } else {
                out += s_[i_];
            }
            ++i_;
        }
        if (i_ >= s_.size()) fail("unterminated string");
        ++i_;
        return out;
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("config line " + std::to_string(line_) + ": " + what);
    }

    const std::string& s_;
    std::size_t i_ = 0;
    int line_;
};

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// Bracket depth change of a line, ignoring strings and comments.
inline int bracket_balance(const std::string& s) {
    int depth = 0;
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (in_str) {
            if (c == '\\') ++i;
            else if (c == '"') in_str = false;
        } else if (c == '"') {
            in_str = true;
        } else if (c == '#') {
            break;
        } else if (c == '[') {
            ++depth;
        } else if (c == ']') {
            --depth;
        }
    }
    return depth;
}

inline std::string format_number(double d) {
    if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
    if (d == std::floor(d) && std::abs(d) < 1e15) {
        std::ostringstream os;
        os << static_cast<long long>(d);
        return os.str();
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    // Shortest representation that round-trips.
    for (int p = 1; p <= 17; ++p) {
        char b[32];
        std::snprintf(b, sizeof b, "%.*g", p, d);
        if (std::strtod(b, nullptr) == d) return b;
    }
    return buf;
}

inline std::string format_value(const ConfigValue& v) {
    if (v.is_bool()) return std::get<bool>(v.v) ? "true" : "false";
    if (v.is_number()) return format_number(std::get<double>(v.v));
    if (v.is_string()) {
        std::string out = "\"";
        for (char c : std::get<std::string>(v.v)) {
            if (c == '"' || c == '\\') out += '\\';
            if (c == '\n') {
                out += "\\n";
                continue;
            }
            out += c;
        }
        return out + "\"";
    }
    std::string out = "[";
    const auto& a = std::get<std::vector<ConfigValue>>(v.v);
    for (std::size_t i = 0; i < a.size(); ++i) out += (i ? ", " : "") + format_value(a[i]);
    return out + "]";
}

}  // namespace detail

inline ConfigDocument parse_config_text(const std::string& text) {
    ConfigDocument doc;
    std::string section;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        int start_line = lineno;
        std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t[0] == '[') {
            std::size_t close = t.find(']');
            if (close == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": bad section header");
            section = detail::trim(t.substr(1, close - 1));
            std::string rest = detail::trim(t.substr(close + 1));
            if (!rest.empty() && rest[0] != '#')
                throw ConfigError("config line " + std::to_string(lineno) + ": text after section header");
            if (section.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty section name");
            doc[section];
            continue;
        }
        std::size_t eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = detail::trim(t.substr(0, eq));
        std::string rhs = t.substr(eq + 1);
        // Arrays may continue over several lines.
        int depth = detail::bracket_balance(rhs);
        while (depth > 0 && std::getline(in, line)) {
            ++lineno;
            rhs += "\n" + line;
            depth += detail::bracket_balance(line);
        }
        if (key.empty()) throw ConfigError("config line " + std::to_string(start_line) + ": empty key");
        detail::ConfigParser p(rhs, start_line);
        ConfigValue v = p.value();
        p.finish();
        if (doc[section].count(key))
            throw ConfigError("config line " + std::to_string(start_line) + ": duplicate key '" + key + "'");
        doc[section][key] = v;
    }
    return doc;
}

inline std::string write_config_text(const ConfigDocument& doc) {
    std::ostringstream os;
    bool first = true;
    for (const auto& [section, keys] : doc) {
        if (!section.empty()) {
            if (!first) os << "\n";
            os << "[" << section << "]\n";
        }
        for (const auto& [k, v] : keys) os << k << " = " << detail::format_value(v) << "\n";
        first = false;
    }
    return os.str();
}

// ---- typed configuration ------------------------------------------------

inline const std::vector<std::string>& pipeline_stages() {
    static const std::vector<std::string> s{"dynamics", "graph", "lyapunov", "cotangent",
                                            "escape",   "spectral", "morse", "compare"};
    return s;
}

struct FieldConfig {
    std::string tag = "grad_cos1";  // catalog tag or "inline"
    std::optional<Vec2> param;       // catalog parameter (rotation vector, limit-cycle rate)
    int dim = 2;                     // inline fields only
    std::vector<FourierTerm> potential;                // inline gradient field V = -grad f
    std::array<std::vector<FourierTerm>, 2> components;  // inline general field
    std::vector<Vec2> orbit_seeds;
    double period_cap = 5.0;

    bool operator==(const FieldConfig& o) const {
        auto same_terms = [](const std::vector<FourierTerm>& a, const std::vector<FourierTerm>& b) {
            if (a.size() != b.size()) return false;
            for (std::size_t i = 0; i < a.size(); ++i)
                if (a[i].k != b[i].k || a[i].a != b[i].a || a[i].b != b[i].b) return false;
            return true;
        };
        return tag == o.tag && param == o.param && dim == o.dim && same_terms(potential, o.potential) &&
               same_terms(components[0], o.components[0]) && same_terms(components[1], o.components[1]) &&
               orbit_seeds == o.orbit_seeds && period_cap == o.period_cap;
    }
};

struct GridConfig {
    int fixed_point = 32;
    int filtration = 32;
    int energy = 64;
    int fiber = 12;
    int fiber_theta = 8;
    int cone = 32;
    int fourier_cutoff = 0;  // 0: 48 on T^1, 8 on T^2
    bool operator==(const GridConfig&) const = default;
};

struct EscapeConfig {
    double u = -8.0;
    double n0 = 0.0;
    double s = 8.0;
    bool operator==(const EscapeConfig&) const = default;
};

struct ToleranceConfig {
    double eps = 0.1;                  // filtration and energy neighbourhoods
    double match_tol = 0.02;           // resonance matching, in units of Lambda
    double region = 2.5;               // resonance region Re z >= -region Lambda
    double riesz_idempotency = 1e-6;
    double rank_tol = 1e-6;
    double homotopy_hodge = 1e-8;
    double homotopy_dynamical = 1e-6;
    double complex_residual = 1e-6;
    double delta0 = 0.1;
    int unrevisited_steps = 50;
    int cone_depth = 4;
    double decay_global = 1e-6;
    bool operator==(const ToleranceConfig&) const = default;
};

struct SampleConfig {
    int seed = 0;  // added to every stage's base seed
    int unrevisited = 1000;
    int cone = 1000;
    int decay = 2000;
    int sigma = 800;
    int weight = 1500;
    int homotopy = 20;
    bool operator==(const SampleConfig&) const = default;
};

struct RunConfig {
    FieldConfig field;
    GridConfig grid;
    EscapeConfig escape;
    ToleranceConfig tolerances;
    SampleConfig samples;
    std::string output_dir = "out";
    std::vector<std::string> stages = pipeline_stages();

    bool operator==(const RunConfig&) const = default;

    int cutoff(int dim) const { return grid.fourier_cutoff > 0 ? grid.fourier_cutoff : (dim == 1 ? 48 : 8); }
    bool wants(const std::string& stage) const { return std::find(stages.begin(), stages.end(), stage) != stages.end(); }

    VectorFieldSpec field_spec() const {
        if (field.tag != "inline") return field.param ? catalog_field(field.tag, *field.param) : catalog_field(field.tag);
        if (!field.potential.empty()) return gradient_field(field.potential, field.dim, "inline");
        VectorFieldSpec s;
        s.dim = field.dim;
        s.components = field.components;
        s.validate();
        return s;
    }

    // Every constraint is checked here, before any computation.
    void validate() const {
        if (field.tag == "inline") {
            if (field.dim != 1 && field.dim != 2) throw ConfigError("field.dim must be 1 or 2");
            if (field.potential.empty() && field.components[0].empty() && field.components[1].empty())
                throw ConfigError("inline field needs 'potential' or 'vx'/'vy' terms");
            if (!field.potential.empty() && (!field.components[0].empty() || !field.components[1].empty()))
                throw ConfigError("inline field takes either 'potential' or 'vx'/'vy', not both");
        } else {
            const auto& tags = catalog_tags();
            if (std::find(tags.begin(), tags.end(), field.tag) == tags.end())
                throw ConfigError("unknown catalog field '" + field.tag + "'");
        }
        field_spec().validate();
        if (!(field.period_cap > 0.0)) throw ConfigError("field.period_cap must be positive");
        if (!(escape.u < 0.0 && 0.0 <= escape.n0 && escape.n0 < escape.s))
            throw ConfigError("escape parameters must satisfy u < 0 <= n0 < s (got u=" + detail::format_number(escape.u) +
                              ", n0=" + detail::format_number(escape.n0) + ", s=" + detail::format_number(escape.s) + ")");
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive and finite");
        };
        if (grid.fixed_point < 8) throw ConfigError("grid.fixed_point must be at least 8");
        if (grid.filtration < 8 || grid.energy < 8 || grid.fiber < 4 || grid.fiber_theta < 4 || grid.cone < 8)
            throw ConfigError("grid resolutions are too small");
        if (grid.fourier_cutoff < 0) throw ConfigError("grid.fourier_cutoff must be >= 0");
        positive(tolerances.eps, "tolerances.eps");
        positive(tolerances.match_tol, "tolerances.match_tol");
        positive(tolerances.region, "tolerances.region");
        positive(tolerances.riesz_idempotency, "tolerances.riesz_idempotency");
        positive(tolerances.rank_tol, "tolerances.rank_tol");
        positive(tolerances.homotopy_hodge, "tolerances.homotopy_hodge");
        positive(tolerances.homotopy_dynamical, "tolerances.homotopy_dynamical");
        positive(tolerances.complex_residual, "tolerances.complex_residual");
        positive(tolerances.decay_global, "tolerances.decay_global");
        if (!(tolerances.delta0 > 0.0 && tolerances.delta0 <= 1.0)) throw ConfigError("tolerances.delta0 must lie in (0, 1]");
        if (tolerances.unrevisited_steps < 1 || tolerances.cone_depth < 1)
            throw ConfigError("iteration counts must be at least 1");
        if (samples.unrevisited < 1 || samples.cone < 1 || samples.decay < 1 || samples.weight < 1 ||
            samples.homotopy < 1)
            throw ConfigError("sample counts must be at least 1");
        if (samples.sigma < 16) throw ConfigError("samples.sigma must be at least 16");
        if (output_dir.empty()) throw ConfigError("output.dir must not be empty");
        if (stages.empty()) throw ConfigError("pipeline.stages must not be empty");
        for (const auto& s : stages)
            if (std::find(pipeline_stages().begin(), pipeline_stages().end(), s) == pipeline_stages().end())
                throw ConfigError("unknown stage '" + s + "'");
    }
};

namespace detail {

inline double as_number(const ConfigValue& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
    return std::get<double>(v.v);
}

inline int as_int(const ConfigValue& v, const std::string& key) {
    double d = as_number(v, key);
    if (d != std::floor(d) || std::abs(d) > 1e9) throw ConfigError("'" + key + "' must be an integer");
    return static_cast<int>(d);
}

inline std::string as_string(const ConfigValue& v, const std::string& key) {
    if (!v.is_string()) throw ConfigError("'" + key + "' must be a string");
    return std::get<std::string>(v.v);
}

inline const std::vector<ConfigValue>& as_array(const ConfigValue& v, const std::string& key) {
    if (!v.is_array()) throw ConfigError("'" + key + "' must be an array");
    return std::get<std::vector<ConfigValue>>(v.v);
}

inline std::vector<double> as_numbers(const ConfigValue& v, const std::string& key) {
    std::vector<double> out;
    for (const auto& x : as_array(v, key)) out.push_back(as_number(x, key));
    return out;
}

// Terms are [kx, ky, a, b]: a cos(2 pi k.x) + b sin(2 pi k.x).
inline std::vector<FourierTerm> as_terms(const ConfigValue& v, const std::string& key) {
    std::vector<FourierTerm> out;
    for (const auto& t : as_array(v, key)) {
        auto n = as_numbers(t, key);
        if (n.size() != 4) throw ConfigError("'" + key + "' terms must be [kx, ky, a, b]");
        for (int i = 0; i < 2; ++i)
            if (n[i] != std::floor(n[i])) throw ConfigError("'" + key + "' frequencies must be integers");
        out.push_back({{int(n[0]), int(n[1])}, n[2], n[3]});
    }
    return out;
}

inline ConfigValue terms_value(const std::vector<FourierTerm>& terms) {
    std::vector<ConfigValue> a;
    for (const auto& t : terms)
        a.push_back({std::vector<ConfigValue>{{double(t.k[0])}, {double(t.k[1])}, {t.a}, {t.b}}});
    return {a};
}

inline ConfigValue numbers_value(std::initializer_list<double> xs) {
    std::vector<ConfigValue> a;
    for (double x : xs) a.push_back({x});
    return {a};
}

}  // namespace detail

inline RunConfig config_from_document(const ConfigDocument& doc) {
    using namespace detail;
    RunConfig c;
    for (const auto& [section, keys] : doc) {
        for (const auto& [key, v] : keys) {
            const std::string full = section.empty() ? key : section + "." + key;
            auto unknown = [&] { throw ConfigError("unknown config key '" + full + "'"); };
            if (section == "field") {
                if (key == "tag") c.field.tag = as_string(v, full);
                else if (key == "param") {
                    auto p = as_numbers(v, full);
                    if (p.size() != 2) throw ConfigError("'field.param' must have two entries");
                    c.field.param = Vec2(p[0], p[1]);
                } else if (key == "dim") c.field.dim = as_int(v, full);
                else if (key == "potential") c.field.potential = as_terms(v, full);
                else if (key == "vx") c.field.components[0] = as_terms(v, full);
                else if (key == "vy") c.field.components[1] = as_terms(v, full);
                else if (key == "orbit_seeds") {
                    for (const auto& s : as_array(v, full)) {
                        auto p = as_numbers(s, full);
                        if (p.size() != 2) throw ConfigError("'field.orbit_seeds' entries must be [x, y]");
                        c.field.orbit_seeds.emplace_back(p[0], p[1]);
                    }
                } else if (key == "period_cap") c.field.period_cap = as_number(v, full);
                else unknown();
            } else if (section == "grid") {
                int n = as_int(v, full);
                if (key == "fixed_point") c.grid.fixed_point = n;
                else if (key == "filtration") c.grid.filtration = n;
                else if (key == "energy") c.grid.energy = n;
                else if (key == "fiber") c.grid.fiber = n;
                else if (key == "fiber_theta") c.grid.fiber_theta = n;
                else if (key == "cone") c.grid.cone = n;
                else if (key == "fourier_cutoff") c.grid.fourier_cutoff = n;
                else unknown();
            } else if (section == "escape") {
                double d = as_number(v, full);
                if (key == "u") c.escape.u = d;
                else if (key == "n0") c.escape.n0 = d;
                else if (key == "s") c.escape.s = d;
                else unknown();
            } else if (section == "tolerances") {
                auto& t = c.tolerances;
                if (key == "unrevisited_steps") t.unrevisited_steps = as_int(v, full);
                else if (key == "cone_depth") t.cone_depth = as_int(v, full);
                else {
                    double d = as_number(v, full);
                    if (key == "eps") t.eps = d;
                    else if (key == "match_tol") t.match_tol = d;
                    else if (key == "region") t.region = d;
                    else if (key == "riesz_idempotency") t.riesz_idempotency = d;
                    else if (key == "rank_tol") t.rank_tol = d;
                    else if (key == "homotopy_hodge") t.homotopy_hodge = d;
                    else if (key == "homotopy_dynamical") t.homotopy_dynamical = d;
                    else if (key == "complex_residual") t.complex_residual = d;
                    else if (key == "delta0") t.delta0 = d;
                    else if (key == "decay_global") t.decay_global = d;
                    else unknown();
                }
            } else if (section == "samples") {
                int n = as_int(v, full);
                if (key == "seed") c.samples.seed = n;
                else if (key == "unrevisited") c.samples.unrevisited = n;
                else if (key == "cone") c.samples.cone = n;
                else if (key == "decay") c.samples.decay = n;
                else if (key == "sigma") c.samples.sigma = n;
                else if (key == "weight") c.samples.weight = n;
                else if (key == "homotopy") c.samples.homotopy = n;
                else unknown();
            } else if (section == "output") {
                if (key == "dir") c.output_dir = as_string(v, full);
                else unknown();
            } else if (section == "pipeline") {
                if (key == "stages") {
                    c.stages.clear();
                    for (const auto& s : as_array(v, full)) c.stages.push_back(as_string(s, full));
                    if (c.stages == std::vector<std::string>{"all"}) c.stages = pipeline_stages();
                } else unknown();
            } else {
                throw ConfigError("unknown config section '" + section + "'");
            }
        }
    }
    return c;
}

inline ConfigDocument config_to_document(const RunConfig& c) {
    using detail::numbers_value;
    ConfigDocument doc;
    auto& f = doc["field"];
    f["tag"] = {c.field.tag};
    if (c.field.param) f["param"] = numbers_value({(*c.field.param)[0], (*c.field.param)[1]});
    if (c.field.tag == "inline") {
        f["dim"] = {double(c.field.dim)};
        if (!c.field.potential.empty()) f["potential"] = detail::terms_value(c.field.potential);
        if (!c.field.components[0].empty()) f["vx"] = detail::terms_value(c.field.components[0]);
        if (!c.field.components[1].empty()) f["vy"] = detail::terms_value(c.field.components[1]);
    }
    if (!c.field.orbit_seeds.empty()) {
        std::vector<ConfigValue> seeds;
        for (const auto& s : c.field.orbit_seeds) seeds.push_back(numbers_value({s[0], s[1]}));
        f["orbit_seeds"] = {seeds};
    }
    f["period_cap"] = {c.field.period_cap};
    auto& g = doc["grid"];
    g["fixed_point"] = {double(c.grid.fixed_point)};
    g["filtration"] = {double(c.grid.filtration)};
    g["energy"] = {double(c.grid.energy)};
    g["fiber"] = {double(c.grid.fiber)};
    g["fiber_theta"] = {double(c.grid.fiber_theta)};
    g["cone"] = {double(c.grid.cone)};
    g["fourier_cutoff"] = {double(c.grid.fourier_cutoff)};
    auto& e = doc["escape"];
    e["u"] = {c.escape.u};
    e["n0"] = {c.escape.n0};
    e["s"] = {c.escape.s};
    auto& t = doc["tolerances"];
    t["eps"] = {c.tolerances.eps};
    t["match_tol"] = {c.tolerances.match_tol};
    t["region"] = {c.tolerances.region};
    t["riesz_idempotency"] = {c.tolerances.riesz_idempotency};
    t["rank_tol"] = {c.tolerances.rank_tol};
    t["homotopy_hodge"] = {c.tolerances.homotopy_hodge};
    t["homotopy_dynamical"] = {c.tolerances.homotopy_dynamical};
    t["complex_residual"] = {c.tolerances.complex_residual};
    t["delta0"] = {c.tolerances.delta0};
    t["unrevisited_steps"] = {double(c.tolerances.unrevisited_steps)};
    t["cone_depth"] = {double(c.tolerances.cone_depth)};
    t["decay_global"] = {c.tolerances.decay_global};
    auto& s = doc["samples"];
    s["seed"] = {double(c.samples.seed)};
    s["unrevisited"] = {double(c.samples.unrevisited)};
    s["cone"] = {double(c.samples.cone)};
    s["decay"] = {double(c.samples.decay)};
    s["sigma"] = {double(c.samples.sigma)};
    s["weight"] = {double(c.samples.weight)};
    s["homotopy"] = {double(c.samples.homotopy)};
    doc["output"]["dir"] = {c.output_dir};
    std::vector<ConfigValue> st;
    for (const auto& x : c.stages) st.push_back({x});
    doc["pipeline"]["stages"] = {st};
    return doc;
}

inline RunConfig parse_config(const std::string& text) { return config_from_document(parse_config_text(text)); }

inline std::string serialize_config(const RunConfig& c) { return write_config_text(config_to_document(c)); }

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace axioma

#endif
