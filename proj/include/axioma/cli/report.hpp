#ifndef AXIOMA_CLI_REPORT_HPP
#define AXIOMA_CLI_REPORT_HPP

// JSON and CSV writers shared by the pipeline stages.

#include <complex>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "axioma/core/errors.hpp"
#include "axioma/core/torus.hpp"

namespace axioma {

using json = nlohmann::ordered_json;

inline constexpr int schema_version = 1;

inline json to_json(const Vec2& v, int dim) {
    return dim == 1 ? json::array({v[0]}) : json::array({v[0], v[1]});
}

inline json to_json(std::complex<double> z) { return json::array({z.real(), z.imag()}); }

// NaN and infinities are not valid JSON numbers; they become strings.
inline json json_number(double d) {
    if (std::isnan(d)) return "nan";
    if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
    return d;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << text;
}

inline void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// One RFC 4180 field: quoted when it holds a comma, quote or line break.
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string csv_number(double d) {
    std::ostringstream os;
    os << std::setprecision(12) << d;
    return os.str();
}

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : cols_(header.size()) { row(header); }

    void row(const std::vector<std::string>& cells) {
        if (cells.size() != cols_) throw PreconditionError("CSV row has the wrong number of cells");
        for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << csv_field(cells[i]);
        os_ << "\r\n";
        ++rows_;
    }
    // Data rows, header excluded.
    std::size_t rows() const { return rows_ - 1; }
    std::string str() const { return os_.str(); }

private:
    std::size_t cols_;
    std::size_t rows_ = 0;
    std::ostringstream os_;
};

}  // namespace axioma

#endif
