#pragma once

#include "mania/errors.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mania {

/// A named pass/fail condition evaluated on a study.
struct Check {
    std::string name;
    bool pass;
    std::string detail;
};

/// Tabular result of one study plus its acceptance checks.
struct StudyReport {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::optional<double> fitted_order;
    std::optional<double> r2;
    std::vector<Check> checks;
    bool valid = true;
    std::string error;

    bool pass() const {
        if (!valid || checks.empty()) {
            return false;
        }
        for (const auto& c : checks) {
            if (!c.pass) {
                return false;
            }
        }
        return true;
    }
};

/// 17 significant digits; non-finite values as "nan"/"inf" in CSV and null in JSON.
inline std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string json_number(double x) { return std::isfinite(x) ? format_number(x) : "null"; }

inline std::string json_string(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default:
            if (static_cast<unsigned char>(c) < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof buf, "\\u%04x", c);
                out += buf;
            } else {
                out += c;
            }
        }
    }
    return out + "\"";
}

inline std::string to_csv(const StudyReport& r) {
    std::ostringstream os;
    for (std::size_t i = 0; i < r.columns.size(); ++i) {
        os << (i ? "," : "") << r.columns[i];
    }
    os << '\n';
    for (const auto& row : r.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            os << (i ? "," : "") << format_number(row[i]);
        }
        os << '\n';
    }
    return os.str();
}

/// {study_name: {fitted_order, r2, pass, rows, columns, checks}} in report order.
inline std::string to_summary_json(const std::vector<StudyReport>& reports) {
    std::ostringstream os;
    os << "{\n";
    for (std::size_t k = 0; k < reports.size(); ++k) {
        const StudyReport& r = reports[k];
        os << "  " << json_string(r.name) << ": {\n";
        os << "    \"fitted_order\": " << (r.fitted_order ? json_number(*r.fitted_order) : "null") << ",\n";
        os << "    \"r2\": " << (r.r2 ? json_number(*r.r2) : "null") << ",\n";
        os << "    \"pass\": " << (r.pass() ? "true" : "false") << ",\n";
        os << "    \"valid\": " << (r.valid ? "true" : "false") << ",\n";
        if (!r.error.empty()) {
            os << "    \"error\": " << json_string(r.error) << ",\n";
        }
        os << "    \"columns\": [";
        for (std::size_t i = 0; i < r.columns.size(); ++i) {
            os << (i ? ", " : "") << json_string(r.columns[i]);
        }
        os << "],\n    \"rows\": [";
        for (std::size_t i = 0; i < r.rows.size(); ++i) {
            os << (i ? ",\n      [" : "\n      [");
            for (std::size_t j = 0; j < r.rows[i].size(); ++j) {
                os << (j ? ", " : "") << json_number(r.rows[i][j]);
            }
            os << "]";
        }
        os << (r.rows.empty() ? "],\n" : "\n    ],\n");
        os << "    \"checks\": [";
        for (std::size_t i = 0; i < r.checks.size(); ++i) {
            const Check& c = r.checks[i];
            os << (i ? ",\n      " : "\n      ") << "{\"name\": " << json_string(c.name)
               << ", \"pass\": " << (c.pass ? "true" : "false") << ", \"detail\": " << json_string(c.detail) << "}";
        }
        os << (r.checks.empty() ? "]\n" : "\n    ]\n");
        os << "  }" << (k + 1 < reports.size() ? "," : "") << "\n";
    }
    os << "}\n";
    return os.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) {
            throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
        }
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << text;
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

/// One CSV per study plus summary.json under `dir`.
inline void write_reports(const std::filesystem::path& dir, const std::vector<StudyReport>& reports) {
    for (const auto& r : reports) {
        write_text_file(dir / (r.name + ".csv"), to_csv(r));
    }
    write_text_file(dir / "summary.json", to_summary_json(reports));
}

} // namespace mania
