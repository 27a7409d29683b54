#pragma once

// Tabular scan results with a CSV form and a JSON twin.

#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hpl/core.hpp"

namespace hpl {

using Json = nlohmann::ordered_json;

/// A grid of numeric rows plus provenance metadata and a key/value summary.
/// Rows carry an optional flag string (empty when the row is clean); flagged
/// rows keep their place in the table so row order never depends on errors.
struct ScanReport {
    std::string title;
    std::vector<std::pair<std::string, std::string>> header;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> flags;
    std::vector<std::pair<std::string, std::string>> summary;

    void add_row(std::vector<double> values, std::string flag = {}) {
        if (values.size() != columns.size())
            throw PreconditionError("ScanReport row has " + std::to_string(values.size()) +
                                    " values, expected " + std::to_string(columns.size()));
        rows.push_back(std::move(values));
        flags.push_back(std::move(flag));
    }

    void note(std::string key, std::string value) { summary.emplace_back(std::move(key), std::move(value)); }
    void note(std::string key, double value) { summary.emplace_back(std::move(key), format_double(value)); }

    [[nodiscard]] std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        throw PreconditionError("no column '" + name + "' in report '" + title + "'");
    }

    [[nodiscard]] std::vector<double> column_values(const std::string& name) const {
        const std::size_t c = column(name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r[c]);
        return out;
    }

    [[nodiscard]] std::size_t flagged() const {
        std::size_t n = 0;
        for (const auto& f : flags) n += f.empty() ? 0 : 1;
        return n;
    }

    /// Column header, one line per row, then an optional "# summary" block of
    /// key,value lines. Flagged rows are listed in the summary block.
    [[nodiscard]] std::string to_csv() const {
        std::ostringstream os;
        for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
        os << '\n';
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_double(r[i]);
            os << '\n';
        }
        if (!summary.empty() || flagged() > 0) {
            os << "\n# summary\n";
            for (const auto& [k, v] : summary) os << k << ',' << v << '\n';
            for (std::size_t i = 0; i < flags.size(); ++i)
                if (!flags[i].empty()) os << "flag_row_" << i << ',' << flags[i] << '\n';
        }
        return os.str();
    }

    [[nodiscard]] Json to_json() const {
        Json j;
        j["title"] = title;
        Json h = Json::object();
        for (const auto& [k, v] : header) h[k] = v;
        j["header"] = h;
        j["columns"] = columns;
        Json rs = Json::array();
        for (const auto& r : rows) {
            Json row = Json::array();
            for (double v : r) row.push_back(format_double(v));
            rs.push_back(row);
        }
        j["rows"] = rs;
        j["flags"] = flags;
        Json s = Json::object();
        for (const auto& [k, v] : summary) s[k] = v;
        j["summary"] = s;
        return j;
    }
};

/// (r, re, im, abs) residual table used by the differentiation module.
struct ResidualTable {
    std::vector<double> r;
    std::vector<Complex> value;

    void add(double radius, Complex v) {
        r.push_back(radius);
        value.push_back(v);
    }
    [[nodiscard]] std::size_t size() const { return r.size(); }
    [[nodiscard]] std::vector<double> abs_values() const {
        std::vector<double> out;
        out.reserve(value.size());
        for (auto v : value) out.push_back(std::abs(v));
        return out;
    }

    [[nodiscard]] std::string to_csv() const {
        std::ostringstream os;
        os << "r,re,im,abs\n";
        for (std::size_t i = 0; i < r.size(); ++i)
            os << format_double(r[i]) << ',' << format_double(value[i].real()) << ','
               << format_double(value[i].imag()) << ',' << format_double(std::abs(value[i])) << '\n';
        return os.str();
    }
};

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open '" + path + "' for writing");
    f << content;
    if (!f) throw Error("failed writing '" + path + "'");
}

}  // namespace hpl
