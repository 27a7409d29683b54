#pragma once

// Measure config documents (JSON, schema version 1):
//
//   { "version": 1, "d": 2, "label": "...",
//     "ac": { "expr": "exp(-r^2/2)", "support_radius": 12,
//             "center": [0, 0], "coeff_re": 1, "coeff_im": 0,
//             "removable": [[0, 0]] },              // or an array of these
//     "atoms": [ { "point": [1, 0], "weight_re": 1, "weight_im": 0 } ],
//     "singular": { "type": "cantor", "interval": [0, 1], "mass_re": 1, "mass_im": 0 } }
//
// "center", "coeff_*" and "removable" are optional. Doubles are written in
// shortest round-trip form, so read(write(m)) reproduces every literal.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hpl/measure.hpp"
#include "hpl/report.hpp"

namespace hpl {

inline constexpr int kMeasureSchemaVersion = 1;

namespace detail {

inline const Json& require(const Json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
    return j.at(key);
}

inline double number(const Json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + ": expected a number");
    return j.get<double>();
}

inline double number_or(const Json& j, const char* key, double fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    return number(j.at(key), where + "." + key);
}

inline Vec point(const Json& j, int d, const std::string& where) {
    if (!j.is_array() || static_cast<int>(j.size()) != d)
        throw ConfigError(where + ": expected an array of " + std::to_string(d) + " numbers");
    Vec v(d);
    for (int i = 0; i < d; ++i) v[i] = number(j[static_cast<std::size_t>(i)], where);
    return v;
}

inline Json point_json(const Vec& v) {
    Json a = Json::array();
    for (int i = 0; i < v.dim(); ++i) a.push_back(v[i]);
    return a;
}

inline AcTerm ac_from_json(const Json& j, int d, const std::string& where) {
    AcTerm t;
    const Json& e = require(j, "expr", where);
    if (!e.is_string()) throw ConfigError(where + ".expr: expected a string");
    try {
        t.expr = parse_density(e.get<std::string>());
    } catch (const ParseError& pe) {
        throw ConfigError(where + ".expr: " + pe.what());
    }
    t.support_radius = number(require(j, "support_radius", where), where + ".support_radius");
    t.center = j.contains("center") ? point(j.at("center"), d, where + ".center") : Vec::zero(d);
    t.coeff = Complex(number_or(j, "coeff_re", 1.0, where), number_or(j, "coeff_im", 0.0, where));
    if (j.contains("removable")) {
        const Json& r = j.at("removable");
        if (!r.is_array()) throw ConfigError(where + ".removable: expected an array of points");
        for (const auto& p : r) t.removable.push_back(point(p, d, where + ".removable"));
    }
    return t;
}

}  // namespace detail

[[nodiscard]] inline ComplexMeasure measure_from_json(const Json& j) {
    const std::string w = "measure";
    if (!j.is_object()) throw ConfigError("measure: expected an object");
    const double version = detail::number(detail::require(j, "version", w), "measure.version");
    if (version != kMeasureSchemaVersion)
        throw ConfigError("measure: unsupported schema version " + format_double(version));
    ComplexMeasure m;
    const double dd = detail::number(detail::require(j, "d", w), "measure.d");
    if (dd != std::floor(dd) || dd < 1 || dd > kMaxDim) throw ConfigError("measure.d: expected an integer in [1, 10]");
    m.d = static_cast<int>(dd);
    if (j.contains("label")) m.label = j.at("label").get<std::string>();
    if (j.contains("ac")) {
        const Json& ac = j.at("ac");
        if (ac.is_array()) {
            for (std::size_t i = 0; i < ac.size(); ++i)
                m.ac.push_back(detail::ac_from_json(ac[i], m.d, "measure.ac[" + std::to_string(i) + "]"));
        } else if (!ac.is_null()) {
            m.ac.push_back(detail::ac_from_json(ac, m.d, "measure.ac"));
        }
    }
    if (j.contains("atoms")) {
        const Json& atoms = j.at("atoms");
        if (!atoms.is_array()) throw ConfigError("measure.atoms: expected an array");
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            const std::string wa = "measure.atoms[" + std::to_string(i) + "]";
            Atom a;
            a.point = detail::point(detail::require(atoms[i], "point", wa), m.d, wa + ".point");
            a.weight = Complex(detail::number_or(atoms[i], "weight_re", 0.0, wa),
                               detail::number_or(atoms[i], "weight_im", 0.0, wa));
            m.atoms.push_back(a);
        }
    }
    if (j.contains("singular") && !j.at("singular").is_null()) {
        const Json& s = j.at("singular");
        const std::string ws = "measure.singular";
        const Json& type = detail::require(s, "type", ws);
        if (type != "cantor") throw ConfigError(ws + ".type: only \"cantor\" is supported");
        const Json& iv = detail::require(s, "interval", ws);
        if (!iv.is_array() || iv.size() != 2) throw ConfigError(ws + ".interval: expected [a, b]");
        CantorPart c;
        c.a = detail::number(iv[0], ws + ".interval");
        c.b = detail::number(iv[1], ws + ".interval");
        c.mass = Complex(detail::number_or(s, "mass_re", 1.0, ws), detail::number_or(s, "mass_im", 0.0, ws));
        m.singular = c;
    }
    try {
        m.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    return m;
}

[[nodiscard]] inline Json measure_to_json(const ComplexMeasure& m) {
    Json j;
    j["version"] = kMeasureSchemaVersion;
    j["d"] = m.d;
    j["label"] = m.label;
    auto term = [](const AcTerm& t) {
        Json a;
        a["expr"] = t.expr.print();
        a["support_radius"] = t.support_radius;
        a["center"] = detail::point_json(t.center);
        a["coeff_re"] = t.coeff.real();
        a["coeff_im"] = t.coeff.imag();
        if (!t.removable.empty()) {
            Json r = Json::array();
            for (const auto& p : t.removable) r.push_back(detail::point_json(p));
            a["removable"] = r;
        }
        return a;
    };
    if (m.ac.size() == 1) j["ac"] = term(m.ac.front());
    else if (m.ac.size() > 1) {
        Json arr = Json::array();
        for (const auto& t : m.ac) arr.push_back(term(t));
        j["ac"] = arr;
    }
    Json atoms = Json::array();
    for (const auto& a : m.atoms)
        atoms.push_back({{"point", detail::point_json(a.point)}, {"weight_re", a.weight.real()}, {"weight_im", a.weight.imag()}});
    j["atoms"] = atoms;
    if (m.singular)
        j["singular"] = {{"type", "cantor"},
                         {"interval", {m.singular->a, m.singular->b}},
                         {"mass_re", m.singular->mass.real()},
                         {"mass_im", m.singular->mass.imag()}};
    return j;
}

[[nodiscard]] inline Json parse_json_text(const std::string& text, const std::string& where) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

[[nodiscard]] inline std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

[[nodiscard]] inline ComplexMeasure load_measure(const std::string& path) {
    return measure_from_json(parse_json_text(read_text_file(path), path));
}

[[nodiscard]] inline std::string measure_to_text(const ComplexMeasure& m) { return measure_to_json(m).dump(2) + "\n"; }

}  // namespace hpl
