#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "charge.hpp"
#include "errors.hpp"
#include "params.hpp"
#include "propagator.hpp"

namespace pointnls {

/// Everything a command needs: model, datum, solver and output settings.
///
/// The datum is stored in the frame params.lambda; commands that run the
/// solver rebase it to lambda = 1 first.
struct RunConfig {
    ModelParams params;
    InitialDatum datum;
    SolverConfig solver;
    std::string output_dir = "out";
    double cadence = 0.1;  ///< observable sampling interval; must divide t_end
    double k_max = 200.0;
    double tail_tolerance = 1e-6;

    std::vector<std::string> violations() const {
        std::vector<std::string> v;
        auto add = [&](const char* prefix, const std::vector<std::string>& w) {
            for (const auto& s : w) v.push_back(std::string(prefix) + s);
        };
        add("model: ", params.violations());
        add("datum: ", datum.violations());
        if (datum.lambda != params.lambda) v.push_back("datum: frame must equal the model lambda");
        add("solver: ", solver.violations(datum.q0));
        if (!(cadence > 0.0) || !std::isfinite(cadence)) {
            v.push_back("cadence must be positive");
        } else if (std::isfinite(solver.t_end) && solver.t_end > 0.0) {
            const double n = solver.t_end / cadence;
            if (n < 1.0 - 1e-12 || std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n))
                v.push_back("cadence must divide t_end");
        }
        if (!(k_max > 0.0) || !std::isfinite(k_max)) v.push_back("k_max must be positive");
        if (!(tail_tolerance > 0.0)) v.push_back("tail_tolerance must be positive");
        if (output_dir.empty()) v.push_back("output must not be empty");
        return v;
    }

    void validate() const {
        auto v = violations();
        if (!v.empty()) throw ConfigError(std::move(v));
    }

    bool operator==(const RunConfig&) const = default;
};

namespace detail {

struct ConfigEntry {
    std::string key;
    std::string value;
    std::string where;
};

struct ConfigSection {
    std::string name;  ///< "" for the top level
    std::string where;
    std::vector<ConfigEntry> entries;
};

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline bool parse_real(const std::string& text, double& out) {
    const std::string s = trim(text);
    if (s.empty()) return false;
    const char* first = s.data();
    if (*first == '+') ++first;
    const auto [p, ec] = std::from_chars(first, s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

inline bool parse_complex(const std::string& text, cplx& out) {
    const auto comma = text.find(',');
    double re = 0.0, im = 0.0;
    if (comma == std::string::npos) {
        if (!parse_real(text, re)) return false;
    } else if (!parse_real(text.substr(0, comma), re) || !parse_real(text.substr(comma + 1), im)) {
        return false;
    }
    out = cplx(re, im);
    return true;
}

inline std::vector<ConfigSection> read_flat(const std::string& text, std::vector<std::string>& errors) {
    std::vector<ConfigSection> sections(1);
    std::istringstream in(text);
    std::string raw;
    for (int line = 1; std::getline(in, raw); ++line) {
        const std::string where = "line " + std::to_string(line);
        const std::string s = trim(raw.substr(0, raw.find('#')));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') {
                errors.push_back(where + ": malformed section header");
                continue;
            }
            sections.push_back({trim(std::string_view(s).substr(1, s.size() - 2)), where, {}});
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            errors.push_back(where + ": expected key = value");
            continue;
        }
        sections.back().entries.push_back({trim(s.substr(0, eq)), trim(s.substr(eq + 1)), where});
    }
    return sections;
}

inline std::string json_scalar(const nlohmann::json& j, bool& ok) {
    char buf[64];
    auto num = [&](const nlohmann::json& x) {
        std::snprintf(buf, sizeof buf, "%.17g", x.get<double>());
        return std::string(buf);
    };
    ok = true;
    if (j.is_number()) return num(j);
    if (j.is_string()) return j.get<std::string>();
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) return num(j[0]) + "," + num(j[1]);
    ok = false;
    return {};
}

inline std::vector<ConfigSection> read_json(const std::string& text, std::vector<std::string>& errors) {
    std::vector<ConfigSection> sections(1);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        errors.push_back(std::string("json: ") + e.what());
        return sections;
    }
    if (!doc.is_object()) {
        errors.push_back("json: top level must be an object");
        return sections;
    }
    auto entries = [&](const nlohmann::json& obj, const std::string& where, std::vector<ConfigEntry>& out) {
        for (const auto& [k, v] : obj.items()) {
            bool ok = false;
            auto s = json_scalar(v, ok);
            if (!ok) errors.push_back(where + "." + k + ": expected a number, string or [re, im] pair");
            else out.push_back({k, s, where + "." + k});
        }
    };
    for (const auto& [k, v] : doc.items()) {
        if (k == "gaussian" || k == "green") {
            if (!v.is_array()) {
                errors.push_back("json." + k + ": expected an array of objects");
                continue;
            }
            for (std::size_t i = 0; i < v.size(); ++i) {
                const std::string where = "json." + k + "[" + std::to_string(i) + "]";
                if (!v[i].is_object()) {
                    errors.push_back(where + ": expected an object");
                    continue;
                }
                sections.push_back({k, where, {}});
                entries(v[i], where, sections.back().entries);
            }
        } else {
            entries(nlohmann::json{{k, v}}, "json", sections.front().entries);
        }
    }
    return sections;
}

inline RunConfig build_config(const std::vector<ConfigSection>& sections, std::vector<std::string>& errors) {
    RunConfig c;
    bool have_cadence = false;

    for (const auto& sec : sections) {
        std::map<std::string, const ConfigEntry*> seen;
        for (const auto& e : sec.entries) {
            if (!seen.emplace(e.key, &e).second) errors.push_back(e.where + ": duplicate key '" + e.key + "'");
        }
        auto take = [&](const std::string& key) -> const ConfigEntry* {
            const auto it = seen.find(key);
            if (it == seen.end()) return nullptr;
            const auto* e = it->second;
            seen.erase(it);
            return e;
        };
        auto real = [&](const std::string& key, double& dst, bool required) {
            if (const auto* e = take(key)) {
                if (!parse_real(e->value, dst)) errors.push_back(e->where + ": '" + key + "' is not a number");
            } else if (required) {
                errors.push_back((sec.name.empty() ? std::string("missing") : sec.where + ": missing") + " key '" +
                                 key + "'");
            }
        };
        auto integer = [&](const std::string& key, int& dst) {
            if (const auto* e = take(key)) {
                double x = 0.0;
                if (!parse_real(e->value, x) || x != std::floor(x) || std::abs(x) > 1e9)
                    errors.push_back(e->where + ": '" + key + "' is not an integer");
                else dst = static_cast<int>(x);
            }
        };
        auto complex = [&](const std::string& key, cplx& dst, bool required) {
            if (const auto* e = take(key)) {
                if (!parse_complex(e->value, dst))
                    errors.push_back(e->where + ": '" + key + "' is not a number or re,im pair");
            } else if (required) {
                errors.push_back((sec.name.empty() ? std::string("missing") : sec.where + ": missing") + " key '" +
                                 key + "'");
            }
        };

        if (sec.name.empty()) {
            real("sigma", c.params.sigma, true);
            real("beta", c.params.beta, true);
            real("lambda", c.params.lambda, false);
            complex("q0", c.datum.q0, true);
            real("t_end", c.solver.t_end, true);
            real("h_init", c.solver.h_init, false);
            real("h_min", c.solver.h_min, false);
            real("tol_fp", c.solver.tol_fp, false);
            real("q_cap", c.solver.q_cap, false);
            integer("max_iter", c.solver.max_iter);
            real("max_rel_change", c.solver.max_rel_change, false);
            real("growth_floor", c.solver.growth_floor, false);
            integer("regrow_after", c.solver.regrow_after);
            have_cadence = seen.count("cadence") > 0;
            real("cadence", c.cadence, false);
            real("k_max", c.k_max, false);
            real("tail_tolerance", c.tail_tolerance, false);
            if (const auto* e = take("output")) c.output_dir = e->value;
        } else if (sec.name == "gaussian") {
            GaussianTerm g;
            complex("amplitude", g.amplitude, true);
            real("width", g.width, true);
            c.datum.regular.gaussians.push_back(g);
        } else if (sec.name == "green") {
            GreenTerm g;
            complex("coefficient", g.coefficient, true);
            real("pole", g.pole, true);
            c.datum.regular.green_terms.push_back(g);
        } else {
            errors.push_back(sec.where + ": unknown section '" + sec.name + "'");
            continue;
        }
        for (const auto& [k, e] : seen) errors.push_back(e->where + ": unknown key '" + k + "'");
    }
    c.datum.lambda = c.params.lambda;
    if (!have_cadence) c.cadence = c.solver.t_end / 10.0;
    return c;
}

inline std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string fmt(cplx z) { return fmt(z.real()) + ", " + fmt(z.imag()); }

}  // namespace detail

/// Parses a configuration document. Text whose first non-blank character is
/// '{' is read as JSON, anything else as flat `key = value` lines with
/// [gaussian] and [green] sections. Throws ConfigError listing every problem.
inline RunConfig parse_config(const std::string& text) {
    std::vector<std::string> errors;
    const auto first = text.find_first_not_of(" \t\r\n");
    const bool json = first != std::string::npos && text[first] == '{';
    const auto sections = json ? detail::read_json(text, errors) : detail::read_flat(text, errors);
    auto c = detail::build_config(sections, errors);
    for (auto& v : c.violations()) errors.push_back(std::move(v));
    if (!errors.empty()) throw ConfigError(std::move(errors));
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

/// Flat document that parse_config reads back to an equal RunConfig.
inline std::string serialize(const RunConfig& c) {
    using detail::fmt;
    std::ostringstream o;
    o << "sigma = " << fmt(c.params.sigma) << "\n"
      << "beta = " << fmt(c.params.beta) << "\n"
      << "lambda = " << fmt(c.params.lambda) << "\n"
      << "q0 = " << fmt(c.datum.q0) << "\n"
      << "t_end = " << fmt(c.solver.t_end) << "\n"
      << "h_init = " << fmt(c.solver.h_init) << "\n"
      << "h_min = " << fmt(c.solver.h_min) << "\n"
      << "tol_fp = " << fmt(c.solver.tol_fp) << "\n"
      << "q_cap = " << fmt(c.solver.q_cap) << "\n"
      << "max_iter = " << c.solver.max_iter << "\n"
      << "max_rel_change = " << fmt(c.solver.max_rel_change) << "\n"
      << "growth_floor = " << fmt(c.solver.growth_floor) << "\n"
      << "regrow_after = " << c.solver.regrow_after << "\n"
      << "cadence = " << fmt(c.cadence) << "\n"
      << "k_max = " << fmt(c.k_max) << "\n"
      << "tail_tolerance = " << fmt(c.tail_tolerance) << "\n"
      << "output = " << c.output_dir << "\n";
    for (const auto& g : c.datum.regular.gaussians)
        o << "\n[gaussian]\namplitude = " << fmt(g.amplitude) << "\nwidth = " << fmt(g.width) << "\n";
    for (const auto& g : c.datum.regular.green_terms)
        o << "\n[green]\ncoefficient = " << fmt(g.coefficient) << "\npole = " << fmt(g.pole) << "\n";
    return o.str();
}

inline nlohmann::json to_json(const RunConfig& c) {
    auto z = [](cplx v) { return nlohmann::json::array({v.real(), v.imag()}); };
    nlohmann::json j = {
        {"sigma", c.params.sigma},
        {"beta", c.params.beta},
        {"lambda", c.params.lambda},
        {"q0", z(c.datum.q0)},
        {"t_end", c.solver.t_end},
        {"h_init", c.solver.h_init},
        {"h_min", c.solver.h_min},
        {"tol_fp", c.solver.tol_fp},
        {"q_cap", c.solver.q_cap},
        {"max_iter", c.solver.max_iter},
        {"max_rel_change", c.solver.max_rel_change},
        {"growth_floor", c.solver.growth_floor},
        {"regrow_after", c.solver.regrow_after},
        {"cadence", c.cadence},
        {"k_max", c.k_max},
        {"tail_tolerance", c.tail_tolerance},
        {"output", c.output_dir},
    };
    j["gaussian"] = nlohmann::json::array();
    for (const auto& g : c.datum.regular.gaussians) j["gaussian"].push_back({{"amplitude", z(g.amplitude)}, {"width", g.width}});
    j["green"] = nlohmann::json::array();
    for (const auto& g : c.datum.regular.green_terms)
        j["green"].push_back({{"coefficient", z(g.coefficient)}, {"pole", g.pole}});
    return j;
}

}  // namespace pointnls
