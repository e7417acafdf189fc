#include "condexp/io.hpp"

#include "condexp/errors.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <sstream>

namespace condexp::io {

json parse_json(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(source + ": malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
    }
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_json(ss.str(), path.string());
}

namespace {

const json& require(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw ValidationError(where + ": missing key '" + key + "'");
    return j.at(key);
}

double require_positive_number(const json& j, const char* key) {
    const json& v = require(j, key, "geometry");
    if (!v.is_number()) throw ValidationError(std::string("geometry: '") + key + "' must be a number");
    return v.get<double>();
}

Rational probability_from_json(const json& v) {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rational(v.get<long>());
    if (v.is_number()) return rational_from_double(v.get<double>());
    throw ValidationError("probability must be a string or a number");
}

std::vector<double> number_array(const json& j, const char* key) {
    const json& v = require(j, key, "slit contexts");
    if (!v.is_array()) throw ValidationError(std::string("slit contexts: '") + key + "' must be an array");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw ValidationError(std::string("slit contexts: '") + key + "' must hold numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

} // namespace

json scenario_to_json(const Scenario& s) {
    json j;
    j["observables"] = s.labels();
    j["contexts"] = s.member_lists();
    return j;
}

Scenario scenario_from_json(const json& j) {
    const json& obs = require(j, "observables", "scenario");
    const json& ctx = require(j, "contexts", "scenario");
    if (!obs.is_array()) throw ValidationError("scenario: 'observables' must be an array of strings");
    if (!ctx.is_array()) throw ValidationError("scenario: 'contexts' must be an array of index arrays");
    std::vector<std::string> labels;
    for (const auto& o : obs) {
        if (!o.is_string()) throw ValidationError("scenario: observable labels must be strings");
        labels.push_back(o.get<std::string>());
    }
    std::vector<std::vector<ObservableId>> members;
    for (const auto& c : ctx) {
        if (!c.is_array()) throw ValidationError("scenario: each context must be an array of indices");
        std::vector<ObservableId> list;
        for (const auto& id : c) {
            if (!id.is_number_integer() || id.get<long long>() < 0) {
                throw ValidationError("scenario: context members must be nonnegative integers");
            }
            const auto value = id.get<long long>();
            if (value > static_cast<long long>(UINT32_MAX)) {
                throw ValidationError("scenario: context member " + std::to_string(value) + " is out of range");
            }
            list.push_back(static_cast<ObservableId>(value));
        }
        members.push_back(std::move(list));
    }
    return build_scenario(labels, members);
}

Scenario load_scenario(const std::filesystem::path& path) {
    const json j = read_json_file(path);
    // Accept a bare scenario or a marginals document that embeds one.
    if (j.is_object() && j.contains("scenario")) return scenario_from_json(j.at("scenario"));
    return scenario_from_json(j);
}

MarginalsInput marginals_from_json(const json& j) {
    MarginalsInput input{scenario_from_json(require(j, "scenario", "marginals file")), {}};
    const json& list = require(j, "marginals", "marginals file");
    if (!list.is_array()) throw ValidationError("marginals file: 'marginals' must be an array");
    for (const auto& entry : list) {
        const json& ctx = require(entry, "context", "marginal");
        if (!ctx.is_number_integer() || ctx.get<long long>() < 0 ||
            ctx.get<long long>() >= static_cast<long long>(input.scenario.num_contexts())) {
            throw ValidationError("marginal: 'context' must index a scenario context");
        }
        const auto id = static_cast<ContextId>(ctx.get<long long>());
        const auto size = input.scenario.context(id).size();
        const json& table = require(entry, "table", "marginal");
        if (!table.is_object()) throw ValidationError("marginal: 'table' must map outcome strings to probabilities");
        ContextMarginal m{id, std::vector<Rational>(std::size_t{1} << size, Rational(0))};
        std::vector<bool> seen(m.table.size(), false);
        for (const auto& [key, value] : table.items()) {
            if (key.size() != size) {
                throw ValidationError("marginal of context " + std::to_string(id) + ": outcome '" + key + "' has wrong length");
            }
            const auto t = outcome_index(key);
            m.table[t] = probability_from_json(value);
            seen[t] = true;
        }
        for (std::uint32_t t = 0; t < seen.size(); ++t) {
            if (!seen[t]) {
                throw ValidationError("marginal of context " + std::to_string(id) + ": missing outcome " + outcome_label(t, size));
            }
        }
        input.marginals.push_back(std::move(m));
    }
    return input;
}

json marginals_to_json(const Scenario& s, const std::vector<ContextMarginal>& marginals) {
    json j;
    j["scenario"] = scenario_to_json(s);
    j["marginals"] = json::array();
    for (const auto& m : marginals) {
        json table = json::object();
        const auto size = s.context(m.context).size();
        for (std::uint32_t t = 0; t < m.table.size(); ++t) table[outcome_label(t, size)] = to_fraction_string(m.table[t]);
        j["marginals"].push_back({{"context", m.context}, {"table", table}});
    }
    return j;
}

MarginalsInput load_marginals(const std::filesystem::path& path) { return marginals_from_json(read_json_file(path)); }

GeometryInput geometry_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("geometry must be a JSON object");
    GeometryInput input;
    if (j.contains("p1")) {
        const auto s = number_array(j, "s");
        input.contexts = SlitContexts{{SlitTag::slit1_only, s, number_array(j, "p1")},
                                      {SlitTag::slit2_only, s, number_array(j, "p2")},
                                      {SlitTag::both_open, s, number_array(j, "p12")}};
        validate_context(input.contexts->slit1);
        validate_context(input.contexts->slit2);
        validate_context(input.contexts->both);
        return input;
    }
    SlitGeometry g;
    g.slit_width = require_positive_number(j, "a");
    g.slit_separation = require_positive_number(j, "d");
    g.wavelength = require_positive_number(j, "lambda");
    g.screen_distance = require_positive_number(j, "L");
    if (j.contains("bins")) {
        if (!j.at("bins").is_number_integer() || j.at("bins").get<long long>() < 0) {
            throw ValidationError("geometry: 'bins' must be a positive integer");
        }
        g.bins = static_cast<std::size_t>(j.at("bins").get<long long>());
    }
    if (j.contains("span")) {
        if (!j.at("span").is_number()) throw ValidationError("geometry: 'span' must be a number");
        g.span = j.at("span").get<double>();
    }
    g.validate();
    input.geometry = g;
    return input;
}

json geometry_to_json(const SlitGeometry& g) {
    return {{"a", g.slit_width},      {"d", g.slit_separation}, {"lambda", g.wavelength},
            {"L", g.screen_distance}, {"bins", g.bins},          {"span", g.resolved_span()}};
}

GeometryInput load_geometry(const std::filesystem::path& path) { return geometry_from_json(read_json_file(path)); }

void write_facets_csv(std::ostream& os, const Scenario& s, const std::vector<Inequality>& facets) {
    os << "constant";
    for (const auto& o : s.observables()) os << ',' << o.label;
    for (const auto& p : s.correlated_pairs()) os << ',' << s.observables()[p.first].label << '*' << s.observables()[p.second].label;
    os << '\n';
    for (const auto& f : facets) {
        os << to_fraction_string(f.constant);
        for (const auto& c : f.single_coeffs) os << ',' << to_fraction_string(c);
        for (const auto& [pair, c] : f.pair_coeffs) os << ',' << to_fraction_string(c);
        os << '\n';
    }
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

void write_two_slit_csv(std::ostream& os, const SlitContexts& contexts, const AdditivityReport& report) {
    os << "s,p1,p2,p12,deficit\n";
    for (std::size_t k = 0; k < report.positions.size(); ++k) {
        os << format_double(report.positions[k]) << ',' << format_double(contexts.slit1.distribution[k]) << ','
           << format_double(contexts.slit2.distribution[k]) << ',' << format_double(contexts.both.distribution[k]) << ','
           << format_double(report.deficit[k]) << '\n';
    }
}

json inequality_to_json(const Inequality& ineq, const Scenario& s) {
    json singles = json::object();
    for (std::size_t i = 0; i < ineq.single_coeffs.size(); ++i) {
        singles[s.observables()[i].label] = to_fraction_string(ineq.single_coeffs[i]);
    }
    json pairs = json::object();
    for (const auto& [pair, c] : ineq.pair_coeffs) {
        pairs[s.observables()[pair.first].label + "*" + s.observables()[pair.second].label] = to_fraction_string(c);
    }
    return {{"constant", to_fraction_string(ineq.constant)},
            {"singles", singles},
            {"pairs", pairs},
            {"text", format_inequality(ineq, s)}};
}

} // namespace condexp::io
