#pragma once

#include "condexp/feasibility.hpp"
#include "condexp/polytope.hpp"
#include "condexp/scenario.hpp"
#include "condexp/two_slit.hpp"

#include "json.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace condexp::io {

/// Insertion-ordered, so emitted documents keep their documented key order.
using json = nlohmann::ordered_json;

/// Parses text as JSON; syntax errors become ValidationError carrying the position.
json parse_json(const std::string& text, const std::string& source = "input");
json read_json_file(const std::filesystem::path& path);

/// {"observables":[labels...],"contexts":[[ids...],...]}
json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const json& j);
Scenario load_scenario(const std::filesystem::path& path);

struct MarginalsInput {
    Scenario scenario;
    std::vector<ContextMarginal> marginals;
};

/// {"scenario": {...}, "marginals": [{"context": k, "table": {"++": "1/4", ...}}, ...]}
/// Probabilities are decimal strings, "p/q" strings, or JSON numbers (taken as exact binary values).
MarginalsInput marginals_from_json(const json& j);
json marginals_to_json(const Scenario& s, const std::vector<ContextMarginal>& marginals);
MarginalsInput load_marginals(const std::filesystem::path& path);

/// Either a geometry {"a","d","lambda","L","bins","span"} or explicit per-bin
/// contexts {"s":[...],"p1":[...],"p2":[...],"p12":[...]}.
struct GeometryInput {
    std::optional<SlitGeometry> geometry;
    std::optional<SlitContexts> contexts;
};
GeometryInput geometry_from_json(const json& j);
json geometry_to_json(const SlitGeometry& g);
GeometryInput load_geometry(const std::filesystem::path& path);

/// Header "constant,<singles>,<pairs>" with single columns named by label and
/// pair columns "A*B"; every value printed as p/q.
void write_facets_csv(std::ostream& os, const Scenario& s, const std::vector<Inequality>& facets);

/// Header "s,p1,p2,p12,deficit".
void write_two_slit_csv(std::ostream& os, const SlitContexts& contexts, const AdditivityReport& report);

/// Shortest round-trip decimal for a double.
std::string format_double(double v);

json inequality_to_json(const Inequality& ineq, const Scenario& s);

} // namespace condexp::io
