#include "doctest.h"

#include "condexp/errors.hpp"
#include "condexp/io.hpp"

#include <sstream>

using namespace condexp;
using io::json;

TEST_CASE("scenario json round trip keeps key order") {
    const auto s = build_scenario({"Q1", "Q2", "Q3"}, {{0, 1}, {0, 2}, {1, 2}});
    const json j = io::scenario_to_json(s);
    CHECK(j.dump() == R"({"observables":["Q1","Q2","Q3"],"contexts":[[0,1],[0,2],[1,2]]})");
    CHECK(io::scenario_from_json(j) == s);
}

TEST_CASE("scenario json errors") {
    CHECK_THROWS_AS(io::scenario_from_json(json::parse(R"({"contexts":[[0]]})")), ValidationError);
    CHECK_THROWS_AS(io::scenario_from_json(json::parse(R"({"observables":["A"],"contexts":[[-1]]})")), ValidationError);
    CHECK_THROWS_AS(io::scenario_from_json(json::parse(R"({"observables":["A"],"contexts":[[1]]})")), ValidationError);
    CHECK_THROWS_AS(io::scenario_from_json(json::parse(R"({"observables":[1],"contexts":[[0]]})")), ValidationError);
    CHECK_THROWS_AS(io::scenario_from_json(json::parse(R"({"observables":["A"],"contexts":[[0.5]]})")), ValidationError);
    CHECK_THROWS_AS(io::scenario_from_json(json::parse(R"({"observables":["A"],"contexts":[[99999999999]]})")), ValidationError);
}

TEST_CASE("malformed json reports the position") {
    try {
        io::parse_json("{\"observables\": [\"A\",}", "scenario.json");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        const std::string what = e.what();
        CHECK(what.find("scenario.json") != std::string::npos);
        CHECK(what.find("byte 22") != std::string::npos);
    }
    CHECK_THROWS_AS(io::read_json_file("/nonexistent/file.json"), ValidationError);
}

TEST_CASE("marginals json") {
    const auto j = json::parse(R"({
      "scenario": {"observables": ["A", "B"], "contexts": [[0, 1]]},
      "marginals": [{"context": 0, "table": {"++": "1/8", "+-": "0.375", "-+": 0.25, "--": "1/4"}}]
    })");
    const auto input = io::marginals_from_json(j);
    REQUIRE(input.marginals.size() == 1);
    CHECK(input.marginals[0].table == std::vector<Rational>{Rational(1, 8), Rational(3, 8), Rational(1, 4), Rational(1, 4)});

    const auto back = io::marginals_to_json(input.scenario, input.marginals);
    CHECK(back["marginals"][0]["table"]["+-"] == "3/8");
    const auto again = io::marginals_from_json(back);
    CHECK(again.marginals == input.marginals);
    CHECK(again.scenario == input.scenario);

    auto missing = j;
    missing["marginals"][0]["table"].erase("--");
    CHECK_THROWS_AS(io::marginals_from_json(missing), ValidationError);
    auto wrong_length = j;
    wrong_length["marginals"][0]["table"]["+++"] = "0";
    CHECK_THROWS_AS(io::marginals_from_json(wrong_length), ValidationError);
    auto bad_context = j;
    bad_context["marginals"][0]["context"] = 3;
    CHECK_THROWS_AS(io::marginals_from_json(bad_context), ValidationError);
    auto bad_number = j;
    bad_number["marginals"][0]["table"]["++"] = "one";
    CHECK_THROWS_AS(io::marginals_from_json(bad_number), ValidationError);
}

TEST_CASE("geometry json") {
    const auto g = io::geometry_from_json(json::parse(R"({"a":1e-4,"d":5e-4,"lambda":5e-7,"L":1,"bins":401})"));
    REQUIRE(g.geometry.has_value());
    CHECK(g.geometry->bins == 401);
    CHECK(g.geometry->resolved_span() == doctest::Approx(0.01));
    const auto back = io::geometry_to_json(*g.geometry);
    CHECK(back["lambda"] == 5e-7);

    CHECK_THROWS_AS(io::geometry_from_json(json::parse(R"({"a":5e-4,"d":1e-4,"lambda":5e-7,"L":1})")), ValidationError);
    CHECK_THROWS_AS(io::geometry_from_json(json::parse(R"({"a":1e-4,"d":5e-4,"L":1})")), ValidationError);
    CHECK_THROWS_AS(io::geometry_from_json(json::parse(R"({"a":1e-4,"d":5e-4,"lambda":5e-7,"L":1,"bins":-3})")), ValidationError);

    const auto explicit_contexts = io::geometry_from_json(
        json::parse(R"({"s":[-1,0,1],"p1":[0.5,0.5,0],"p2":[0,0.5,0.5],"p12":[0.25,0.5,0.25]})"));
    REQUIRE(explicit_contexts.contexts.has_value());
    CHECK(explicit_contexts.contexts->both.distribution[1] == 0.5);
    CHECK_THROWS_AS(io::geometry_from_json(json::parse(R"({"s":[0,1],"p1":[0.5,0.5],"p2":[0.5,0.5],"p12":[0.9,0.5]})")),
                    ValidationError);
}

TEST_CASE("facets csv") {
    const auto s = build_scenario({"Q1", "Q2"}, {{0, 1}});
    Inequality f = zero_inequality(s);
    f.constant = 1;
    f.single_coeffs = {1, -1};
    f.pair_coeffs[{0, 1}] = -1;
    std::ostringstream os;
    io::write_facets_csv(os, s, {f});
    CHECK(os.str() == "constant,Q1,Q2,Q1*Q2\n1/1,1/1,-1/1,-1/1\n");

    const auto j = io::inequality_to_json(f, s);
    CHECK(j["pairs"]["Q1*Q2"] == "-1/1");
    CHECK(j["text"] == "1 + Q1 - Q2 - Q1*Q2 >= 0");
}

TEST_CASE("two-slit csv") {
    SlitContexts c{{SlitTag::slit1_only, {-1, 0, 1}, {0.5, 0.5, 0}},
                   {SlitTag::slit2_only, {-1, 0, 1}, {0, 0.5, 0.5}},
                   {SlitTag::both_open, {-1, 0, 1}, {0.25, 0.5, 0.25}}};
    const auto r = additivity_report(c.slit1, c.slit2, c.both);
    std::ostringstream os;
    io::write_two_slit_csv(os, c, r);
    CHECK(os.str() == "s,p1,p2,p12,deficit\n-1,0.5,0,0.25,0\n0,0.5,0.5,0.5,0\n1,0,0.5,0.25,0\n");
    CHECK(io::format_double(0.1) == "0.1");
    CHECK(io::format_double(5e-7) == "5e-07");
}
