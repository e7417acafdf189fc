#include "doctest.h"

#include "condexp/errors.hpp"
#include "condexp/scenario.hpp"
#include "oracles.hpp"

#include <random>

using namespace condexp;

TEST_CASE("build_scenario assigns sequential ids and pair coordinates") {
    const auto s = build_scenario({"Q1", "Q2", "Q3"}, {{0, 1}, {0, 2}, {1, 2}});
    REQUIRE(s.num_observables() == 3);
    REQUIRE(s.num_contexts() == 3);
    CHECK(s.observables()[2].id == 2);
    CHECK(s.contexts()[1].id == 1);
    CHECK(s.correlated_pairs() == std::vector<ObservablePair>{{0, 1}, {0, 2}, {1, 2}});
    CHECK(s.pair_index(2, 0) == 1);
    CHECK(s.uncovered_observables().empty());
}

TEST_CASE("minimal and triple-context scenarios") {
    const auto one = build_scenario({"Q1"}, {{0}});
    CHECK(one.num_observables() == 1);
    CHECK(one.correlated_pairs().empty());

    const auto triple = build_scenario({"Q1", "Q2", "Q3"}, {{0, 1, 2}});
    CHECK(triple.num_contexts() == 1);
    CHECK(triple.correlated_pairs().size() == 3);
}

TEST_CASE("build_scenario validation errors") {
    CHECK_THROWS_AS(build_scenario({}, {{0}}), ValidationError);
    CHECK_THROWS_AS(build_scenario({"A"}, {}), ValidationError);
    CHECK_THROWS_AS(build_scenario({"A", "A"}, {{0, 1}}), ValidationError);
    CHECK_THROWS_AS(build_scenario({"A", "B"}, {{0, 2}}), ValidationError);
    CHECK_THROWS_AS(build_scenario({"A", "B"}, {{0, 1}, {1, 0}}), ValidationError);
    CHECK_THROWS_AS(build_scenario({"A", "B"}, {{0, 0}}), ValidationError);
    CHECK_THROWS_AS(build_scenario({"A", "B"}, {{}}), ValidationError);
}

TEST_CASE("uncovered observables are flagged, not rejected") {
    const auto s = build_scenario({"A", "B", "C"}, {{0, 1}});
    CHECK(s.uncovered_observables() == std::vector<ObservableId>{2});
    CHECK(s.warnings().size() == 1);
}

TEST_CASE("detect_cyclicity on the standard scenarios") {
    SUBCASE("three-cycle is cyclic with every context left over") {
        const auto r = detect_cyclicity(build_scenario({"Q1", "Q2", "Q3"}, {{0, 1}, {0, 2}, {1, 2}}));
        CHECK_FALSE(r.acyclic);
        REQUIRE(r.residual.size() == 3);
        CHECK(r.residual[0] == ResidualContext{0, {0, 1}});
        CHECK(r.residual[1] == ResidualContext{1, {0, 2}});
        CHECK(r.residual[2] == ResidualContext{2, {1, 2}});
    }
    SUBCASE("chain is acyclic") {
        CHECK(detect_cyclicity(build_scenario({"Q1", "Q2", "Q3"}, {{0, 1}, {1, 2}})).acyclic);
    }
    SUBCASE("single triple context is acyclic") {
        CHECK(detect_cyclicity(build_scenario({"Q1", "Q2", "Q3"}, {{0, 1, 2}})).acyclic);
    }
    SUBCASE("four-cycle is cyclic, a chord-free square stays whole") {
        const auto r = detect_cyclicity(build_scenario({"A", "B", "C", "D"}, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}));
        CHECK_FALSE(r.acyclic);
        CHECK(r.residual.size() == 4);
    }
    SUBCASE("a cycle covered by a larger context is acyclic") {
        CHECK(detect_cyclicity(build_scenario({"Q1", "Q2", "Q3"}, {{0, 1}, {0, 2}, {1, 2}, {0, 1, 2}})).acyclic);
    }
    SUBCASE("a pendant edge hanging off a cycle leaves the cycle") {
        const auto r = detect_cyclicity(build_scenario({"A", "B", "C", "D"}, {{0, 1}, {0, 2}, {1, 2}, {2, 3}}));
        CHECK_FALSE(r.acyclic);
        CHECK(r.residual.size() == 3);
    }
}

namespace {

Scenario random_scenario(std::mt19937_64& rng) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 6)(rng);
    const std::size_t contexts = std::uniform_int_distribution<std::size_t>(1, 6)(rng);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back("Q" + std::to_string(i));
    std::set<std::vector<ObservableId>> sets;
    for (std::size_t c = 0; c < contexts; ++c) {
        std::vector<ObservableId> members;
        for (ObservableId i = 0; i < n; ++i) {
            if (std::bernoulli_distribution(0.45)(rng)) members.push_back(i);
        }
        if (members.empty()) members.push_back(static_cast<ObservableId>(rng() % n));
        sets.insert(members);
    }
    return build_scenario(labels, {sets.begin(), sets.end()});
}

} // namespace

TEST_CASE("cyclicity verdict does not depend on reduction order") {
    std::mt19937_64 rng(20240611);
    for (int trial = 0; trial < 300; ++trial) {
        const auto s = random_scenario(rng);
        const bool reference = detect_cyclicity(s).acyclic;
        for (std::uint64_t order = 1; order <= 8; ++order) {
            CHECK(detect_cyclicity(s, order * 7919 + static_cast<std::uint64_t>(trial)).acyclic == reference);
        }
    }
}

TEST_CASE("adding a sub-context never changes the verdict") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 300; ++trial) {
        const auto s = random_scenario(rng);
        const auto& host = s.contexts()[rng() % s.num_contexts()].members;
        if (host.size() < 2) continue;
        std::vector<ObservableId> sub(host.begin(), host.end() - 1);
        auto lists = s.member_lists();
        bool exists = false;
        for (const auto& l : lists) {
            auto a = l;
            auto b = sub;
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            exists = exists || a == b;
        }
        if (exists) continue;
        lists.push_back(sub);
        const auto extended = build_scenario(s.labels(), lists);
        CHECK(detect_cyclicity(extended).acyclic == detect_cyclicity(s).acyclic);
    }
}

TEST_CASE("join trees and chains are acyclic") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 300; ++trial) {
        const auto tree = oracle::random_join_tree(rng, 6, 3);
        std::vector<std::string> labels;
        for (std::size_t i = 0; i < tree.num_observables; ++i) labels.push_back("Q" + std::to_string(i));
        CHECK(detect_cyclicity(build_scenario(labels, tree.contexts)).acyclic);
    }
    for (std::size_t n = 2; n <= 8; ++n) {
        std::vector<std::string> labels;
        std::vector<std::vector<ObservableId>> chain;
        for (std::size_t i = 0; i < n; ++i) labels.push_back("Q" + std::to_string(i));
        for (ObservableId i = 0; i + 1 < n; ++i) chain.push_back({i, i + 1});
        CHECK(detect_cyclicity(build_scenario(labels, chain)).acyclic);
    }
}
