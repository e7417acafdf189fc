#include "doctest.h"

#include "condexp/errors.hpp"
#include "condexp/rng.hpp"
#include "condexp/simulator.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace condexp;

namespace {

Scenario triple_scenario() { return build_scenario({"Q1", "Q2", "Q3"}, {{0, 1, 2}}); }
Scenario three_cycle() { return build_scenario({"Q1", "Q2", "Q3"}, {{0, 1}, {0, 2}, {1, 2}}); }

std::vector<Rational> correlated_table(Rational k) {
    const Rational same = (1 + k) / 4;
    const Rational differ = (1 - k) / 4;
    return {same, differ, differ, same};
}

PairProtocolConfig anticorrelated_config() {
    return PairProtocolConfig::round_robin(three_cycle(), {{0, correlated_table(-1)}, {1, correlated_table(-1)}, {2, correlated_table(-1)}});
}

} // namespace

TEST_CASE("counter rng: reference values and independence of streams") {
    // SplitMix64 reference: the generator seeded with 0 first emits 0xE220A8397B1DCDAF.
    CHECK(splitmix64_mix(0x9E3779B97F4A7C15ULL) == 0xE220A8397B1DCDAFULL);
    CounterRng a(0);
    CHECK(a.next_u64() == 0xE220A8397B1DCDAFULL);

    auto r1 = CounterRng::for_run(42, 7);
    auto r2 = CounterRng::for_run(42, 7);
    for (int i = 0; i < 100; ++i) CHECK(r1.next_u64() == r2.next_u64());
    CHECK(CounterRng::substream_key(42, 7) != CounterRng::substream_key(42, 8));
    CHECK(CounterRng::substream_key(42, 7) != CounterRng::substream_key(43, 7));

    CounterRng u(CounterRng::substream_key(1, 2));
    double sum = 0;
    for (int i = 0; i < 100000; ++i) {
        const double x = u.uniform();
        CHECK_UNARY(x >= 0.0);
        CHECK_UNARY(x < 1.0);
        sum += x;
    }
    CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("counter rng: sample never picks zero-probability entries") {
    const std::vector<double> cdf{0.0, 0.5, 0.5, 1.0};
    CounterRng r(99);
    std::array<int, 4> counts{};
    for (int i = 0; i < 20000; ++i) ++counts[r.sample(cdf)];
    CHECK(counts[0] == 0);
    CHECK(counts[2] == 0);
    CHECK(counts[1] > 9000);
    CHECK(counts[3] > 9000);
}

TEST_CASE("per-record statistic of any triple is -1 or 3") {
    for (int a : {1, -1})
        for (int b : {1, -1})
            for (int c : {1, -1}) {
                const int s = a * b + a * c + b * c;
                CHECK((s == -1 || s == 3));
            }
}

TEST_CASE("triple protocol never goes below -1") {
    const auto s = triple_scenario();
    std::mt19937_64 rng(3);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto joint = seed == 1 ? uniform_joint(3) : oracle::random_joint(rng, 3);
        const auto result = run_triple_protocol(s, joint, 20000, seed);
        CHECK(result.min_statistic >= -1);
        CHECK(result.mean_statistic() >= -1.0);
        CHECK(lg_statistic(result.estimates) >= -1.0);
        CHECK(lg_statistic(result.estimates) == doctest::Approx(result.mean_statistic()).epsilon(1e-15));
        std::uint64_t total = 0;
        for (const auto& [value, count] : result.statistic_histogram) {
            CHECK((value == -1 || value == 3));
            total += count;
        }
        CHECK(total == 20000);
        // Exact rational estimates lie in the polytope.
        CHECK(lg_statistic(to_correlation_point(result.estimates, s, false)) >= -1);
    }
}

TEST_CASE("triple protocol on a deterministic joint") {
    const auto s = triple_scenario();
    JointDistribution joint{3, std::vector<Rational>(8, Rational(0))};
    joint.weights[0b011] = 1; // Q1 = +1, Q2 = -1, Q3 = -1
    RecordCollector sink;
    const auto result = run_triple_protocol(s, joint, 50, 1, {1, &sink});
    CHECK(result.min_statistic == -1);
    CHECK(result.statistic_sum == -50);
    REQUIRE(sink.records.size() == 50);
    CHECK(sink.records[0].outcomes == std::vector<std::int8_t>{1, -1, -1});
    CHECK(result.estimates.singles[0].value() == 1.0);
    CHECK(result.estimates.correlator(1, 2).value() == 1.0);
}

TEST_CASE("triple protocol input validation") {
    CHECK_THROWS_AS(run_triple_protocol(three_cycle(), uniform_joint(3), 10, 1), ValidationError);
    CHECK_THROWS_AS(run_triple_protocol(triple_scenario(), uniform_joint(3), 0, 1), EmptyResultError);
    CHECK_THROWS_AS(run_triple_protocol(triple_scenario(), uniform_joint(2), 10, 1), ValidationError);
}

TEST_CASE("pair protocol with anticorrelated tables approaches -3") {
    const auto result = run_pair_protocol(anticorrelated_config(), 30000, 5);
    CHECK(result.runs_per_context == std::vector<std::uint64_t>{10000, 10000, 10000});
    CHECK(lg_statistic(result.estimates) == -3.0);
    for (const auto& e : result.estimates.correlators) CHECK(e.standard_error() == 0.0);
}

TEST_CASE("pair protocol schedule and records") {
    RecordCollector sink;
    const auto cfg = anticorrelated_config();
    run_pair_protocol(cfg, 7, 2, {1, &sink});
    REQUIRE(sink.records.size() == 7);
    for (std::size_t k = 0; k < 7; ++k) {
        CHECK(sink.records[k].run_index == k);
        CHECK(sink.records[k].context == k % 3);
        CHECK(sink.records[k].outcomes[0] == -sink.records[k].outcomes[1]);
        CHECK(sink.records[k].protocol == Protocol::pair);
    }

    auto bad = cfg;
    bad.schedule = {0, 1};
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    auto triple = PairProtocolConfig::round_robin(triple_scenario(), {});
    CHECK_THROWS_AS(triple.validate(), ValidationError);
    CHECK_THROWS_AS(run_pair_protocol(cfg, 0, 1), EmptyResultError);
}

TEST_CASE("record streams are identical across runs and thread counts") {
    const auto cfg = PairProtocolConfig::round_robin(
        three_cycle(), {{0, correlated_table(Rational(1, 3))}, {1, correlated_table(Rational(-1, 2))}, {2, correlated_table(0)}});
    std::ostringstream one;
    std::ostringstream again;
    std::ostringstream threaded;
    CsvRecordWriter w1(one);
    CsvRecordWriter w2(again);
    CsvRecordWriter w3(threaded);
    const auto r1 = run_pair_protocol(cfg, 100000, 77, {1, &w1});
    const auto r2 = run_pair_protocol(cfg, 100000, 77, {1, &w2});
    const auto r3 = run_pair_protocol(cfg, 100000, 77, {5, &w3});
    CHECK(one.str() == again.str());
    CHECK(one.str() == threaded.str());
    CHECK(r1.estimates == r2.estimates);
    CHECK(r1.estimates == r3.estimates);

    const auto t1 = run_triple_protocol(triple_scenario(), uniform_joint(3), 70000, 3, {1, nullptr});
    const auto t4 = run_triple_protocol(triple_scenario(), uniform_joint(3), 70000, 3, {4, nullptr});
    CHECK(t1.estimates == t4.estimates);
    CHECK(t1.statistic_histogram == t4.statistic_histogram);

    const auto other = run_pair_protocol(cfg, 100000, 78);
    CHECK_FALSE(other.estimates == r1.estimates);
}

TEST_CASE("csv record format") {
    std::ostringstream os;
    CsvRecordWriter writer(os);
    writer.consume({0, 2, {1, -1}, Protocol::quantum});
    writer.consume({1, 0, {-1, -1, 1}, Protocol::triple});
    CHECK(os.str() == "k,context,outcomes,protocol\n0,2,+-,quantum\n1,0,--+,triple\n");
}

TEST_CASE("estimates") {
    Estimate e;
    CHECK_FALSE(e.present());
    CHECK(std::isnan(e.value()));
    CHECK(std::isnan(e.standard_error()));
    for (int i = 0; i < 75; ++i) e.add(1);
    for (int i = 0; i < 25; ++i) e.add(-1);
    CHECK(e.value() == 0.5);
    CHECK(e.standard_error() == doctest::Approx(std::sqrt(0.75 / 100)));

    const auto est = EstimatedCorrelations::for_scenario(three_cycle());
    CHECK_THROWS_AS(lg_statistic(est), ShapeError);
    CHECK_THROWS_AS(est.correlator(0, 0), ShapeError);
    CHECK_THROWS_AS(to_correlation_point(est, three_cycle(), true), ShapeError);
}

TEST_CASE("lg_statistic on points") {
    const auto s = three_cycle();
    CorrelationPoint p = zero_point(s);
    for (auto& [pair, k] : p.correlators) k = 1;
    CHECK(lg_statistic(p) == 3);
    for (auto& [pair, k] : p.correlators) k = -1;
    CHECK(lg_statistic(p) == -3);
    for (auto& [pair, k] : p.correlators) k = Rational(-1, 2);
    CHECK(lg_statistic(p) == Rational(-3, 2));
    CHECK_THROWS_AS(lg_statistic(zero_point(build_scenario({"A", "B"}, {{0, 1}}))), ShapeError);
}

TEST_CASE("quantum correlator matches the density-matrix oracle and the closed form") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> omega(-10.0, 10.0);
    std::uniform_real_distribution<double> gap(0.01, 3.0);
    for (int draw = 0; draw < 100; ++draw) {
        QuantumTwoLevelModel m;
        m.omega = omega(rng);
        m.preparation_time = gap(rng) - 2.0;
        m.times[0] = m.preparation_time + gap(rng);
        m.times[1] = m.times[0] + gap(rng);
        m.times[2] = m.times[1] + gap(rng);
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = i + 1; j < 3; ++j) {
                const double k = quantum_pair_correlator(m, i, j);
                CHECK(std::abs(k - std::cos(m.omega * (m.times[j] - m.times[i]))) <= 1e-12);
                CHECK(std::abs(k - oracle::density_matrix_correlator(m.omega, m.preparation_time, m.times[i], m.times[j])) <= 1e-12);
                const auto table = quantum_sequential_table(m, i, j);
                CHECK(table[0] + table[1] + table[2] + table[3] == doctest::Approx(1.0).epsilon(1e-14));
            }
        }
    }
}

TEST_CASE("quantum correlator examples") {
    auto m = QuantumTwoLevelModel::equally_spaced(0.0);
    CHECK(quantum_pair_correlator(m, 0, 1) == doctest::Approx(1.0));
    m = QuantumTwoLevelModel::equally_spaced(std::numbers::pi);
    CHECK(quantum_pair_correlator(m, 0, 1) == doctest::Approx(-1.0));
    m = QuantumTwoLevelModel::equally_spaced(2 * std::numbers::pi / 3);
    CHECK(quantum_pair_correlator(m, 0, 1) == doctest::Approx(-0.5));
    CHECK(quantum_pair_correlator(m, 1, 2) == doctest::Approx(-0.5));
    CHECK(quantum_pair_correlator(m, 0, 2) == doctest::Approx(-0.5));
    m = QuantumTwoLevelModel::equally_spaced(std::numbers::pi / 2);
    CHECK(std::abs(quantum_pair_correlator(m, 0, 1)) < 1e-15);
    CHECK(quantum_pair_correlator(m, 0, 2) == doctest::Approx(-1.0));

    CHECK_THROWS_AS(quantum_pair_correlator(m, 1, 1), std::out_of_range);
    CHECK_THROWS_AS(quantum_pair_correlator(m, 2, 1), std::out_of_range);
    CHECK_THROWS_AS(quantum_pair_correlator(m, 1, 3), std::out_of_range);
    QuantumTwoLevelModel bad = m;
    bad.times = {1.0, 1.0, 2.0};
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = m;
    bad.omega = std::nan("");
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("quantum pair protocol samples") {
    const auto zero = run_quantum_pair_protocol(QuantumTwoLevelModel::equally_spaced(0.0), 3000, 1);
    CHECK(lg_statistic(zero.estimates) == 3.0);

    RecordCollector sink;
    const auto m = QuantumTwoLevelModel::equally_spaced(2 * std::numbers::pi / 3);
    const auto r = run_quantum_pair_protocol(m, 300000, 7, {2, &sink});
    CHECK(sink.records.size() == 300000);
    CHECK(sink.records.front().protocol == Protocol::quantum);
    CHECK(lg_statistic(r.estimates) == doctest::Approx(-1.5).epsilon(0.02 / 1.5));
    for (const auto& e : r.estimates.singles) CHECK(std::abs(e.value()) < 0.01);
}

TEST_CASE("estimates stay within five standard errors") {
    const auto cfg = PairProtocolConfig::round_robin(
        three_cycle(), {{0, correlated_table(Rational(3, 5))}, {1, correlated_table(Rational(-1, 4))}, {2, correlated_table(0)}});
    const std::array<double, 3> truth{0.6, -0.25, 0.0};
    int within = 0;
    int total = 0;
    for (std::uint64_t rep = 0; rep < 1000; ++rep) {
        const auto r = run_pair_protocol(cfg, 900, 10000 + rep);
        for (std::size_t k = 0; k < 3; ++k) {
            const auto& e = r.estimates.correlators[k];
            const double se = std::sqrt((1 - truth[k] * truth[k]) / static_cast<double>(e.count));
            within += std::abs(e.value() - truth[k]) <= 5 * se;
            ++total;
        }
    }
    CHECK(within >= total * 99 / 100);
}

TEST_CASE("violating estimates are reported infeasible") {
    const auto s = three_cycle();
    const auto m = QuantumTwoLevelModel::equally_spaced(2 * std::numbers::pi / 3);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto r = run_quantum_pair_protocol(m, 30000, seed);
        const double lg = lg_statistic(r.estimates);
        double var = 0;
        for (const auto& e : r.estimates.correlators) var += e.standard_error() * e.standard_error();
        REQUIRE(lg < -1 - 4 * std::sqrt(var));
        const auto point = to_correlation_point(r.estimates, three_time_pair_scenario(), true);
        const auto verdict = joint_exists(correlations_to_marginals(point, s), s);
        CHECK(verdict.status == FeasibilityStatus::infeasible);
    }
}
