#include "condexp/simulator.hpp"

#include "condexp/errors.hpp"
#include "condexp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace condexp {

std::string to_string(Protocol p) {
    switch (p) {
    case Protocol::triple:
        return "triple";
    case Protocol::pair:
        return "pair";
    case Protocol::quantum:
        return "quantum";
    }
    return "unknown";
}

CsvRecordWriter::CsvRecordWriter(std::ostream& os) : os_(os) { os_ << "k,context,outcomes,protocol\n"; }

void CsvRecordWriter::consume(const DataRecord& record) {
    line_.clear();
    line_ += std::to_string(record.run_index);
    line_ += ',';
    line_ += std::to_string(record.context);
    line_ += ',';
    for (auto o : record.outcomes) line_ += o > 0 ? '+' : '-';
    line_ += ',';
    line_ += to_string(record.protocol);
    line_ += '\n';
    os_ << line_;
}

double Estimate::value() const {
    if (!present()) return std::numeric_limits<double>::quiet_NaN();
    return static_cast<double>(sum) / static_cast<double>(count);
}

double Estimate::standard_error() const {
    if (!present()) return std::numeric_limits<double>::quiet_NaN();
    const double v = value();
    return std::sqrt(std::max(0.0, 1.0 - v * v) / static_cast<double>(count));
}

EstimatedCorrelations EstimatedCorrelations::for_scenario(const Scenario& s) {
    EstimatedCorrelations e;
    e.singles.resize(s.num_observables());
    e.pairs = s.correlated_pairs();
    e.correlators.resize(e.pairs.size());
    return e;
}

const Estimate& EstimatedCorrelations::correlator(ObservableId a, ObservableId b) const {
    if (a > b) std::swap(a, b);
    auto it = std::lower_bound(pairs.begin(), pairs.end(), ObservablePair{a, b});
    if (it == pairs.end() || *it != ObservablePair{a, b}) {
        throw ShapeError("no correlator for pair (" + std::to_string(a) + "," + std::to_string(b) + ")");
    }
    return correlators[static_cast<std::size_t>(it - pairs.begin())];
}

void EstimatedCorrelations::add(const Scenario& s, const Context& c, const std::vector<std::int8_t>& outcomes) {
    for (std::size_t k = 0; k < c.size(); ++k) {
        singles[c.members[k]].add(outcomes[k]);
        for (std::size_t l = k + 1; l < c.size(); ++l) {
            const auto idx = static_cast<std::size_t>(s.pair_index(c.members[k], c.members[l]));
            correlators[idx].add(outcomes[k] * outcomes[l]);
        }
    }
}

void EstimatedCorrelations::merge(const EstimatedCorrelations& other) {
    if (other.singles.size() != singles.size() || other.pairs != pairs) throw ShapeError("cannot merge estimates of different scenarios");
    for (std::size_t i = 0; i < singles.size(); ++i) singles[i].merge(other.singles[i]);
    for (std::size_t k = 0; k < correlators.size(); ++k) correlators[k].merge(other.correlators[k]);
}

CorrelationPoint to_correlation_point(const EstimatedCorrelations& est, const Scenario& s, bool zero_singles) {
    if (est.pairs != s.correlated_pairs() || est.singles.size() != s.num_observables()) {
        throw ShapeError("estimates do not match the scenario");
    }
    auto ratio = [](const Estimate& e, const std::string& what) {
        if (!e.present()) throw ShapeError("estimate for " + what + " is absent");
        Rational r(Integer(static_cast<long>(e.sum)), Integer(static_cast<unsigned long>(e.count)));
        r.canonicalize();
        return r;
    };
    CorrelationPoint p = zero_point(s);
    if (!zero_singles) {
        for (std::size_t i = 0; i < est.singles.size(); ++i) p.singles[i] = ratio(est.singles[i], s.observables()[i].label);
    }
    for (std::size_t k = 0; k < est.pairs.size(); ++k) {
        p.correlators[est.pairs[k]] = ratio(est.correlators[k], "pair " + std::to_string(k));
    }
    return p;
}

namespace {

constexpr std::array<ObservablePair, 3> kLgPairs{ObservablePair{0, 1}, ObservablePair{0, 2}, ObservablePair{1, 2}};

} // namespace

Rational lg_statistic(const CorrelationPoint& p) {
    Rational sum = 0;
    for (const auto& pair : kLgPairs) {
        auto it = p.correlators.find(pair);
        if (it == p.correlators.end()) {
            throw ShapeError("missing correlator K" + std::to_string(pair.first + 1) + std::to_string(pair.second + 1));
        }
        sum += it->second;
    }
    return sum;
}

double lg_statistic(const EstimatedCorrelations& est) {
    std::array<const Estimate*, 3> e{};
    for (std::size_t k = 0; k < 3; ++k) {
        const auto& pair = kLgPairs[k];
        e[k] = &est.correlator(pair.first, pair.second);
        if (!e[k]->present()) {
            throw ShapeError("correlator K" + std::to_string(pair.first + 1) + std::to_string(pair.second + 1) + " is absent");
        }
    }
    if (e[0]->count == e[1]->count && e[1]->count == e[2]->count) {
        return static_cast<double>(e[0]->sum + e[1]->sum + e[2]->sum) / static_cast<double>(e[0]->count);
    }
    return e[0]->value() + e[1]->value() + e[2]->value();
}

double TripleProtocolResult::mean_statistic() const {
    return runs ? static_cast<double>(statistic_sum) / static_cast<double>(runs) : std::numeric_limits<double>::quiet_NaN();
}

namespace {

constexpr std::uint64_t kBlockRuns = 1U << 15;

// Runs body(k, partial, record) for k in [0, runs), spreading each block over
// worker threads. Partials merge in run order and records reach the sink in run
// order, so the output is independent of the thread count.
template <class Partial, class Body>
Partial run_ordered(std::uint64_t runs, const RunOptions& options, const Partial& empty, Body body) {
    Partial total = empty;
    const std::size_t workers = std::max<std::size_t>(1, options.threads);
    struct Slice {
        Partial partial;
        std::vector<DataRecord> records;
    };
    for (std::uint64_t block = 0; block < runs; block += kBlockRuns) {
        const std::uint64_t block_end = std::min(runs, block + kBlockRuns);
        const std::uint64_t span = block_end - block;
        const std::size_t slices = static_cast<std::size_t>(std::min<std::uint64_t>(workers, span));
        std::vector<Slice> out(slices, Slice{empty, {}});
        auto work = [&](std::size_t w) {
            const std::uint64_t lo = block + span * w / slices;
            const std::uint64_t hi = block + span * (w + 1) / slices;
            DataRecord record;
            if (options.sink) out[w].records.reserve(static_cast<std::size_t>(hi - lo));
            for (std::uint64_t k = lo; k < hi; ++k) {
                body(k, out[w].partial, record);
                if (options.sink) out[w].records.push_back(record);
            }
        };
        if (slices == 1) {
            work(0);
        } else {
            std::vector<std::jthread> pool;
            pool.reserve(slices);
            for (std::size_t w = 0; w < slices; ++w) pool.emplace_back(work, w);
        }
        for (auto& slice : out) {
            total.merge(slice.partial);
            if (options.sink) {
                for (const auto& r : slice.records) options.sink->consume(r);
            }
        }
    }
    return total;
}

struct TriplePartial {
    EstimatedCorrelations estimates;
    std::map<int, std::uint64_t> histogram;
    int min_statistic = std::numeric_limits<int>::max();
    std::int64_t statistic_sum = 0;

    void merge(const TriplePartial& other) {
        estimates.merge(other.estimates);
        for (const auto& [value, count] : other.histogram) histogram[value] += count;
        min_statistic = std::min(min_statistic, other.min_statistic);
        statistic_sum += other.statistic_sum;
    }
};

struct PairPartial {
    EstimatedCorrelations estimates;
    std::vector<std::uint64_t> runs_per_context;

    void merge(const PairPartial& other) {
        estimates.merge(other.estimates);
        for (std::size_t c = 0; c < runs_per_context.size(); ++c) runs_per_context[c] += other.runs_per_context[c];
    }
};

std::vector<double> cumulative(const std::vector<Rational>& probabilities) {
    std::vector<double> out;
    out.reserve(probabilities.size());
    double acc = 0.0;
    for (const auto& p : probabilities) {
        acc += p.get_d();
        out.push_back(acc);
    }
    return out;
}

PairProtocolResult run_pairs(const PairProtocolConfig& cfg, std::uint64_t runs, std::uint64_t seed,
                             const RunOptions& options, Protocol tag) {
    cfg.validate();
    if (runs == 0) throw EmptyResultError("pair protocol needs at least one run");
    const Scenario& s = cfg.scenario;
    std::vector<std::vector<double>> cdf(s.num_contexts());
    for (const auto& m : cfg.tables) cdf[m.context] = cumulative(m.table);

    PairPartial empty{EstimatedCorrelations::for_scenario(s), std::vector<std::uint64_t>(s.num_contexts(), 0)};
    auto body = [&](std::uint64_t k, PairPartial& part, DataRecord& record) {
        auto rng = CounterRng::for_run(seed, k);
        const ContextId c = cfg.schedule[static_cast<std::size_t>(k % cfg.schedule.size())];
        const auto t = static_cast<std::uint32_t>(rng.sample(cdf[c]));
        record.run_index = k;
        record.context = c;
        record.protocol = tag;
        record.outcomes = {static_cast<std::int8_t>((t >> 1) & 1U ? -1 : 1), static_cast<std::int8_t>(t & 1U ? -1 : 1)};
        part.estimates.add(s, s.context(c), record.outcomes);
        ++part.runs_per_context[c];
    };
    auto total = run_ordered(runs, options, empty, body);
    return {std::move(total.estimates), std::move(total.runs_per_context)};
}

} // namespace

TripleProtocolResult run_triple_protocol(const Scenario& s, const JointDistribution& joint, std::uint64_t runs,
                                         std::uint64_t seed, const RunOptions& options) {
    if (s.num_observables() != 3 || s.num_contexts() != 1 || s.context(0).size() != 3) {
        throw ValidationError("triple protocol needs three observables measured in a single context");
    }
    validate_joint(joint);
    if (joint.num_observables != 3) throw ValidationError("triple protocol needs a joint over three observables");
    if (runs == 0) throw EmptyResultError("triple protocol needs at least one run");

    const Context& ctx = s.context(0);
    const auto cdf = cumulative(joint.weights);
    TriplePartial empty{EstimatedCorrelations::for_scenario(s), {}, std::numeric_limits<int>::max(), 0};
    auto body = [&](std::uint64_t k, TriplePartial& part, DataRecord& record) {
        auto rng = CounterRng::for_run(seed, k);
        const Assignment a{static_cast<std::uint32_t>(rng.sample(cdf)), 3};
        record.run_index = k;
        record.context = ctx.id;
        record.protocol = Protocol::triple;
        record.outcomes.resize(3);
        for (std::size_t m = 0; m < 3; ++m) record.outcomes[m] = static_cast<std::int8_t>(a.value(ctx.members[m]));
        const auto& q = record.outcomes;
        const int statistic = q[0] * q[1] + q[0] * q[2] + q[1] * q[2];
        ++part.histogram[statistic];
        part.min_statistic = std::min(part.min_statistic, statistic);
        part.statistic_sum += statistic;
        part.estimates.add(s, ctx, q);
    };
    auto total = run_ordered(runs, options, empty, body);
    TripleProtocolResult result;
    result.estimates = std::move(total.estimates);
    result.statistic_histogram = std::move(total.histogram);
    result.min_statistic = total.min_statistic;
    result.statistic_sum = total.statistic_sum;
    result.runs = runs;
    return result;
}

PairProtocolConfig PairProtocolConfig::round_robin(Scenario s, std::vector<ContextMarginal> tables) {
    std::vector<ContextId> schedule;
    for (const auto& c : s.contexts()) schedule.push_back(c.id);
    return {std::move(s), std::move(tables), std::move(schedule)};
}

void PairProtocolConfig::validate() const {
    for (const auto& c : scenario.contexts()) {
        if (c.size() != 2) throw ValidationError("pair protocol needs pair contexts; context " + std::to_string(c.id) + " is not a pair");
    }
    std::vector<bool> has_table(scenario.num_contexts(), false);
    for (const auto& m : tables) {
        validate_marginal(m, scenario);
        if (has_table[m.context]) throw ValidationError("two tables for context " + std::to_string(m.context));
        has_table[m.context] = true;
    }
    for (std::size_t c = 0; c < has_table.size(); ++c) {
        if (!has_table[c]) throw ValidationError("no table for context " + std::to_string(c));
    }
    if (schedule.empty()) throw ValidationError("pair protocol schedule is empty");
    std::vector<bool> scheduled(scenario.num_contexts(), false);
    for (auto c : schedule) {
        if (c >= scenario.num_contexts()) throw ValidationError("schedule names unknown context " + std::to_string(c));
        scheduled[c] = true;
    }
    for (std::size_t c = 0; c < scheduled.size(); ++c) {
        if (!scheduled[c]) throw ValidationError("schedule never measures context " + std::to_string(c));
    }
}

PairProtocolResult run_pair_protocol(const PairProtocolConfig& cfg, std::uint64_t runs, std::uint64_t seed,
                                     const RunOptions& options) {
    return run_pairs(cfg, runs, seed, options, Protocol::pair);
}

QuantumTwoLevelModel QuantumTwoLevelModel::equally_spaced(double omega_tau) {
    return {omega_tau, {1.0, 2.0, 3.0}, 0.0};
}

void QuantumTwoLevelModel::validate() const {
    if (!std::isfinite(omega) || !std::isfinite(preparation_time)) throw ValidationError("quantum model needs finite parameters");
    for (double t : times) {
        if (!std::isfinite(t)) throw ValidationError("quantum model needs finite measurement times");
    }
    if (!(preparation_time <= times[0] && times[0] < times[1] && times[1] < times[2])) {
        throw ValidationError("measurement times must increase strictly and follow the preparation");
    }
}

namespace {

using Vec2 = std::array<double, 2>;

// Real rotation generated by precession: amplitudes turn by half the precession angle.
Vec2 evolve(const Vec2& psi, double omega, double dt) {
    const double half = 0.5 * omega * dt;
    const double c = std::cos(half);
    const double s = std::sin(half);
    return {c * psi[0] - s * psi[1], s * psi[0] + c * psi[1]};
}

// Projector onto the +1 (index 0) or -1 (index 1) eigenvector of the measured component.
Vec2 project(const Vec2& psi, int outcome) { return outcome > 0 ? Vec2{psi[0], 0.0} : Vec2{0.0, psi[1]}; }

double norm2(const Vec2& v) { return v[0] * v[0] + v[1] * v[1]; }

void check_indices(std::size_t i, std::size_t j) {
    if (!(i < j && j <= 2)) {
        throw std::out_of_range("time indices must satisfy i < j <= 2, got i=" + std::to_string(i) + " j=" + std::to_string(j));
    }
}

} // namespace

std::array<double, 4> quantum_sequential_table(const QuantumTwoLevelModel& model, std::size_t i, std::size_t j) {
    check_indices(i, j);
    model.validate();
    const Vec2 prepared{1.0, 0.0};
    const Vec2 at_first = evolve(prepared, model.omega, model.times[i] - model.preparation_time);
    std::array<double, 4> table{};
    for (int a : {+1, -1}) {
        const Vec2 after_first = evolve(project(at_first, a), model.omega, model.times[j] - model.times[i]);
        for (int b : {+1, -1}) {
            const std::size_t t = (a < 0 ? 2U : 0U) | (b < 0 ? 1U : 0U);
            table[t] = norm2(project(after_first, b));
        }
    }
    return table;
}

double quantum_pair_correlator(const QuantumTwoLevelModel& model, std::size_t i, std::size_t j) {
    const auto table = quantum_sequential_table(model, i, j);
    return table[0] - table[1] - table[2] + table[3];
}

Scenario three_time_pair_scenario() { return build_scenario({"Q_t1", "Q_t2", "Q_t3"}, {{0, 1}, {0, 2}, {1, 2}}); }

std::vector<ContextMarginal> quantum_pair_tables(const QuantumTwoLevelModel& model) {
    const Scenario s = three_time_pair_scenario();
    std::vector<ContextMarginal> out;
    for (const auto& c : s.contexts()) {
        const double correlator = std::clamp(quantum_pair_correlator(model, c.members[0], c.members[1]), -1.0, 1.0);
        const Rational k = rational_from_double(correlator);
        const Rational same = (1 + k) / 4;
        const Rational differ = (1 - k) / 4;
        out.push_back({c.id, {same, differ, differ, same}});
    }
    return out;
}

PairProtocolResult run_quantum_pair_protocol(const QuantumTwoLevelModel& model, std::uint64_t runs,
                                             std::uint64_t seed, const RunOptions& options) {
    model.validate();
    auto cfg = PairProtocolConfig::round_robin(three_time_pair_scenario(), quantum_pair_tables(model));
    return run_pairs(cfg, runs, seed, options, Protocol::quantum);
}

} // namespace condexp
