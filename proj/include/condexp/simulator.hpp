#pragma once

#include "condexp/feasibility.hpp"
#include "condexp/polytope.hpp"
#include "condexp/scenario.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace condexp {

enum class Protocol { triple, pair, quantum };

std::string to_string(Protocol p);

/// One recorded measurement event: run k measured `context` and saw `outcomes`
/// (+1/-1, in context member order).
struct DataRecord {
    std::uint64_t run_index = 0;
    ContextId context = 0;
    std::vector<std::int8_t> outcomes;
    Protocol protocol = Protocol::triple;

    friend bool operator==(const DataRecord&, const DataRecord&) = default;
};

/// Receives records in run order.
class RecordSink {
  public:
    virtual ~RecordSink() = default;
    virtual void consume(const DataRecord& record) = 0;
};

class RecordCollector : public RecordSink {
  public:
    void consume(const DataRecord& record) override { records.push_back(record); }
    std::vector<DataRecord> records;
};

/// CSV with header "k,context,outcomes,protocol"; outcomes as "+-" strings.
class CsvRecordWriter : public RecordSink {
  public:
    explicit CsvRecordWriter(std::ostream& os);
    void consume(const DataRecord& record) override;

  private:
    std::ostream& os_;
    std::string line_;
};

/// Running sum of +-1 products.
struct Estimate {
    std::int64_t sum = 0;
    std::uint64_t count = 0;

    bool present() const { return count > 0; }
    /// Sample mean; NaN when absent.
    double value() const;
    /// sqrt((1 - value^2) / count); NaN when absent.
    double standard_error() const;

    void add(int product) {
        sum += product;
        ++count;
    }
    void merge(const Estimate& other) {
        sum += other.sum;
        count += other.count;
    }
    friend bool operator==(const Estimate&, const Estimate&) = default;
};

struct EstimatedCorrelations {
    std::vector<Estimate> singles;
    std::vector<ObservablePair> pairs;
    std::vector<Estimate> correlators;

    static EstimatedCorrelations for_scenario(const Scenario& s);

    /// Throws ShapeError when the scenario has no such pair coordinate.
    const Estimate& correlator(ObservableId a, ObservableId b) const;

    /// Folds one record of a context (outcomes in member order) into the sums.
    void add(const Scenario& s, const Context& c, const std::vector<std::int8_t>& outcomes);
    void merge(const EstimatedCorrelations& other);

    friend bool operator==(const EstimatedCorrelations&, const EstimatedCorrelations&) = default;
};

/// Exact rational point built from the estimate sums. Absent estimates throw
/// ShapeError. With zero_singles the single-observable coordinates are set to 0.
CorrelationPoint to_correlation_point(const EstimatedCorrelations& est, const Scenario& s, bool zero_singles);

/// K_12 + K_13 + K_23 over observables 0, 1, 2. Throws ShapeError if a pair is missing.
Rational lg_statistic(const CorrelationPoint& p);
/// Same on estimates. When all three pairs come from the same number of records
/// the sum is formed from the integer tallies, so identical records give the
/// exact value. Absent pairs throw ShapeError.
double lg_statistic(const EstimatedCorrelations& est);

struct RunOptions {
    /// Worker threads; results do not depend on it.
    std::size_t threads = 1;
    /// Optional record destination, fed in run order.
    RecordSink* sink = nullptr;
};

struct TripleProtocolResult {
    EstimatedCorrelations estimates;
    /// Histogram of S_k = Q1Q2 + Q1Q3 + Q2Q3 over runs.
    std::map<int, std::uint64_t> statistic_histogram;
    int min_statistic = 0;
    std::int64_t statistic_sum = 0;
    std::uint64_t runs = 0;

    /// statistic_sum / runs
    double mean_statistic() const;
};

/// Protocol (i): every run samples one assignment from `joint` and records the
/// full outcome triple of the scenario's single three-member context.
/// Throws ValidationError for other scenarios or an invalid joint, EmptyResultError for zero runs.
TripleProtocolResult run_triple_protocol(const Scenario& s, const JointDistribution& joint, std::uint64_t runs,
                                         std::uint64_t seed, const RunOptions& options = {});

/// Protocol (ii) configuration: run k measures context schedule[k % schedule.size()]
/// and draws its outcome pair from that context's table.
struct PairProtocolConfig {
    Scenario scenario;
    std::vector<ContextMarginal> tables;
    std::vector<ContextId> schedule;

    /// Schedule 0, 1, ..., C-1 repeated.
    static PairProtocolConfig round_robin(Scenario s, std::vector<ContextMarginal> tables);

    /// Throws ValidationError unless every context is a pair with a valid table and
    /// the schedule names every context.
    void validate() const;
};

struct PairProtocolResult {
    EstimatedCorrelations estimates;
    std::vector<std::uint64_t> runs_per_context;
};

/// Each run measures only one pair, so correlators of different contexts come
/// from disjoint sub-ensembles. Contexts that receive no runs stay absent.
PairProtocolResult run_pair_protocol(const PairProtocolConfig& cfg, std::uint64_t runs, std::uint64_t seed,
                                     const RunOptions& options = {});

/// Spin-1/2 precessing at angular frequency omega about an axis orthogonal to
/// the measured component, prepared in the +1 eigenstate at preparation_time
/// and measured projectively at times[0] < times[1] < times[2].
struct QuantumTwoLevelModel {
    double omega = 0.0;
    std::array<double, 3> times{1.0, 2.0, 3.0};
    double preparation_time = 0.0;

    /// omega = omega_tau, times 1, 2, 3, prepared at 0.
    static QuantumTwoLevelModel equally_spaced(double omega_tau);

    /// Throws ValidationError for non-finite values or times that do not increase.
    void validate() const;
};

/// Probabilities of (+,+), (+,-), (-,+), (-,-) for sequential projective
/// measurements at times[i] and times[j], from 2x2 rotation matrices and projectors.
std::array<double, 4> quantum_sequential_table(const QuantumTwoLevelModel& model, std::size_t i, std::size_t j);

/// <Q_ti Q_tj> of the sequential measurement, indices 0-based.
/// Throws std::out_of_range unless i < j <= 2.
double quantum_pair_correlator(const QuantumTwoLevelModel& model, std::size_t i, std::size_t j);

/// Three observables Q_t1, Q_t2, Q_t3 with contexts {t1,t2}, {t1,t3}, {t2,t3}.
Scenario three_time_pair_scenario();

/// Pair tables (1 + ab K_ij)/4 with K_ij = quantum_pair_correlator.
std::vector<ContextMarginal> quantum_pair_tables(const QuantumTwoLevelModel& model);

/// Protocol (ii) driven by the quantum pair tables on three_time_pair_scenario().
PairProtocolResult run_quantum_pair_protocol(const QuantumTwoLevelModel& model, std::uint64_t runs,
                                             std::uint64_t seed, const RunOptions& options = {});

} // namespace condexp
