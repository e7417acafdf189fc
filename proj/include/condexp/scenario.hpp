#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace condexp {

using ObservableId = std::uint32_t;
using ContextId = std::uint32_t;

/// A two-valued observable; every outcome is -1 or +1.
struct Observable {
    ObservableId id = 0;
    std::string label;

    static constexpr std::array<int, 2> outcomes{-1, +1};
};

/// Observables measured jointly in one run, in measurement order.
struct Context {
    ContextId id = 0;
    std::vector<ObservableId> members;

    std::size_t size() const { return members.size(); }
};

/// Unordered observable pair stored with first < second.
struct ObservablePair {
    ObservableId first = 0;
    ObservableId second = 0;

    friend auto operator<=>(const ObservablePair&, const ObservablePair&) = default;
};

/// Observables and the contexts in which they are measured. Immutable after
/// construction; build one with build_scenario().
class Scenario {
  public:
    const std::vector<Observable>& observables() const { return observables_; }
    const std::vector<Context>& contexts() const { return contexts_; }
    std::size_t num_observables() const { return observables_.size(); }
    std::size_t num_contexts() const { return contexts_.size(); }
    const Context& context(ContextId id) const { return contexts_.at(id); }

    /// Pairs {i,j} contained in at least one context, sorted lexicographically.
    /// Together with the singles these are the correlation coordinates.
    const std::vector<ObservablePair>& correlated_pairs() const { return pairs_; }

    /// Index of a pair within correlated_pairs(), or -1 when no context holds it.
    std::ptrdiff_t pair_index(ObservableId a, ObservableId b) const;

    /// Observables that no context measures. Permitted, but reported.
    const std::vector<ObservableId>& uncovered_observables() const { return uncovered_; }

    const std::vector<std::string>& warnings() const { return warnings_; }

    std::vector<std::string> labels() const;
    std::vector<std::vector<ObservableId>> member_lists() const;

    friend bool operator==(const Scenario& a, const Scenario& b);

  private:
    friend Scenario build_scenario(const std::vector<std::string>&,
                                   const std::vector<std::vector<ObservableId>>&);

    std::vector<Observable> observables_;
    std::vector<Context> contexts_;
    std::vector<ObservablePair> pairs_;
    std::vector<ObservableId> uncovered_;
    std::vector<std::string> warnings_;
};

/// Validates labels and context member lists and assigns sequential ids.
/// Throws ValidationError on empty input, duplicate labels, out-of-range or
/// repeated members, and contexts with identical member sets.
Scenario build_scenario(const std::vector<std::string>& observable_labels,
                        const std::vector<std::vector<ObservableId>>& context_member_lists);

/// A context that survived hypergraph reduction, with its surviving members.
struct ResidualContext {
    ContextId context = 0;
    std::vector<ObservableId> members;

    friend bool operator==(const ResidualContext&, const ResidualContext&) = default;
};

struct CyclicityReport {
    bool acyclic = true;
    std::vector<ResidualContext> residual;
};

/// Repeatedly deletes observables that occur in exactly one context and
/// contexts contained in another context. The scenario is acyclic iff this
/// empties the context hypergraph; otherwise the residual is reported.
CyclicityReport detect_cyclicity(const Scenario& s);

/// Same reduction, choosing among applicable steps pseudo-randomly from
/// `order_seed`. The outcome does not depend on the order; exposed for tests.
CyclicityReport detect_cyclicity(const Scenario& s, std::uint64_t order_seed);

} // namespace condexp
