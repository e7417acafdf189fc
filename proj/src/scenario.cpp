#include "condexp/scenario.hpp"

#include "condexp/errors.hpp"

#include <algorithm>
#include <optional>
#include <random>
#include <set>

namespace condexp {

std::ptrdiff_t Scenario::pair_index(ObservableId a, ObservableId b) const {
    if (a > b) std::swap(a, b);
    const ObservablePair key{a, b};
    auto it = std::lower_bound(pairs_.begin(), pairs_.end(), key);
    if (it == pairs_.end() || *it != key) return -1;
    return it - pairs_.begin();
}

std::vector<std::string> Scenario::labels() const {
    std::vector<std::string> out;
    out.reserve(observables_.size());
    for (const auto& o : observables_) out.push_back(o.label);
    return out;
}

std::vector<std::vector<ObservableId>> Scenario::member_lists() const {
    std::vector<std::vector<ObservableId>> out;
    out.reserve(contexts_.size());
    for (const auto& c : contexts_) out.push_back(c.members);
    return out;
}

bool operator==(const Scenario& a, const Scenario& b) {
    return a.labels() == b.labels() && a.member_lists() == b.member_lists();
}

Scenario build_scenario(const std::vector<std::string>& observable_labels,
                        const std::vector<std::vector<ObservableId>>& context_member_lists) {
    if (observable_labels.empty()) throw ValidationError("scenario needs at least one observable");
    if (context_member_lists.empty()) throw ValidationError("scenario needs at least one context");

    Scenario s;
    std::set<std::string> seen_labels;
    for (std::size_t i = 0; i < observable_labels.size(); ++i) {
        const auto& label = observable_labels[i];
        if (label.empty()) throw ValidationError("observable " + std::to_string(i) + " has an empty label");
        if (!seen_labels.insert(label).second) throw ValidationError("duplicate observable label '" + label + "'");
        s.observables_.push_back({static_cast<ObservableId>(i), label});
    }

    const auto n = observable_labels.size();
    std::set<std::vector<ObservableId>> seen_sets;
    std::set<ObservablePair> pairs;
    std::vector<bool> covered(n, false);
    for (std::size_t c = 0; c < context_member_lists.size(); ++c) {
        const auto& members = context_member_lists[c];
        const std::string where = "context " + std::to_string(c);
        if (members.empty()) throw ValidationError(where + " is empty");
        std::vector<ObservableId> sorted = members;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw ValidationError(where + " lists an observable twice");
        }
        for (auto id : sorted) {
            if (id >= n) {
                throw ValidationError(where + " references observable " + std::to_string(id) + " but only " +
                                      std::to_string(n) + " are declared");
            }
            covered[id] = true;
        }
        if (!seen_sets.insert(sorted).second) throw ValidationError(where + " duplicates an earlier context");
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            for (std::size_t j = i + 1; j < sorted.size(); ++j) pairs.insert({sorted[i], sorted[j]});
        }
        s.contexts_.push_back({static_cast<ContextId>(c), members});
    }
    s.pairs_.assign(pairs.begin(), pairs.end());
    for (std::size_t i = 0; i < n; ++i) {
        if (!covered[i]) {
            s.uncovered_.push_back(static_cast<ObservableId>(i));
            s.warnings_.push_back("observable '" + observable_labels[i] + "' is not measured in any context");
        }
    }
    return s;
}

namespace {

struct Edge {
    ContextId id;
    std::vector<ObservableId> members; // sorted
    bool alive = true;
};

// One reduction step: either drop `observable` from `edge`, or delete `edge`.
struct Step {
    std::size_t edge;
    std::optional<ObservableId> observable;
};

std::vector<Step> applicable_steps(const std::vector<Edge>& edges, std::size_t num_observables) {
    std::vector<Step> steps;
    std::vector<std::size_t> occurrences(num_observables, 0);
    std::vector<std::size_t> owner(num_observables, 0);
    for (std::size_t e = 0; e < edges.size(); ++e) {
        if (!edges[e].alive) continue;
        for (auto v : edges[e].members) {
            ++occurrences[v];
            owner[v] = e;
        }
    }
    for (std::size_t v = 0; v < num_observables; ++v) {
        if (occurrences[v] == 1) steps.push_back({owner[v], static_cast<ObservableId>(v)});
    }
    for (std::size_t e = 0; e < edges.size(); ++e) {
        if (!edges[e].alive) continue;
        bool removable = edges[e].members.empty();
        for (std::size_t f = 0; f < edges.size() && !removable; ++f) {
            if (f == e || !edges[f].alive) continue;
            removable = std::includes(edges[f].members.begin(), edges[f].members.end(), edges[e].members.begin(),
                                      edges[e].members.end());
        }
        if (removable) steps.push_back({e, std::nullopt});
    }
    return steps;
}

CyclicityReport reduce(const Scenario& s, std::optional<std::uint64_t> order_seed) {
    std::vector<Edge> edges;
    for (const auto& c : s.contexts()) {
        Edge e{c.id, c.members};
        std::sort(e.members.begin(), e.members.end());
        edges.push_back(std::move(e));
    }
    std::mt19937_64 rng(order_seed.value_or(0));
    for (;;) {
        auto steps = applicable_steps(edges, s.num_observables());
        if (steps.empty()) break;
        std::size_t pick = 0;
        if (order_seed) pick = std::uniform_int_distribution<std::size_t>(0, steps.size() - 1)(rng);
        const Step& step = steps[pick];
        auto& edge = edges[step.edge];
        if (step.observable) {
            edge.members.erase(std::find(edge.members.begin(), edge.members.end(), *step.observable));
        } else {
            edge.alive = false;
        }
    }
    CyclicityReport report;
    for (const auto& e : edges) {
        if (e.alive) report.residual.push_back({e.id, e.members});
    }
    report.acyclic = report.residual.empty();
    return report;
}

} // namespace

CyclicityReport detect_cyclicity(const Scenario& s) { return reduce(s, std::nullopt); }

CyclicityReport detect_cyclicity(const Scenario& s, std::uint64_t order_seed) { return reduce(s, order_seed); }

} // namespace condexp
