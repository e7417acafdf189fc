#include "condexp/feasibility.hpp"

#include "condexp/errors.hpp"
#include "condexp/lp.hpp"

#include <algorithm>
#include <stdexcept>

namespace condexp {

namespace {

// Table index of the outcome an assignment produces on a context.
std::uint32_t tuple_of(const Context& c, std::uint32_t mask, std::size_t n) {
    const Assignment a{mask, n};
    std::uint32_t t = 0;
    for (auto member : c.members) t = (t << 1) | (a.value(member) < 0 ? 1U : 0U);
    return t;
}

int member_sign(std::uint32_t t, std::size_t size, std::size_t k) { return (t >> (size - 1 - k)) & 1U ? -1 : +1; }

// Marginals indexed by context id.
std::vector<const ContextMarginal*> by_context(const std::vector<ContextMarginal>& marginals, const Scenario& s) {
    std::vector<const ContextMarginal*> out(s.num_contexts(), nullptr);
    for (const auto& m : marginals) {
        if (m.context >= s.num_contexts()) {
            throw ShapeError("marginal refers to context " + std::to_string(m.context) + " which does not exist");
        }
        if (out[m.context]) throw ShapeError("two marginals given for context " + std::to_string(m.context));
        out[m.context] = &m;
    }
    for (std::size_t c = 0; c < out.size(); ++c) {
        if (!out[c]) throw ShapeError("no marginal given for context " + std::to_string(c));
    }
    return out;
}

// Marginal of a context table on a subset of its members (given as positions).
std::vector<Rational> sub_marginal(const ContextMarginal& m, std::size_t size, const std::vector<std::size_t>& positions) {
    std::vector<Rational> out(std::size_t{1} << positions.size(), Rational(0));
    for (std::uint32_t t = 0; t < m.table.size(); ++t) {
        std::uint32_t sub = 0;
        for (auto pos : positions) sub = (sub << 1) | ((t >> (size - 1 - pos)) & 1U);
        out[sub] += m.table[t];
    }
    return out;
}

std::size_t position_of(const Context& c, ObservableId id) {
    return static_cast<std::size_t>(std::find(c.members.begin(), c.members.end(), id) - c.members.begin());
}

Rational abs_value(const Rational& v) { return v < 0 ? Rational(-v) : v; }

} // namespace

std::string outcome_label(std::uint32_t t, std::size_t size) {
    std::string out(size, '+');
    for (std::size_t k = 0; k < size; ++k) {
        if (member_sign(t, size, k) < 0) out[k] = '-';
    }
    return out;
}

std::uint32_t outcome_index(const std::string& label) {
    if (label.empty() || label.size() > 31) throw ValidationError("bad outcome string '" + label + "'");
    std::uint32_t t = 0;
    for (char ch : label) {
        if (ch != '+' && ch != '-') throw ValidationError("bad outcome string '" + label + "'");
        t = (t << 1) | (ch == '-' ? 1U : 0U);
    }
    return t;
}

void validate_marginal(const ContextMarginal& m, const Scenario& s) {
    if (m.context >= s.num_contexts()) throw ValidationError("unknown context " + std::to_string(m.context));
    const auto size = s.context(m.context).size();
    const std::string where = "table of context " + std::to_string(m.context);
    if (m.table.size() != (std::size_t{1} << size)) {
        throw ValidationError(where + " has " + std::to_string(m.table.size()) + " entries, expected " +
                              std::to_string(std::size_t{1} << size));
    }
    Rational total = 0;
    for (std::uint32_t t = 0; t < m.table.size(); ++t) {
        if (m.table[t] < 0) throw ValidationError(where + " has negative probability at " + outcome_label(t, size));
        total += m.table[t];
    }
    if (total != 1) throw ValidationError(where + " sums to " + total.get_str() + ", not 1");
}

void validate_joint(const JointDistribution& joint) {
    if (joint.num_observables > kMaxVertexObservables ||
        joint.weights.size() != (std::size_t{1} << joint.num_observables)) {
        throw ValidationError("joint distribution needs 2^n weights");
    }
    Rational total = 0;
    for (const auto& w : joint.weights) {
        if (w < 0) throw ValidationError("joint distribution has a negative weight");
        total += w;
    }
    if (total != 1) throw ValidationError("joint distribution sums to " + total.get_str() + ", not 1");
}

JointDistribution uniform_joint(std::size_t num_observables) {
    const std::size_t m = std::size_t{1} << num_observables;
    return {num_observables, std::vector<Rational>(m, Rational(1, static_cast<unsigned long>(m)))};
}

ContextMarginal project(const JointDistribution& joint, const Context& context) {
    ContextMarginal out{context.id, std::vector<Rational>(std::size_t{1} << context.size(), Rational(0))};
    for (std::uint32_t a = 0; a < joint.weights.size(); ++a) {
        if (joint.weights[a] != 0) out.table[tuple_of(context, a, joint.num_observables)] += joint.weights[a];
    }
    return out;
}

std::vector<ContextMarginal> project_all(const JointDistribution& joint, const Scenario& s) {
    if (joint.num_observables != s.num_observables()) throw ShapeError("joint and scenario disagree on observable count");
    std::vector<ContextMarginal> out;
    for (const auto& c : s.contexts()) out.push_back(project(joint, c));
    return out;
}

ConsistencyReport check_consistency(const std::vector<ContextMarginal>& marginals, const Scenario& s) {
    const auto tables = by_context(marginals, s);
    for (const auto* m : tables) validate_marginal(*m, s);

    ConsistencyReport report;
    report.max_discrepancy = 0;
    const auto& contexts = s.contexts();
    for (std::size_t c = 0; c < contexts.size(); ++c) {
        for (std::size_t d = c + 1; d < contexts.size(); ++d) {
            std::vector<ObservableId> shared;
            for (auto id : contexts[c].members) {
                if (std::find(contexts[d].members.begin(), contexts[d].members.end(), id) != contexts[d].members.end()) {
                    shared.push_back(id);
                }
            }
            if (shared.empty()) continue;
            std::sort(shared.begin(), shared.end());
            std::vector<std::size_t> pos_c;
            std::vector<std::size_t> pos_d;
            for (auto id : shared) {
                pos_c.push_back(position_of(contexts[c], id));
                pos_d.push_back(position_of(contexts[d], id));
            }
            const auto left = sub_marginal(*tables[c], contexts[c].size(), pos_c);
            const auto right = sub_marginal(*tables[d], contexts[d].size(), pos_d);
            Rational worst = 0;
            for (std::size_t t = 0; t < left.size(); ++t) worst = std::max(worst, abs_value(left[t] - right[t]));
            if (worst != 0) {
                report.consistent = false;
                std::string names;
                for (auto id : shared) names += (names.empty() ? "" : ",") + s.observables()[id].label;
                report.conflicts.push_back("contexts " + std::to_string(c) + " and " + std::to_string(d) +
                                           " disagree on {" + names + "} by up to " + worst.get_str());
            }
            report.max_discrepancy = std::max(report.max_discrepancy, worst);
        }
    }
    return report;
}

Rational evaluate(const MarginalCertificate& cert, const std::vector<ContextMarginal>& marginals) {
    Rational v = 0;
    for (const auto& m : marginals) {
        const auto& coeffs = cert.coefficients.at(m.context);
        if (coeffs.size() != m.table.size()) throw ShapeError("certificate and table sizes differ");
        for (std::size_t t = 0; t < coeffs.size(); ++t) v += coeffs[t] * m.table[t];
    }
    return v;
}

Rational evaluate(const MarginalCertificate& cert, const Scenario& s, Assignment a) {
    Rational v = 0;
    for (const auto& c : s.contexts()) v += cert.coefficients.at(c.id).at(tuple_of(c, a.mask, a.num_observables));
    return v;
}

std::string to_string(FeasibilityStatus status) {
    switch (status) {
    case FeasibilityStatus::feasible:
        return "feasible";
    case FeasibilityStatus::infeasible:
        return "infeasible";
    case FeasibilityStatus::inconsistent_marginals:
        return "inconsistent-marginals";
    }
    return "unknown";
}

CorrelationPoint marginals_to_correlations(const std::vector<ContextMarginal>& marginals, const Scenario& s) {
    const auto tables = by_context(marginals, s);
    CorrelationPoint p = zero_point(s);
    std::vector<bool> single_done(s.num_observables(), false);
    std::vector<bool> pair_done(s.correlated_pairs().size(), false);
    for (const auto& c : s.contexts()) {
        const auto& table = tables[c.id]->table;
        const auto size = c.size();
        for (std::size_t k = 0; k < size; ++k) {
            const auto id = c.members[k];
            if (single_done[id]) continue;
            Rational mean = 0;
            for (std::uint32_t t = 0; t < table.size(); ++t) mean += member_sign(t, size, k) * table[t];
            p.singles[id] = mean;
            single_done[id] = true;
        }
        for (std::size_t k = 0; k < size; ++k) {
            for (std::size_t l = k + 1; l < size; ++l) {
                const auto idx = static_cast<std::size_t>(s.pair_index(c.members[k], c.members[l]));
                if (pair_done[idx]) continue;
                Rational corr = 0;
                for (std::uint32_t t = 0; t < table.size(); ++t) {
                    corr += member_sign(t, size, k) * member_sign(t, size, l) * table[t];
                }
                p.correlators[s.correlated_pairs()[idx]] = corr;
                pair_done[idx] = true;
            }
        }
    }
    return p;
}

std::vector<ContextMarginal> correlations_to_marginals(const CorrelationPoint& p, const Scenario& s) {
    validate_point(p, s);
    std::vector<ContextMarginal> out;
    for (const auto& c : s.contexts()) {
        ContextMarginal m{c.id, {}};
        if (c.size() == 1) {
            const Rational& q = p.singles[c.members[0]];
            m.table = {(1 + q) / 2, (1 - q) / 2};
        } else if (c.size() == 2) {
            const Rational& qi = p.singles[c.members[0]];
            const Rational& qj = p.singles[c.members[1]];
            const Rational& k = p.correlators.at(ObservablePair{std::min(c.members[0], c.members[1]),
                                                                std::max(c.members[0], c.members[1])});
            for (std::uint32_t t = 0; t < 4; ++t) {
                const int a = member_sign(t, 2, 0);
                const int b = member_sign(t, 2, 1);
                m.table.push_back((1 + a * qi + b * qj + a * b * k) / 4);
            }
        } else {
            throw ShapeError("context " + std::to_string(c.id) + " has " + std::to_string(c.size()) +
                             " members; only pair and singleton contexts can be built from correlators");
        }
        for (std::uint32_t t = 0; t < m.table.size(); ++t) {
            if (m.table[t] < 0) {
                throw DomainError("context " + std::to_string(c.id) + " implies negative probability " +
                                  m.table[t].get_str() + " for outcome " + outcome_label(t, c.size()));
            }
        }
        out.push_back(std::move(m));
    }
    return out;
}

std::optional<Inequality> separating_facet(const CorrelationPoint& p, const Scenario& s) {
    validate_point(p, s);
    const auto n = s.num_observables();
    if (n > kMaxJointObservables) throw CapacityError("separation supports at most " + std::to_string(kMaxJointObservables) + " observables");

    // Coordinates fixed by the contexts: covered singles, then every correlated pair.
    std::vector<std::size_t> coords;
    std::vector<bool> uncovered(n, false);
    for (auto id : s.uncovered_observables()) uncovered[id] = true;
    for (std::size_t i = 0; i < n; ++i) {
        if (!uncovered[i]) coords.push_back(i);
    }
    for (std::size_t k = 0; k < s.correlated_pairs().size(); ++k) coords.push_back(n + k);
    const auto point = coordinates(p);

    // Variables: (c0, c_k) split into +/- parts, then one slack per row.
    // Rows: c0 + c.v - s_v = 0 for every vertex v;  c0 + c.x - s_x = -1.
    // Minimizing c0 + c.x over this truncated cone of valid inequalities ends at
    // a vertex of it, i.e. an extreme ray: a facet.
    const std::size_t free_vars = 1 + coords.size();
    const std::size_t vertices = std::size_t{1} << n;
    const std::size_t rows = vertices + 1;
    const std::size_t cols = 2 * free_vars + rows;
    lp::Problem prob;
    prob.A.assign(rows, std::vector<Rational>(cols, Rational(0)));
    prob.b.assign(rows, Rational(0));
    prob.c.assign(cols, Rational(0));
    auto fill_row = [&](std::size_t r, const std::vector<Rational>& x) {
        prob.A[r][0] = 1;
        prob.A[r][free_vars] = -1;
        for (std::size_t k = 0; k < coords.size(); ++k) {
            prob.A[r][1 + k] = x[coords[k]];
            prob.A[r][free_vars + 1 + k] = -x[coords[k]];
        }
        prob.A[r][2 * free_vars + r] = -1;
    };
    for (std::uint32_t mask = 0; mask < vertices; ++mask) fill_row(mask, coordinates(vertex_of(s, {mask, n})));
    fill_row(vertices, point);
    prob.b[vertices] = -1;
    for (std::size_t j = 0; j < 2 * free_vars; ++j) prob.c[j] = prob.A[vertices][j];

    const auto sol = lp::solve(prob);
    if (sol.status != lp::Status::optimal) throw std::logic_error("separation LP did not reach an optimum");
    if (sol.objective >= 0) return std::nullopt;

    std::vector<Rational> coeffs(n + s.correlated_pairs().size(), Rational(0));
    for (std::size_t k = 0; k < coords.size(); ++k) coeffs[coords[k]] = sol.x[1 + k] - sol.x[free_vars + 1 + k];
    Inequality ineq = canonicalize(inequality_from_coefficients(s, sol.x[0] - sol.x[free_vars], coeffs));

    for (std::uint32_t mask = 0; mask < vertices; ++mask) {
        if (evaluate(ineq, vertex_of(s, {mask, n})) < 0) throw std::logic_error("separating inequality cuts a vertex");
    }
    if (evaluate(ineq, p) >= 0) throw std::logic_error("separating inequality does not cut the point");
    return ineq;
}

FeasibilityVerdict joint_exists(const std::vector<ContextMarginal>& marginals, const Scenario& s) {
    const auto n = s.num_observables();
    if (n > kMaxJointObservables) {
        throw CapacityError("joint feasibility supports at most " + std::to_string(kMaxJointObservables) +
                            " observables, scenario has " + std::to_string(n));
    }
    FeasibilityVerdict verdict;
    verdict.consistency = check_consistency(marginals, s);
    if (!verdict.consistency.consistent) {
        verdict.status = FeasibilityStatus::inconsistent_marginals;
        return verdict;
    }
    const auto tables = by_context(marginals, s);
    const std::size_t columns = std::size_t{1} << n;

    lp::Problem prob;
    std::vector<std::pair<ContextId, std::uint32_t>> row_of;
    for (const auto& c : s.contexts()) {
        const std::size_t first = prob.A.size();
        for (std::uint32_t t = 0; t < tables[c.id]->table.size(); ++t) {
            prob.A.emplace_back(columns, Rational(0));
            prob.b.push_back(tables[c.id]->table[t]);
            row_of.emplace_back(c.id, t);
        }
        for (std::uint32_t a = 0; a < columns; ++a) prob.A[first + tuple_of(c, a, n)][a] = 1;
    }
    prob.c.assign(columns, Rational(0));
    const auto sol = lp::solve(prob);

    if (sol.status == lp::Status::optimal) {
        JointDistribution witness{n, sol.x};
        for (const auto& c : s.contexts()) {
            if (project(witness, c).table != tables[c.id]->table) throw std::logic_error("witness does not reproduce the marginals");
        }
        verdict.status = FeasibilityStatus::feasible;
        verdict.witness = std::move(witness);
        return verdict;
    }

    MarginalCertificate cert;
    for (const auto& c : s.contexts()) cert.coefficients.emplace_back(std::size_t{1} << c.size(), Rational(0));
    for (std::size_t r = 0; r < row_of.size(); ++r) cert.coefficients[row_of[r].first][row_of[r].second] = sol.farkas[r];
    for (std::uint32_t a = 0; a < columns; ++a) {
        if (evaluate(cert, s, {a, n}) < 0) throw std::logic_error("Farkas certificate is negative on a vertex");
    }
    if (evaluate(cert, marginals) >= 0) throw std::logic_error("Farkas certificate does not separate the input");
    verdict.status = FeasibilityStatus::infeasible;
    verdict.certificate = std::move(cert);

    const bool small_contexts = std::all_of(s.contexts().begin(), s.contexts().end(), [](const Context& c) { return c.size() <= 2; });
    if (small_contexts) verdict.separating_inequality = separating_facet(marginals_to_correlations(marginals, s), s);
    return verdict;
}

} // namespace condexp
