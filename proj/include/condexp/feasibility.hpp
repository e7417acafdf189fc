#pragma once

#include "condexp/polytope.hpp"
#include "condexp/rational.hpp"
#include "condexp/scenario.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace condexp {

/// Largest scenario handed to the exact weight LP.
inline constexpr std::size_t kMaxJointObservables = 12;

/// Outcome distribution of one context. Entry t is the probability of the
/// outcome tuple whose k-th member (context member order) is -1 iff bit
/// (size-1-k) of t is set: "++", "+-", "-+", "--" for a pair.
struct ContextMarginal {
    ContextId context = 0;
    std::vector<Rational> table;

    friend bool operator==(const ContextMarginal&, const ContextMarginal&) = default;
};

/// Weights over the 2^n assignments, indexed by Assignment::mask.
struct JointDistribution {
    std::size_t num_observables = 0;
    std::vector<Rational> weights;

    friend bool operator==(const JointDistribution&, const JointDistribution&) = default;
};

/// Outcome string for table index t of a context with `size` members, e.g. "+-".
std::string outcome_label(std::uint32_t t, std::size_t size);
/// Inverse of outcome_label; throws ValidationError on anything but '+'/'-'.
std::uint32_t outcome_index(const std::string& label);

/// Throws ValidationError unless the table has 2^|context| nonnegative entries summing to 1.
void validate_marginal(const ContextMarginal& m, const Scenario& s);
/// Throws ValidationError unless weights are 2^n nonnegative entries summing to 1.
void validate_joint(const JointDistribution& joint);

JointDistribution uniform_joint(std::size_t num_observables);

/// Marginal of `joint` on the given context.
ContextMarginal project(const JointDistribution& joint, const Context& context);
std::vector<ContextMarginal> project_all(const JointDistribution& joint, const Scenario& s);

struct ConsistencyReport {
    bool consistent = true;
    /// Largest absolute difference between sub-marginals of overlapping contexts.
    Rational max_discrepancy;
    /// One entry per disagreeing context pair.
    std::vector<std::string> conflicts;
};

/// Validates every table and compares the sub-marginals that overlapping contexts
/// induce on their shared observables. Throws ShapeError unless there is exactly
/// one marginal per context.
ConsistencyReport check_consistency(const std::vector<ContextMarginal>& marginals, const Scenario& s);

/// Linear functional over the marginal tables: sum_c sum_t coefficients[c][t] * p_c(t).
/// Nonnegative on every deterministic assignment.
struct MarginalCertificate {
    std::vector<std::vector<Rational>> coefficients;
};

Rational evaluate(const MarginalCertificate& cert, const std::vector<ContextMarginal>& marginals);
/// Value on the deterministic tables of one assignment.
Rational evaluate(const MarginalCertificate& cert, const Scenario& s, Assignment a);

enum class FeasibilityStatus { feasible, infeasible, inconsistent_marginals };

std::string to_string(FeasibilityStatus status);

struct FeasibilityVerdict {
    FeasibilityStatus status = FeasibilityStatus::feasible;
    ConsistencyReport consistency;
    /// Present iff feasible; projects exactly onto every input table.
    std::optional<JointDistribution> witness;
    /// Present iff infeasible: Farkas certificate over the tables.
    std::optional<MarginalCertificate> certificate;
    /// Present iff infeasible and every context has at most two members: a facet
    /// of the correlation polytope violated by the input, in canonical form.
    std::optional<Inequality> separating_inequality;
};

/// Decides whether a joint distribution over all assignments reproduces the
/// given context marginals, by exact simplex on the assignment weights.
/// Certificates are re-verified against every vertex before being returned.
FeasibilityVerdict joint_exists(const std::vector<ContextMarginal>& marginals, const Scenario& s);

/// Singles and correlators implied by consistent marginals. Singles of observables
/// that no context measures are 0; correlators come from any context holding the pair.
CorrelationPoint marginals_to_correlations(const std::vector<ContextMarginal>& marginals, const Scenario& s);

/// Pair table p(a,b) = (1 + a<Q_i> + b<Q_j> + ab K_ij)/4 for every pair context
/// (singleton contexts get (1 + a<Q_i>)/2). Throws ShapeError for larger contexts
/// and DomainError naming the context when an implied probability is negative.
std::vector<ContextMarginal> correlations_to_marginals(const CorrelationPoint& p, const Scenario& s);

/// Finds a facet of the correlation polytope (restricted to coordinates the
/// contexts determine) that `p` violates, or nullopt when p lies in the polytope.
std::optional<Inequality> separating_facet(const CorrelationPoint& p, const Scenario& s);

} // namespace condexp
