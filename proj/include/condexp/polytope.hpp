#pragma once

#include "condexp/rational.hpp"
#include "condexp/scenario.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace condexp {

/// Largest scenario whose 2^n deterministic assignments are enumerated.
inline constexpr std::size_t kMaxVertexObservables = 24;
/// Largest scenario accepted by the elimination-based facet derivation.
inline constexpr std::size_t kMaxFacetObservables = 6;

/// One deterministic +-1 valuation of all n observables. Bit (n-1-i) of the
/// mask set means observable i takes -1, so masks count "++..+", "++..-", ...
/// in the same order as outcome tables.
struct Assignment {
    std::uint32_t mask = 0;
    std::size_t num_observables = 0;

    int value(ObservableId i) const { return (mask >> (num_observables - 1 - i)) & 1U ? -1 : +1; }
};

/// Single-observable means and pair correlators over the scenario's coordinates.
struct CorrelationPoint {
    std::vector<Rational> singles;
    std::map<ObservablePair, Rational> correlators;

    friend bool operator==(const CorrelationPoint&, const CorrelationPoint&) = default;
};

/// constant + sum(single_coeffs[i] * <Q_i>) + sum(pair_coeffs[{i,j}] * K_ij) >= 0
struct Inequality {
    Rational constant;
    std::vector<Rational> single_coeffs;
    std::map<ObservablePair, Rational> pair_coeffs;

    /// True when no single-observable coefficient is nonzero.
    bool correlators_only() const;

    friend bool operator==(const Inequality&, const Inequality&) = default;
    friend bool operator<(const Inequality& a, const Inequality& b);
};

/// Zero point on the scenario's coordinates.
CorrelationPoint zero_point(const Scenario& s);

/// Zero inequality on the scenario's coordinates.
Inequality zero_inequality(const Scenario& s);

/// Throws DomainError unless every coordinate lies in [-1, 1], ShapeError unless
/// the coordinate set matches the scenario.
void validate_point(const CorrelationPoint& p, const Scenario& s);

/// Correlation image of a deterministic assignment.
CorrelationPoint vertex_of(const Scenario& s, Assignment a);

/// All 2^n vertices in mask order. Throws CapacityError for n > kMaxVertexObservables.
std::vector<CorrelationPoint> enumerate_vertices(const Scenario& s);

/// Flattened coordinates: singles in observable order, then correlators in
/// correlated_pairs() order.
std::vector<Rational> coordinates(const CorrelationPoint& p);
std::vector<Rational> coefficients(const Inequality& ineq);
Inequality inequality_from_coefficients(const Scenario& s, const Rational& constant,
                                        const std::vector<Rational>& coeffs);

/// Integer coefficients with gcd 1. Only positive scaling is applied, so the
/// sense is preserved and equal half-spaces get equal representations.
Inequality canonicalize(Inequality ineq);

/// Exact slack constant + coeffs . coords. Throws ShapeError on coordinate mismatch.
Rational evaluate(const Inequality& ineq, const CorrelationPoint& p);

struct FacetDerivation {
    std::vector<Inequality> facets;
    /// Equations every vertex satisfies (polytope not full-dimensional). Each is
    /// reported as "expression >= 0" with the understanding that it holds with equality.
    std::vector<Inequality> implied_equations;
    std::size_t dimension = 0;
};

/// Eliminates the unknown assignment measures from
///   coords = sum_a mu_a * vertex(a),  sum_a mu_a = 1,  mu_a >= 0
/// by Gaussian elimination on the equations and Fourier-Motzkin elimination with
/// Chernikov pruning on the rest. The surviving inequalities are reduced to the
/// irredundant facet list, canonical and sorted.
/// Throws CapacityError for n > kMaxFacetObservables.
FacetDerivation derive_polytope(const Scenario& s);

/// derive_polytope(s).facets
std::vector<Inequality> derive_facets(const Scenario& s);

/// Human-readable form, e.g. "1 + Q1*Q2 + Q1*Q3 + Q2*Q3 >= 0".
std::string format_inequality(const Inequality& ineq, const Scenario& s);

} // namespace condexp
