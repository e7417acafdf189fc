#include "condexp/polytope.hpp"

#include "condexp/errors.hpp"
#include "exact_linalg.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <set>
#include <sstream>

namespace condexp {

bool Inequality::correlators_only() const {
    return std::all_of(single_coeffs.begin(), single_coeffs.end(), [](const Rational& c) { return c == 0; });
}

bool operator<(const Inequality& a, const Inequality& b) {
    const auto ca = coefficients(a);
    const auto cb = coefficients(b);
    if (ca != cb) return std::lexicographical_compare(ca.begin(), ca.end(), cb.begin(), cb.end());
    return a.constant < b.constant;
}

CorrelationPoint zero_point(const Scenario& s) {
    CorrelationPoint p;
    p.singles.assign(s.num_observables(), Rational(0));
    for (const auto& pair : s.correlated_pairs()) p.correlators.emplace(pair, Rational(0));
    return p;
}

Inequality zero_inequality(const Scenario& s) {
    Inequality ineq;
    ineq.single_coeffs.assign(s.num_observables(), Rational(0));
    for (const auto& pair : s.correlated_pairs()) ineq.pair_coeffs.emplace(pair, Rational(0));
    return ineq;
}

namespace {

bool same_layout(const CorrelationPoint& p, const Scenario& s) {
    if (p.singles.size() != s.num_observables() || p.correlators.size() != s.correlated_pairs().size()) return false;
    auto it = p.correlators.begin();
    for (const auto& pair : s.correlated_pairs()) {
        if (it->first != pair) return false;
        ++it;
    }
    return true;
}

bool in_unit_interval(const Rational& v) { return v >= -1 && v <= 1; }

std::string pair_name(const ObservablePair& pair, const Scenario* s) {
    if (s) return s->observables()[pair.first].label + "*" + s->observables()[pair.second].label;
    return "K" + std::to_string(pair.first) + "," + std::to_string(pair.second);
}

} // namespace

void validate_point(const CorrelationPoint& p, const Scenario& s) {
    if (!same_layout(p, s)) throw ShapeError("correlation point does not match the scenario's coordinates");
    for (std::size_t i = 0; i < p.singles.size(); ++i) {
        if (!in_unit_interval(p.singles[i])) {
            throw DomainError("mean of " + s.observables()[i].label + " lies outside [-1, 1]");
        }
    }
    for (const auto& [pair, value] : p.correlators) {
        if (!in_unit_interval(value)) throw DomainError("correlator " + pair_name(pair, &s) + " lies outside [-1, 1]");
    }
}

CorrelationPoint vertex_of(const Scenario& s, Assignment a) {
    CorrelationPoint p;
    p.singles.reserve(s.num_observables());
    for (ObservableId i = 0; i < s.num_observables(); ++i) p.singles.emplace_back(a.value(i));
    for (const auto& pair : s.correlated_pairs()) p.correlators.emplace(pair, Rational(a.value(pair.first) * a.value(pair.second)));
    return p;
}

std::vector<CorrelationPoint> enumerate_vertices(const Scenario& s) {
    const auto n = s.num_observables();
    if (n > kMaxVertexObservables) {
        throw CapacityError("vertex enumeration supports at most " + std::to_string(kMaxVertexObservables) +
                            " observables, scenario has " + std::to_string(n));
    }
    std::vector<CorrelationPoint> out;
    out.reserve(std::size_t{1} << n);
    for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << n); ++mask) out.push_back(vertex_of(s, {mask, n}));
    return out;
}

std::vector<Rational> coordinates(const CorrelationPoint& p) {
    std::vector<Rational> out = p.singles;
    for (const auto& [pair, value] : p.correlators) out.push_back(value);
    return out;
}

std::vector<Rational> coefficients(const Inequality& ineq) {
    std::vector<Rational> out = ineq.single_coeffs;
    for (const auto& [pair, value] : ineq.pair_coeffs) out.push_back(value);
    return out;
}

Inequality inequality_from_coefficients(const Scenario& s, const Rational& constant,
                                        const std::vector<Rational>& coeffs) {
    const auto n = s.num_observables();
    if (coeffs.size() != n + s.correlated_pairs().size()) throw ShapeError("coefficient count does not match scenario");
    Inequality ineq;
    ineq.constant = constant;
    ineq.single_coeffs.assign(coeffs.begin(), coeffs.begin() + static_cast<std::ptrdiff_t>(n));
    for (std::size_t k = 0; k < s.correlated_pairs().size(); ++k) ineq.pair_coeffs.emplace(s.correlated_pairs()[k], coeffs[n + k]);
    return ineq;
}

Inequality canonicalize(Inequality ineq) {
    std::vector<Rational> all = coefficients(ineq);
    all.push_back(ineq.constant);
    normalize_to_primitive_integers(all);
    std::size_t k = 0;
    for (auto& c : ineq.single_coeffs) c = all[k++];
    for (auto& [pair, c] : ineq.pair_coeffs) c = all[k++];
    ineq.constant = all[k];
    return ineq;
}

Rational evaluate(const Inequality& ineq, const CorrelationPoint& p) {
    if (ineq.single_coeffs.size() != p.singles.size() || ineq.pair_coeffs.size() != p.correlators.size()) {
        throw ShapeError("inequality and point have different coordinates");
    }
    Rational slack = ineq.constant;
    for (std::size_t i = 0; i < p.singles.size(); ++i) slack += ineq.single_coeffs[i] * p.singles[i];
    auto it = p.correlators.begin();
    for (const auto& [pair, coeff] : ineq.pair_coeffs) {
        if (it->first != pair) throw ShapeError("inequality and point have different correlator coordinates");
        slack += coeff * it->second;
        ++it;
    }
    return slack;
}

namespace {

// A linear form over [mu_0 .. mu_{m-1} | 1 | x_1 .. x_d] together with the set of
// original nonnegativity constraints it was combined from.
struct Row {
    std::vector<Rational> coeffs;
    std::uint64_t history = 0;
};

class MeasureEliminator {
  public:
    MeasureEliminator(std::size_t num_measures, std::size_t num_coords)
        : m_(num_measures), d_(num_coords) {}

    std::size_t width() const { return m_ + 1 + d_; }
    std::size_t const_col() const { return m_; }

    void add_equation(std::vector<Rational> row) { equations_.push_back({std::move(row), 0}); }
    void add_nonnegative(std::size_t measure) {
        Row r{std::vector<Rational>(width(), Rational(0)), std::uint64_t{1} << measure};
        r.coeffs[measure] = 1;
        inequalities_.push_back(std::move(r));
    }

    // Returns the x-only rows: first the implied equations, then the inequalities.
    void run(std::vector<std::vector<Rational>>& equations_out, std::vector<std::vector<Rational>>& inequalities_out) {
        std::vector<bool> pivoted(m_, false);
        for (std::size_t e = 0; e < equations_.size(); ++e) {
            auto& eq = equations_[e].coeffs;
            std::size_t pivot = m_;
            for (std::size_t c = 0; c < m_; ++c) {
                if (eq[c] != 0) {
                    pivot = c;
                    break;
                }
            }
            if (pivot == m_) {
                bool nontrivial = std::any_of(eq.begin() + static_cast<std::ptrdiff_t>(m_), eq.end(),
                                              [](const Rational& v) { return v != 0; });
                if (nontrivial) {
                    normalize_to_primitive_integers(eq);
                    equations_out.push_back(eq);
                }
                continue;
            }
            pivoted[pivot] = true;
            for (std::size_t f = e + 1; f < equations_.size(); ++f) eliminate_with(equations_[f].coeffs, eq, pivot);
            for (auto& row : inequalities_) eliminate_with(row.coeffs, eq, pivot);
        }
        for (auto& row : inequalities_) normalize_to_primitive_integers(row.coeffs);
        prune(inequalities_);

        std::vector<std::size_t> remaining;
        for (std::size_t c = 0; c < m_; ++c) {
            if (!pivoted[c]) remaining.push_back(c);
        }
        std::size_t eliminated = 0;
        while (!remaining.empty()) {
            auto best = std::min_element(remaining.begin(), remaining.end(), [&](std::size_t a, std::size_t b) {
                return combination_cost(a) < combination_cost(b);
            });
            const std::size_t var = *best;
            remaining.erase(best);
            ++eliminated;
            fourier_motzkin_step(var, eliminated);
        }
        for (auto& row : inequalities_) {
            std::vector<Rational> tail(row.coeffs.begin() + static_cast<std::ptrdiff_t>(m_), row.coeffs.end());
            inequalities_out.push_back(std::move(tail));
        }
    }

  private:
    static void eliminate_with(std::vector<Rational>& row, const std::vector<Rational>& eq, std::size_t pivot) {
        if (row[pivot] == 0) return;
        const Rational factor = row[pivot] / eq[pivot];
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (eq[k] != 0) row[k] -= factor * eq[k];
        }
    }

    long long combination_cost(std::size_t var) const {
        long long pos = 0;
        long long neg = 0;
        for (const auto& row : inequalities_) {
            const int sign = sgn(row.coeffs[var]);
            pos += sign > 0;
            neg += sign < 0;
        }
        return pos * neg - pos - neg;
    }

    void fourier_motzkin_step(std::size_t var, std::size_t eliminated) {
        std::vector<Row> kept;
        std::vector<const Row*> positive;
        std::vector<const Row*> negative;
        for (const auto& row : inequalities_) {
            const int sign = sgn(row.coeffs[var]);
            if (sign > 0) {
                positive.push_back(&row);
            } else if (sign < 0) {
                negative.push_back(&row);
            } else {
                kept.push_back(row);
            }
        }
        for (const Row* p : positive) {
            for (const Row* q : negative) {
                const std::uint64_t history = p->history | q->history;
                // Chernikov: a combination of more than eliminated+1 originals is redundant.
                if (static_cast<std::size_t>(std::popcount(history)) > eliminated + 1) continue;
                Row combined{std::vector<Rational>(width()), history};
                const Rational wp = -q->coeffs[var];
                const Rational wq = p->coeffs[var];
                for (std::size_t k = 0; k < width(); ++k) combined.coeffs[k] = wp * p->coeffs[k] + wq * q->coeffs[k];
                normalize_to_primitive_integers(combined.coeffs);
                kept.push_back(std::move(combined));
            }
        }
        inequalities_ = std::move(kept);
        prune(inequalities_);
    }

    // Drops tautologies, exact duplicates, and rows whose history strictly
    // contains another row's history.
    void prune(std::vector<Row>& rows) const {
        std::vector<Row> filtered;
        std::set<std::vector<Rational>> seen;
        for (auto& row : rows) {
            bool has_variable = false;
            for (std::size_t k = 0; k < width(); ++k) {
                if (k != const_col() && row.coeffs[k] != 0) {
                    has_variable = true;
                    break;
                }
            }
            if (!has_variable) continue; // constant >= 0; the system is never empty
            if (!seen.insert(row.coeffs).second) continue;
            filtered.push_back(std::move(row));
        }
        std::vector<bool> drop(filtered.size(), false);
        for (std::size_t a = 0; a < filtered.size(); ++a) {
            for (std::size_t b = 0; b < filtered.size() && !drop[a]; ++b) {
                if (a == b || drop[b]) continue;
                const auto ha = filtered[a].history;
                const auto hb = filtered[b].history;
                if (hb != ha && (hb & ha) == hb) drop[a] = true;
            }
        }
        rows.clear();
        for (std::size_t a = 0; a < filtered.size(); ++a) {
            if (!drop[a]) rows.push_back(std::move(filtered[a]));
        }
    }

    std::size_t m_;
    std::size_t d_;
    std::vector<Row> equations_;
    std::vector<Row> inequalities_;
};

std::vector<std::vector<Rational>> vertex_matrix(const Scenario& s) {
    std::vector<std::vector<Rational>> out;
    const auto n = s.num_observables();
    for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << n); ++mask) out.push_back(coordinates(vertex_of(s, {mask, n})));
    return out;
}

Rational dot_affine(const std::vector<Rational>& affine, const std::vector<Rational>& x) {
    Rational v = affine[0];
    for (std::size_t k = 0; k < x.size(); ++k) v += affine[k + 1] * x[k];
    return v;
}

} // namespace

FacetDerivation derive_polytope(const Scenario& s) {
    const auto n = s.num_observables();
    if (n > kMaxFacetObservables) {
        throw CapacityError("facet derivation supports at most " + std::to_string(kMaxFacetObservables) +
                            " observables, scenario has " + std::to_string(n));
    }
    const auto vertices = vertex_matrix(s);
    const std::size_t m = vertices.size();
    const std::size_t d = n + s.correlated_pairs().size();

    MeasureEliminator elim(m, d);
    // sum_a mu_a * v_a[r] - x_r = 0 for each coordinate, and sum_a mu_a - 1 = 0.
    for (std::size_t r = 0; r < d; ++r) {
        std::vector<Rational> row(m + 1 + d, Rational(0));
        for (std::size_t a = 0; a < m; ++a) row[a] = vertices[a][r];
        row[m + 1 + r] = -1;
        elim.add_equation(std::move(row));
    }
    {
        std::vector<Rational> row(m + 1 + d, Rational(0));
        for (std::size_t a = 0; a < m; ++a) row[a] = 1;
        row[m] = -1;
        elim.add_equation(std::move(row));
    }
    for (std::size_t a = 0; a < m; ++a) elim.add_nonnegative(a);

    std::vector<std::vector<Rational>> equations;
    std::vector<std::vector<Rational>> inequalities;
    elim.run(equations, inequalities);

    FacetDerivation result;
    result.dimension = detail::affine_rank(vertices);
    for (const auto& eq : equations) {
        std::vector<Rational> coeffs(eq.begin() + 1, eq.end());
        result.implied_equations.push_back(canonicalize(inequality_from_coefficients(s, eq[0], coeffs)));
    }

    std::set<Inequality> unique;
    for (const auto& row : inequalities) {
        // Keep only supporting hyperplanes whose tight vertices span a (dim-1)-face.
        // Correlation polytopes are full-dimensional, so the representation is unique.
        std::vector<std::vector<Rational>> tight;
        for (const auto& v : vertices) {
            const Rational slack = dot_affine(row, v);
            if (slack < 0) throw std::logic_error("elimination produced an inequality violated by a vertex");
            if (slack == 0) tight.push_back(v);
        }
        if (tight.size() == vertices.size()) continue;
        if (tight.empty() || detail::affine_rank(tight) + 1 != result.dimension) continue;
        std::vector<Rational> coeffs(row.begin() + 1, row.end());
        unique.insert(canonicalize(inequality_from_coefficients(s, row[0], coeffs)));
    }
    result.facets.assign(unique.begin(), unique.end());
    return result;
}

std::vector<Inequality> derive_facets(const Scenario& s) { return derive_polytope(s).facets; }

std::string format_inequality(const Inequality& ineq, const Scenario& s) {
    std::ostringstream os;
    bool first = true;
    auto term = [&](const Rational& c, const std::string& name) {
        if (c == 0) return;
        const bool negative = c < 0;
        const Rational magnitude = negative ? Rational(-c) : c;
        if (first) {
            os << (negative ? "-" : "");
        } else {
            os << (negative ? " - " : " + ");
        }
        if (magnitude != 1 || name.empty()) os << magnitude.get_str();
        if (magnitude != 1 && !name.empty()) os << "*";
        os << name;
        first = false;
    };
    term(ineq.constant, "");
    for (std::size_t i = 0; i < ineq.single_coeffs.size(); ++i) term(ineq.single_coeffs[i], s.observables()[i].label);
    for (const auto& [pair, c] : ineq.pair_coeffs) term(c, pair_name(pair, &s));
    if (first) os << "0";
    os << " >= 0";
    return os.str();
}

} // namespace condexp
