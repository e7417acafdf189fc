#pragma once

#include "condexp/rational.hpp"

#include <cstddef>
#include <vector>

namespace condexp::lp {

/// minimize c.x  subject to  A x = b,  x >= 0
struct Problem {
    std::vector<std::vector<Rational>> A;
    std::vector<Rational> b;
    std::vector<Rational> c;
};

enum class Status { optimal, infeasible, unbounded };

struct Solution {
    Status status = Status::infeasible;
    /// Basic optimal solution (status optimal).
    std::vector<Rational> x;
    Rational objective;
    /// Farkas vector y with y.A >= 0 column-wise and y.b < 0 (status infeasible).
    std::vector<Rational> farkas;
};

/// Two-phase dense tableau simplex in exact arithmetic with Bland's rule.
/// Returned solutions are vertices of the feasible region.
Solution solve(const Problem& problem);

} // namespace condexp::lp
