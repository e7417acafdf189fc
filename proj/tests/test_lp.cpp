#include "doctest.h"

#include "condexp/lp.hpp"
#include "oracles.hpp"

#include <optional>
#include <random>

using namespace condexp;
using lp::Problem;
using lp::Status;

namespace {

using Mat = std::vector<std::vector<Rational>>;

bool satisfies(const Problem& p, const std::vector<Rational>& x) {
    for (const auto& v : x) {
        if (v < 0) return false;
    }
    for (std::size_t i = 0; i < p.A.size(); ++i) {
        Rational row = 0;
        for (std::size_t j = 0; j < x.size(); ++j) row += p.A[i][j] * x[j];
        if (row != p.b[i]) return false;
    }
    return true;
}

// Solves B x_B = b for the chosen columns by Gauss-Jordan; nullopt if singular.
std::optional<std::vector<Rational>> basic_solution(const Problem& p, const std::vector<std::size_t>& cols) {
    const std::size_t m = p.A.size();
    Mat a(m, std::vector<Rational>(m + 1));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < m; ++k) a[i][k] = p.A[i][cols[k]];
        a[i][m] = p.b[i];
    }
    for (std::size_t c = 0; c < m; ++c) {
        std::size_t r = c;
        while (r < m && a[r][c] == 0) ++r;
        if (r == m) return std::nullopt;
        std::swap(a[r], a[c]);
        const Rational lead = a[c][c];
        for (auto& v : a[c]) v /= lead;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == c || a[i][c] == 0) continue;
            const Rational f = a[i][c];
            for (std::size_t k = 0; k <= m; ++k) a[i][k] -= f * a[c][k];
        }
    }
    std::vector<Rational> x(p.c.size(), Rational(0));
    for (std::size_t k = 0; k < m; ++k) x[cols[k]] = a[k][m];
    return x;
}

// Drops dependent rows of [A|b]; nullopt when the equations are inconsistent.
std::optional<Problem> independent_rows(const Problem& p) {
    const std::size_t n = p.c.size();
    Mat a;
    for (std::size_t i = 0; i < p.A.size(); ++i) {
        auto row = p.A[i];
        row.push_back(p.b[i]);
        a.push_back(row);
    }
    std::size_t r = 0;
    for (std::size_t c = 0; c < n && r < a.size(); ++c) {
        std::size_t q = r;
        while (q < a.size() && a[q][c] == 0) ++q;
        if (q == a.size()) continue;
        std::swap(a[r], a[q]);
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (i == r || a[i][c] == 0) continue;
            const Rational f = a[i][c] / a[r][c];
            for (std::size_t k = 0; k <= n; ++k) a[i][k] -= f * a[r][k];
        }
        ++r;
    }
    for (std::size_t i = r; i < a.size(); ++i) {
        if (a[i][n] != 0) return std::nullopt;
    }
    Problem out;
    out.c = p.c;
    for (std::size_t i = 0; i < r; ++i) {
        out.b.push_back(a[i][n]);
        a[i].pop_back();
        out.A.push_back(a[i]);
    }
    return out;
}

// Minimum over all basic feasible solutions; nullopt when there is none.
std::optional<Rational> brute_force_optimum(const Problem& original) {
    const auto reduced = independent_rows(original);
    if (!reduced) return std::nullopt;
    const Problem& p = *reduced;
    const std::size_t n = p.c.size();
    const std::size_t m = p.A.size();
    if (m == 0) return Rational(0);
    std::vector<bool> choose(n, false);
    std::fill(choose.begin(), choose.begin() + static_cast<std::ptrdiff_t>(m), true);
    std::optional<Rational> best;
    do {
        std::vector<std::size_t> cols;
        for (std::size_t j = 0; j < n; ++j) {
            if (choose[j]) cols.push_back(j);
        }
        auto x = basic_solution(p, cols);
        if (!x || !satisfies(p, *x)) continue;
        Rational obj = 0;
        for (std::size_t j = 0; j < n; ++j) obj += p.c[j] * (*x)[j];
        if (!best || obj < *best) best = obj;
    } while (std::prev_permutation(choose.begin(), choose.end()));
    return best;
}

} // namespace

TEST_CASE("lp: textbook optimum") {
    // max 3x + 2y s.t. x + y <= 4, x + 3y <= 6, x <= 3 with slacks
    Problem p;
    p.A = {{1, 1, 1, 0, 0}, {1, 3, 0, 1, 0}, {1, 0, 0, 0, 1}};
    p.b = {4, 6, 3};
    p.c = {-3, -2, 0, 0, 0};
    const auto sol = lp::solve(p);
    REQUIRE(sol.status == Status::optimal);
    CHECK(sol.objective == -11);
    CHECK(sol.x[0] == 3);
    CHECK(sol.x[1] == 1);
    CHECK(satisfies(p, sol.x));
}

TEST_CASE("lp: infeasible problem has a Farkas certificate") {
    // x + y = 1 and x + y = 2
    Problem p;
    p.A = {{1, 1}, {1, 1}};
    p.b = {1, 2};
    p.c = {0, 0};
    const auto sol = lp::solve(p);
    REQUIRE(sol.status == Status::infeasible);
    REQUIRE(sol.farkas.size() == 2);
    for (std::size_t j = 0; j < 2; ++j) CHECK(sol.farkas[0] * p.A[0][j] + sol.farkas[1] * p.A[1][j] >= 0);
    CHECK(sol.farkas[0] * p.b[0] + sol.farkas[1] * p.b[1] < 0);
}

TEST_CASE("lp: negative right-hand side") {
    // -x = -2
    Problem p;
    p.A = {{-1}};
    p.b = {-2};
    p.c = {1};
    const auto sol = lp::solve(p);
    REQUIRE(sol.status == Status::optimal);
    CHECK(sol.x[0] == 2);
}

TEST_CASE("lp: unbounded") {
    Problem p;
    p.A = {{1, -1}};
    p.b = {0};
    p.c = {-1, 0};
    CHECK(lp::solve(p).status == Status::unbounded);
}

TEST_CASE("lp: redundant equality rows") {
    Problem p;
    p.A = {{1, 1, 0}, {2, 2, 0}, {0, 1, 1}};
    p.b = {1, 2, 1};
    p.c = {1, 2, 3};
    const auto sol = lp::solve(p);
    REQUIRE(sol.status == Status::optimal);
    CHECK(satisfies(p, sol.x));
    CHECK(sol.objective == 2);
}

TEST_CASE("lp: Beale's cycling example terminates") {
    // min -3/4 x4 + 20 x5 - 1/2 x6 + 6 x7
    Problem p;
    p.A = {{1, 0, 0, Rational(1, 4), -8, -1, 9},
           {0, 1, 0, Rational(1, 2), -12, Rational(-1, 2), 3},
           {0, 0, 1, 0, 0, 1, 0}};
    p.b = {0, 0, 1};
    p.c = {0, 0, 0, Rational(-3, 4), 20, Rational(-1, 2), 6};
    const auto sol = lp::solve(p);
    REQUIRE(sol.status == Status::optimal);
    CHECK(sol.objective == Rational(-5, 4));
}

TEST_CASE("lp: random problems agree with basis enumeration") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> coef(-3, 3);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t m = 1 + trial % 3;
        const std::size_t n = m + 1 + (trial / 3) % 4;
        Problem p;
        p.A.assign(m, std::vector<Rational>(n));
        for (auto& row : p.A)
            for (auto& v : row) v = coef(rng);
        p.b.resize(m);
        for (auto& v : p.b) v = coef(rng);
        p.c.resize(n);
        for (auto& v : p.c) v = coef(rng) + 4; // positive costs keep the problem bounded
        const auto sol = lp::solve(p);
        const auto expected = brute_force_optimum(p);
        if (sol.status == Status::optimal) {
            CHECK(satisfies(p, sol.x));
            REQUIRE(expected.has_value());
            CHECK(sol.objective == *expected);
        } else {
            REQUIRE(sol.status == Status::infeasible);
            Rational yb = 0;
            for (std::size_t i = 0; i < m; ++i) yb += sol.farkas[i] * p.b[i];
            CHECK(yb < 0);
            for (std::size_t j = 0; j < n; ++j) {
                Rational ya = 0;
                for (std::size_t i = 0; i < m; ++i) ya += sol.farkas[i] * p.A[i][j];
                CHECK(ya >= 0);
            }
            CHECK_FALSE(expected.has_value());
        }
    }
}
