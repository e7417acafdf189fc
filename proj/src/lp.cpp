#include "condexp/lp.hpp"

#include <stdexcept>

namespace condexp::lp {

namespace {

constexpr std::size_t npos = static_cast<std::size_t>(-1);

// Tableau over [structural | artificial | rhs]. Artificial columns start as the
// identity, so they hold the current basis inverse throughout.
class Tableau {
  public:
    explicit Tableau(const Problem& p) : rows_(p.b.size()), cols_(p.c.size()) {
        if (p.A.size() != rows_) throw std::invalid_argument("lp: A and b row counts differ");
        t_.assign(rows_, std::vector<Rational>(cols_ + rows_ + 1, Rational(0)));
        sign_.assign(rows_, 1);
        basis_.resize(rows_);
        for (std::size_t i = 0; i < rows_; ++i) {
            if (p.A[i].size() != cols_) throw std::invalid_argument("lp: ragged constraint matrix");
            sign_[i] = p.b[i] < 0 ? -1 : 1;
            for (std::size_t j = 0; j < cols_; ++j) t_[i][j] = sign_[i] * p.A[i][j];
            t_[i][cols_ + i] = 1;
            t_[i].back() = sign_[i] * p.b[i];
            basis_[i] = cols_ + i;
        }
    }

    std::size_t width() const { return cols_ + rows_; }

    // Simplex with Bland's rule for `cost` over structural+artificial columns.
    // Columns with allowed[j] false never enter. Returns false if unbounded.
    bool optimize(const std::vector<Rational>& cost, const std::vector<bool>& allowed) {
        for (;;) {
            std::size_t entering = npos;
            for (std::size_t j = 0; j < width() && entering == npos; ++j) {
                if (allowed[j] && reduced_cost(cost, j) < 0) entering = j;
            }
            if (entering == npos) return true;
            std::size_t leaving = npos;
            Rational best_ratio;
            for (std::size_t i = 0; i < rows_; ++i) {
                if (t_[i][entering] <= 0) continue;
                Rational ratio = t_[i].back() / t_[i][entering];
                if (leaving == npos || ratio < best_ratio || (ratio == best_ratio && basis_[i] < basis_[leaving])) {
                    leaving = i;
                    best_ratio = ratio;
                }
            }
            if (leaving == npos) return false;
            pivot(leaving, entering);
        }
    }

    // y = c_B B^{-1}, read off the artificial block, in the sign-adjusted row space.
    std::vector<Rational> duals(const std::vector<Rational>& cost) const {
        std::vector<Rational> y(rows_, Rational(0));
        for (std::size_t i = 0; i < rows_; ++i) {
            const Rational& cb = cost[basis_[i]];
            if (cb == 0) continue;
            for (std::size_t k = 0; k < rows_; ++k) y[k] += cb * t_[i][cols_ + k];
        }
        return y;
    }

    Rational objective(const std::vector<Rational>& cost) const {
        Rational v = 0;
        for (std::size_t i = 0; i < rows_; ++i) v += cost[basis_[i]] * t_[i].back();
        return v;
    }

    // Pivots basic artificials out wherever a structural column can replace them;
    // rows where none can are redundant and keep their artificial at level zero.
    void expel_artificials() {
        for (std::size_t i = 0; i < rows_; ++i) {
            if (basis_[i] < cols_) continue;
            for (std::size_t j = 0; j < cols_; ++j) {
                if (t_[i][j] != 0) {
                    pivot(i, j);
                    break;
                }
            }
        }
    }

    std::vector<Rational> primal() const {
        std::vector<Rational> x(cols_, Rational(0));
        for (std::size_t i = 0; i < rows_; ++i) {
            if (basis_[i] < cols_) x[basis_[i]] = t_[i].back();
        }
        return x;
    }

    int row_sign(std::size_t i) const { return sign_[i]; }

  private:
    Rational reduced_cost(const std::vector<Rational>& cost, std::size_t j) const {
        Rational r = cost[j];
        for (std::size_t i = 0; i < rows_; ++i) {
            const Rational& cb = cost[basis_[i]];
            if (cb != 0 && t_[i][j] != 0) r -= cb * t_[i][j];
        }
        return r;
    }

    void pivot(std::size_t r, std::size_t c) {
        const Rational p = t_[r][c];
        for (auto& v : t_[r]) {
            if (v != 0) v /= p;
        }
        for (std::size_t i = 0; i < rows_; ++i) {
            if (i == r || t_[i][c] == 0) continue;
            const Rational f = t_[i][c];
            for (std::size_t k = 0; k < t_[i].size(); ++k) {
                if (t_[r][k] != 0) t_[i][k] -= f * t_[r][k];
            }
        }
        basis_[r] = c;
    }

    std::size_t rows_;
    std::size_t cols_;
    std::vector<std::vector<Rational>> t_;
    std::vector<int> sign_;
    std::vector<std::size_t> basis_;
};

} // namespace

Solution solve(const Problem& problem) {
    const std::size_t rows = problem.b.size();
    const std::size_t cols = problem.c.size();
    Tableau tableau(problem);

    // Phase 1: minimize the sum of artificials.
    std::vector<Rational> phase1(cols + rows, Rational(0));
    for (std::size_t i = 0; i < rows; ++i) phase1[cols + i] = 1;
    std::vector<bool> allowed(cols + rows, true);
    tableau.optimize(phase1, allowed);

    Solution out;
    if (tableau.objective(phase1) > 0) {
        // Phase-1 duals satisfy y.A <= 0 and y.b > 0; negate and undo row flips.
        const auto y = tableau.duals(phase1);
        out.status = Status::infeasible;
        out.farkas.resize(rows);
        for (std::size_t i = 0; i < rows; ++i) out.farkas[i] = -y[i] * tableau.row_sign(i);
        return out;
    }

    tableau.expel_artificials();
    std::vector<Rational> phase2(cols + rows, Rational(0));
    for (std::size_t j = 0; j < cols; ++j) phase2[j] = problem.c[j];
    for (std::size_t i = 0; i < rows; ++i) allowed[cols + i] = false;
    if (!tableau.optimize(phase2, allowed)) {
        out.status = Status::unbounded;
        out.x = tableau.primal();
        return out;
    }
    out.status = Status::optimal;
    out.x = tableau.primal();
    out.objective = tableau.objective(phase2);
    return out;
}

} // namespace condexp::lp
