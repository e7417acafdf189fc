#pragma once

#include "condexp/rational.hpp"

#include <cstddef>
#include <vector>

namespace condexp::detail {

/// Rank of a rational matrix given as rows (destroys its argument).
inline std::size_t rank(std::vector<std::vector<Rational>> rows) {
    if (rows.empty()) return 0;
    const std::size_t cols = rows.front().size();
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows.size(); ++c) {
        std::size_t pivot = r;
        while (pivot < rows.size() && rows[pivot][c] == 0) ++pivot;
        if (pivot == rows.size()) continue;
        std::swap(rows[r], rows[pivot]);
        for (std::size_t i = r + 1; i < rows.size(); ++i) {
            if (rows[i][c] == 0) continue;
            const Rational factor = rows[i][c] / rows[r][c];
            for (std::size_t k = c; k < cols; ++k) rows[i][k] -= factor * rows[r][k];
        }
        ++r;
    }
    return r;
}

/// Affine rank of a point set: rank of differences to the first point.
inline std::size_t affine_rank(const std::vector<std::vector<Rational>>& points) {
    if (points.size() < 2) return 0;
    std::vector<std::vector<Rational>> diffs;
    diffs.reserve(points.size() - 1);
    for (std::size_t i = 1; i < points.size(); ++i) {
        std::vector<Rational> d(points[i].size());
        for (std::size_t k = 0; k < d.size(); ++k) d[k] = points[i][k] - points[0][k];
        diffs.push_back(std::move(d));
    }
    return rank(std::move(diffs));
}

} // namespace condexp::detail
