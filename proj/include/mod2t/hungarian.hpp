#pragma once

#include <limits>
#include <vector>

#include "mod2t/geometry.hpp"

namespace mod2t {

// O(n^3) min-cost assignment with row/column potentials. `cost` must have
// rows <= cols; returns for each row the assigned column.
inline std::vector<int> min_cost_assignment(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    if (n == 0) return {};
    const int m = static_cast<int>(cost[0].size());
    if (n > m) throw InvalidInput("min_cost_assignment: more rows than columns");
    constexpr double kInf = std::numeric_limits<double>::infinity();

    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, kInf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }

    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= m; ++j)
        if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

struct MatchPair {
    int a = -1;
    int b = -1;
    double overlap = 0.0;
};

struct MatchResult {
    std::vector<MatchPair> pairs;
    std::vector<int> unmatched_a;
    std::vector<int> unmatched_b;
};

// One-to-one gated IoU association. Maximizes the number of matched pairs
// first, total IoU second (a fixed per-pair bonus larger than any achievable
// IoU sum makes the count dominate).
inline MatchResult match_boxes_iou(const std::vector<BoundingBox>& a,
                                   const std::vector<BoundingBox>& b, double gate) {
    MatchResult res;
    const int na = static_cast<int>(a.size());
    const int nb = static_cast<int>(b.size());
    if (na == 0 || nb == 0) {
        for (int i = 0; i < na; ++i) res.unmatched_a.push_back(i);
        for (int j = 0; j < nb; ++j) res.unmatched_b.push_back(j);
        return res;
    }

    const int s = na + nb;
    const double bonus = s + 1.0;
    std::vector<std::vector<double>> cost(s, std::vector<double>(s, 0.0));
    std::vector<std::vector<double>> overlap(na, std::vector<double>(nb, 0.0));
    for (int i = 0; i < na; ++i) {
        for (int j = 0; j < nb; ++j) {
            const double v = iou(a[i], b[j]);
            overlap[i][j] = v;
            if (v >= gate) cost[i][j] = -(v + bonus);
        }
    }

    const std::vector<int> assign = min_cost_assignment(cost);
    std::vector<char> b_used(nb, 0);
    for (int i = 0; i < na; ++i) {
        const int j = assign[i];
        if (j >= 0 && j < nb && cost[i][j] < 0.0) {
            res.pairs.push_back({i, j, overlap[i][j]});
            b_used[j] = 1;
        } else {
            res.unmatched_a.push_back(i);
        }
    }
    for (int j = 0; j < nb; ++j)
        if (!b_used[j]) res.unmatched_b.push_back(j);
    return res;
}

}  // namespace mod2t
