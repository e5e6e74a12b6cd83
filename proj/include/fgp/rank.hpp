#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace fgp {

/// Ranks of one weight vector under the lexicographic tie rule: among equal
/// weights the smaller index gets the higher (smaller-numbered) rank.
struct RankView {
    std::vector<std::size_t> rank;        ///< rank[i] in 1..n for stock index i
    std::vector<std::size_t> order;       ///< order[l - 1] = index holding rank l
    std::vector<double> sorted;           ///< weights in descending order
    std::vector<std::size_t> tie_counts;  ///< tie_counts[l - 1] = #indices whose weight equals sorted[l - 1]
};

/// Index permutation sorting `x` descending, ties kept in index order.
inline void rank_order_into(std::span<const double> x, std::vector<std::size_t>& order) {
    order.resize(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] > x[b]; });
}

inline RankView rank_view(std::span<const double> x) {
    RankView v;
    rank_order_into(x, v.order);
    const std::size_t n = x.size();
    v.rank.resize(n);
    v.sorted.resize(n);
    for (std::size_t l = 0; l < n; ++l) {
        v.rank[v.order[l]] = l + 1;
        v.sorted[l] = x[v.order[l]];
    }
    v.tie_counts.resize(n);
    for (std::size_t l = 0; l < n;) {
        std::size_t r = l;
        while (r < n && v.sorted[r] == v.sorted[l]) ++r;
        std::fill(v.tie_counts.begin() + static_cast<std::ptrdiff_t>(l),
                  v.tie_counts.begin() + static_cast<std::ptrdiff_t>(r), r - l);
        l = r;
    }
    return v;
}

} // namespace fgp
