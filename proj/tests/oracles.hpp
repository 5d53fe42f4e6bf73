#pragma once

// Independent reference implementations used only by tests. None of these
// share code paths with the library routines they check.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <tuple>
#include <vector>

#include "vatscope/core.hpp"
#include "vatscope/synth.hpp"

namespace oracle {

using vatscope::DissimilarityMatrix;

/// Symmetric matrix with i.i.d. uniform(0,1) off-diagonal entries.
inline DissimilarityMatrix random_dissim(std::size_t n, vatscope::SplitMix64& rng) {
    std::vector<double> v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) v[i * n + j] = v[j * n + i] = rng.uniform();
    return DissimilarityMatrix::from_values(n, std::move(v));
}

/// Seed vertex: smaller index of the lexicographically first maximum pair.
inline std::size_t furthest_pair_seed(const DissimilarityMatrix& m) {
    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = i + 1; j < m.size(); ++j) pairs.emplace_back(m(i, j), i, j);
    if (pairs.empty()) return 0;
    const double top = std::get<0>(*std::max_element(pairs.begin(), pairs.end()));
    std::size_t best_i = m.size(), best_j = m.size();
    for (auto [d, i, j] : pairs)
        if (d == top && std::tie(i, j) < std::tie(best_i, best_j)) std::tie(best_i, best_j) = std::tie(i, j);
    return best_i;
}

/// Edge-scanning Prim: each step takes the cheapest edge leaving the tree,
/// smallest new vertex on ties. O(n^3). Returns (vertex order, attach weights).
inline std::pair<std::vector<std::size_t>, std::vector<double>> prim(const DissimilarityMatrix& m, std::size_t seed) {
    const std::size_t n = m.size();
    std::vector<bool> in(n, false);
    std::vector<std::size_t> order{seed};
    std::vector<double> weights{0.0};
    in[seed] = true;
    while (order.size() < n) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t pick = n;
        for (std::size_t u : order)
            for (std::size_t v = 0; v < n; ++v) {
                if (in[v]) continue;
                if (m(u, v) < best || (m(u, v) == best && v < pick)) {
                    best = m(u, v);
                    pick = v;
                }
            }
        in[pick] = true;
        order.push_back(pick);
        weights.push_back(best);
    }
    return {order, weights};
}

/// Kruskal with union-find; total MST weight.
inline double kruskal_weight(const DissimilarityMatrix& m) {
    const std::size_t n = m.size();
    std::vector<std::tuple<double, std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(m(i, j), i, j);
    std::sort(edges.begin(), edges.end());
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    double total = 0.0;
    for (auto [w, i, j] : edges) {
        const auto a = find(i), b = find(j);
        if (a == b) continue;
        parent[a] = b;
        total += w;
    }
    return total;
}

/// Exhaustive Otsu from the raw pixel list: for every t, class sums are
/// accumulated pixel by pixel and the between-class variance
/// n0*n1*(mu0-mu1)^2 / N^2 is compared as the exact rational
/// (S0*n1 - S1*n0)^2 / (n0*n1). Smallest t wins ties. Returns -1 if no
/// threshold separates two non-empty classes. Valid for <= 4096 pixels.
inline int otsu_bruteforce(std::span<const std::uint8_t> px) {
    using i128 = __int128;
    int best_t = -1;
    i128 best_num = 0, best_den = 1;
    for (int t = 0; t < 256; ++t) {
        i128 n0 = 0, n1 = 0, s0 = 0, s1 = 0;
        for (auto p : px) {
            if (p <= t) {
                ++n0;
                s0 += p;
            } else {
                ++n1;
                s1 += p;
            }
        }
        if (n0 == 0 || n1 == 0) continue;
        const i128 diff = s0 * n1 - s1 * n0;
        const i128 num = diff * diff, den = n0 * n1;
        if (num == 0) continue;
        if (best_t < 0 || num * best_den > best_num * den) {
            best_t = t;
            best_num = num;
            best_den = den;
        }
    }
    return best_t;
}

}  // namespace oracle
