#include "hfl/heuristic.hpp"

#include <algorithm>
#include <numeric>

namespace hfl {

Assignment equal_assign(const GroupSizes& sizes, const Topology& topo,
                        const HeuristicConfig& cfg) {
    const int O = static_cast<int>(sizes.size.size());
    const int N = topo.edges();
    require(topo.units() == O, "topology/sizes shape mismatch");
    require(N >= 1, "need at least one edge");

    Assignment y;
    y.alloc = Mat<i64>(O, N, 0);
    std::vector<i64> load(N, 0);  // users placed so far, for least_loaded
    int rr_cursor = 0;

    for (int o = 0; o < O; ++o) {
        std::vector<int> reach;
        for (int n = 0; n < N; ++n)
            if (topo.reach(n, o)) reach.push_back(n);
        const int rho = static_cast<int>(reach.size());
        require(rho > 0, "group " + std::to_string(o) + " reaches no edge");
        const i64 g = sizes.size[o];
        require(g >= 1, "group size must be >= 1");

        if (g % rho == 0) {
            for (int n : reach) y.alloc(o, n) = g / rho;
        } else if (g > rho) {
            for (int n : reach) y.alloc(o, n) = g / rho;
            const i64 rem = g % rho;
            if (cfg.remainder == RemainderPolicy::last_edge) {
                y.alloc(o, reach.back()) += rem;
            } else {
                y.alloc(o, reach[rr_cursor % rho]) += rem;
                ++rr_cursor;
            }
        } else {  // g < rho: one user to g of the reachable edges
            if (cfg.undersized == UndersizedPolicy::first_indices) {
                for (i64 i = 0; i < g; ++i) y.alloc(o, reach[i]) = 1;
            } else {
                std::vector<int> order(reach);
                std::stable_sort(order.begin(), order.end(),
                                 [&](int a, int b) { return load[a] < load[b]; });
                for (i64 i = 0; i < g; ++i) y.alloc(o, order[i]) = 1;
            }
        }
        for (int n : reach) load[n] += y.alloc(o, n);
    }
    return y;
}

EqualSplitCheck equal_split_optimal(const GroupSizes& sizes, const Topology& topo) {
    const int O = static_cast<int>(sizes.size.size());
    const int N = topo.edges();
    require(topo.units() == O, "topology/sizes shape mismatch");
    for (int o = 0; o < O; ++o) {
        for (int n = 0; n < N; ++n)
            if (!topo.reach(n, o))
                return {false, o, "group cannot reach edge " + std::to_string(n)};
        if (sizes.size[o] % N != 0)
            return {false, o, "group size " + std::to_string(sizes.size[o]) +
                                  " not divisible by " + std::to_string(N) + " edges"};
    }
    return {true, -1, ""};
}

}  // namespace hfl
