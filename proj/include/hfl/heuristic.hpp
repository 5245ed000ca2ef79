#pragma once

#include "hfl/population.hpp"

namespace hfl {

// Where the leftover users go when a group does not divide evenly.
enum class RemainderPolicy { last_edge, round_robin };
// How a group smaller than its reachable set is spread.
enum class UndersizedPolicy { first_indices, least_loaded };

struct HeuristicConfig {
    RemainderPolicy remainder = RemainderPolicy::last_edge;
    UndersizedPolicy undersized = UndersizedPolicy::first_indices;
};

// Per group o with reachable edges n_1 < ... < n_rho:
//   rho | G_o      -> G_o/rho users to each
//   G_o > rho      -> floor(G_o/rho) to each, remainder per RemainderPolicy
//   G_o < rho      -> one user each to G_o edges per UndersizedPolicy
// Errors when a group reaches no edge.
Assignment equal_assign(const GroupSizes& sizes, const Topology& topo,
                        const HeuristicConfig& cfg = {});

// Sufficient optimality condition for the equal split: every group reaches
// every edge and every group size is divisible by the edge count.
struct EqualSplitCheck {
    bool ok = false;
    int group = -1;       // first witness when !ok
    std::string reason;
};
EqualSplitCheck equal_split_optimal(const GroupSizes& sizes, const Topology& topo);

}  // namespace hfl
