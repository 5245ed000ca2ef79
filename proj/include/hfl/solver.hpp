#pragma once

#include <optional>

#include "hfl/lp.hpp"
#include "hfl/population.hpp"

namespace hfl {

enum class SolveStatus { optimal, feasible, infeasible, node_limit };
const char* solve_status_name(SolveStatus s);

struct SolveResult {
    SolveStatus status = SolveStatus::infeasible;
    bool has_assignment = false;
    Assignment assignment;
    double objective = kInf;   // theta of `assignment` when present
    double lower_bound = 0.0;  // proven bound on theta (branch and bound)
    i64 nodes_explored = 0;
    double size_slack = 0.0;   // max |edge mass - S| left by LP rounding
};

// Per-edge mass target: total mass / edges when that is integral.
std::optional<i64> default_equal_size(const Population& grp, const GroupSizes& sizes, int n_edges);

// Exhaustive search over full assignments (every user placed, reachability
// respected); when equal_size is set only assignments hitting that per-edge
// mass exactly are kept. Errors when the enumeration space exceeds the guard.
SolveResult brute_force_optimal(const Population& grp, const GroupSizes& sizes,
                                const Topology& topo, std::optional<i64> equal_size,
                                i64 enum_guard = 10'000'000);

// LP relaxation of the equal-size assignment problem in epigraph form.
// Columns: Y (O*N, bounds [0,G_o], zero-fixed when unreachable) then mu (C*N).
// Rows: O budget rows, N equal-size rows, 2*C*N absolute-value rows.
// Objective (S/N)*sum(mu): at integer Y it equals S * theta.
LpModel build_epigraph_lp(const Population& grp, const GroupSizes& sizes,
                          const Topology& topo, i64 equal_size);

struct BnbOptions {
    i64 node_limit = 100000;
    double int_tol = 1e-6;
};

// Best-bound branch and bound over the epigraph LP; branches on the most
// fractional Y variable (ties: lowest (o, n)). The equal-split heuristic
// seeds the incumbent when it satisfies the equal-size constraint.
SolveResult branch_and_bound(const Population& grp, const GroupSizes& sizes,
                             const Topology& topo, i64 equal_size,
                             const BnbOptions& opt = {});

// LP relaxation, floor, then greedily re-add the dropped units into reachable
// cells that keep edge masses at or below S, preferring the placement with
// the lowest resulting theta. Residual |mass - S| gap reported as size_slack.
SolveResult relax_and_round(const Population& grp, const GroupSizes& sizes,
                            const Topology& topo, i64 equal_size);

// Every user of every group independently lands on a uniformly random
// reachable edge. Deterministic for a given seed.
Assignment random_assign(const GroupSizes& sizes, const Topology& topo, u64 seed);

}  // namespace hfl
