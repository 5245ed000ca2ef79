#include "hfl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <queue>

#include "hfl/heuristic.hpp"

namespace hfl {

const char* solve_status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::feasible: return "feasible";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::node_limit: return "node_limit";
    }
    return "?";
}

std::optional<i64> default_equal_size(const Population& grp, const GroupSizes& sizes, int n_edges) {
    validate_group_shapes(grp, sizes);
    require(n_edges >= 1, "need at least one edge");
    i64 total = 0;
    for (i64 v : grp.counts.a) total += v;
    if (total % n_edges != 0) return std::nullopt;
    return total / n_edges;
}

namespace {

struct InstanceView {
    int C = 0, O = 0, N = 0;
    std::vector<std::vector<i64>> per_user;  // [o][c] counts carried by one user
    std::vector<i64> user_mass;              // row sums of per_user
    std::vector<std::vector<int>> reach;     // reachable edges per group, ascending
};

InstanceView make_view(const Population& grp, const GroupSizes& sizes, const Topology& topo) {
    validate_group_shapes(grp, sizes);
    require(topo.units() == grp.units(), "topology/population shape mismatch");
    InstanceView v;
    v.C = grp.classes();
    v.O = grp.units();
    v.N = topo.edges();
    require(v.N >= 1, "need at least one edge");
    v.per_user.resize(v.O);
    v.user_mass.assign(v.O, 0);
    v.reach.resize(v.O);
    for (int o = 0; o < v.O; ++o) {
        v.per_user[o] = per_user_column(grp, sizes, o);
        for (i64 c : v.per_user[o]) v.user_mass[o] += c;
        for (int n = 0; n < v.N; ++n)
            if (topo.reach(n, o)) v.reach[o].push_back(n);
        require(!v.reach[o].empty(), "group " + std::to_string(o) + " reaches no edge");
    }
    return v;
}

// C(g+k-1, k-1), saturating at cap+1
i64 composition_count(i64 g, int k, i64 cap) {
    i64 r = 1;
    for (int i = 1; i <= k - 1; ++i) {
        if (r > cap) return cap + 1;
        r = r * (g + i) / i;  // exact at each step: r holds C(g+i-1, i-1) * (g+i) / i
    }
    return std::min<i64>(r, cap + 1);
}

struct Enumerator {
    const InstanceView& v;
    const GroupSizes& sizes;
    std::optional<i64> S;
    Mat<i64> counts;       // C x N running
    std::vector<i64> mass; // per edge running
    Assignment y;
    Assignment best_y;
    double best = kInf;
    bool found = false;
    i64 leaves = 0;

    Enumerator(const InstanceView& view, const GroupSizes& sz, std::optional<i64> s)
        : v(view), sizes(sz), S(s) {
        counts = Mat<i64>(v.C, v.N, 0);
        mass.assign(v.N, 0);
        y.alloc = Mat<i64>(v.O, v.N, 0);
    }

    void place(int o, int n, i64 amt) {
        y.alloc(o, n) += amt;
        mass[n] += v.user_mass[o] * amt;
        for (int c = 0; c < v.C; ++c) counts(c, n) += v.per_user[o][c] * amt;
    }

    double leaf_theta() const {
        i64 total = 0;
        std::vector<i64> class_total(v.C, 0);
        for (int n = 0; n < v.N; ++n) {
            total += mass[n];
            for (int c = 0; c < v.C; ++c) class_total[c] += counts(c, n);
        }
        if (total == 0) return 0.0;
        i64 num = 0;
        for (int n = 0; n < v.N; ++n)
            for (int c = 0; c < v.C; ++c)
                num += std::abs(total * counts(c, n) - mass[n] * class_total[c]);
        return static_cast<double>(num) / (static_cast<double>(total) * static_cast<double>(total));
    }

    void groups(int o) {
        if (o == v.O) {
            if (S)
                for (int n = 0; n < v.N; ++n)
                    if (mass[n] != *S) return;
            ++leaves;
            const double th = leaf_theta();
            if (!found || th < best) {
                found = true;
                best = th;
                best_y = y;
            }
            return;
        }
        slots(o, 0, sizes.size[o]);
    }

    // lexicographic compositions of `left` users over group o's reachable slots
    void slots(int o, int si, i64 left) {
        const auto& r = v.reach[o];
        const int n = r[si];
        if (si == static_cast<int>(r.size()) - 1) {
            if (S && mass[n] + v.user_mass[o] * left > *S) return;
            place(o, n, left);
            groups(o + 1);
            place(o, n, -left);
            return;
        }
        for (i64 amt = 0; amt <= left; ++amt) {
            if (S && mass[n] + v.user_mass[o] * amt > *S) break;
            place(o, n, amt);
            slots(o, si + 1, left - amt);
            place(o, n, -amt);
        }
    }
};

int y_index(int o, int n, int N) { return o * N + n; }

// floor the LP point, then push dropped units back toward the per-edge target
std::pair<Assignment, double> round_repair(const InstanceView& v, const GroupSizes& sizes,
                                           i64 S, const std::vector<double>& x) {
    Assignment y;
    y.alloc = Mat<i64>(v.O, v.N, 0);
    std::vector<i64> mass(v.N, 0);
    Mat<i64> counts(v.C, v.N, 0);
    std::vector<i64> remaining(v.O);
    for (int o = 0; o < v.O; ++o) {
        i64 placed = 0;
        for (int n : v.reach[o]) {
            const double xv = x[y_index(o, n, v.N)];
            i64 amt = static_cast<i64>(std::floor(xv + 1e-6));
            amt = std::clamp<i64>(amt, 0, sizes.size[o] - placed);
            if (amt == 0) continue;
            y.alloc(o, n) = amt;
            placed += amt;
            mass[n] += v.user_mass[o] * amt;
            for (int c = 0; c < v.C; ++c) counts(c, n) += v.per_user[o][c] * amt;
        }
        remaining[o] = sizes.size[o] - placed;
    }

    auto theta_now = [&](int o_add, int n_add) {
        if (o_add >= 0) {
            mass[n_add] += v.user_mass[o_add];
            for (int c = 0; c < v.C; ++c) counts(c, n_add) += v.per_user[o_add][c];
        }
        i64 total = 0;
        std::vector<i64> class_total(v.C, 0);
        for (int n = 0; n < v.N; ++n) {
            total += mass[n];
            for (int c = 0; c < v.C; ++c) class_total[c] += counts(c, n);
        }
        double th = 0.0;
        if (total > 0) {
            i64 num = 0;
            for (int n = 0; n < v.N; ++n)
                for (int c = 0; c < v.C; ++c)
                    num += std::abs(total * counts(c, n) - mass[n] * class_total[c]);
            th = static_cast<double>(num) / (static_cast<double>(total) * static_cast<double>(total));
        }
        if (o_add >= 0) {
            mass[n_add] -= v.user_mass[o_add];
            for (int c = 0; c < v.C; ++c) counts(c, n_add) -= v.per_user[o_add][c];
        }
        return th;
    };

    for (;;) {
        int bo = -1, bn = -1;
        double bth = kInf;
        for (int o = 0; o < v.O; ++o) {
            if (remaining[o] == 0) continue;
            for (int n : v.reach[o]) {
                if (mass[n] + v.user_mass[o] > S) continue;  // never overshoot the target
                const double th = theta_now(o, n);
                if (th < bth) {
                    bth = th;
                    bo = o;
                    bn = n;
                }
            }
        }
        if (bo < 0) break;
        y.alloc(bo, bn) += 1;
        remaining[bo] -= 1;
        mass[bn] += v.user_mass[bo];
        for (int c = 0; c < v.C; ++c) counts(c, bn) += v.per_user[bo][c];
        bool done = true;
        for (int n = 0; n < v.N; ++n)
            if (mass[n] != S) done = false;
        if (done) break;
    }

    double slack = 0.0;
    for (int n = 0; n < v.N; ++n)
        slack = std::max(slack, std::fabs(static_cast<double>(mass[n] - S)));
    return {y, slack};
}

}  // namespace

SolveResult brute_force_optimal(const Population& grp, const GroupSizes& sizes,
                                const Topology& topo, std::optional<i64> equal_size,
                                i64 enum_guard) {
    const InstanceView v = make_view(grp, sizes, topo);

    i64 space = 1;
    for (int o = 0; o < v.O; ++o) {
        const i64 c = composition_count(sizes.size[o], static_cast<int>(v.reach[o].size()), enum_guard);
        if (c > enum_guard || space > enum_guard / c)
            fail("enumeration space exceeds guard of " + std::to_string(enum_guard) + " combinations");
        space *= c;
    }

    SolveResult res;
    if (equal_size) {
        require(*equal_size >= 1, "equal size target must be >= 1");
        i64 total = 0;
        for (int o = 0; o < v.O; ++o) total += v.user_mass[o] * sizes.size[o];
        if (total != *equal_size * v.N) {
            res.status = SolveStatus::infeasible;
            return res;
        }
    }

    Enumerator e(v, sizes, equal_size);
    e.groups(0);
    res.nodes_explored = e.leaves;
    if (!e.found) {
        res.status = SolveStatus::infeasible;
        return res;
    }
    res.status = SolveStatus::optimal;
    res.has_assignment = true;
    res.assignment = e.best_y;
    res.objective = e.best;
    res.lower_bound = e.best;
    return res;
}

LpModel build_epigraph_lp(const Population& grp, const GroupSizes& sizes,
                          const Topology& topo, i64 equal_size) {
    require(equal_size >= 1, "equal size target must be >= 1");
    const InstanceView v = make_view(grp, sizes, topo);
    const std::vector<double> p = global_distribution(grp);
    const double S = static_cast<double>(equal_size);

    LpModel m;
    for (int o = 0; o < v.O; ++o)
        for (int n = 0; n < v.N; ++n) {
            const bool ok = std::find(v.reach[o].begin(), v.reach[o].end(), n) != v.reach[o].end();
            m.add_col("y_" + std::to_string(o) + "_" + std::to_string(n), 0.0,
                      ok ? static_cast<double>(sizes.size[o]) : 0.0, 0.0);
        }
    for (int c = 0; c < v.C; ++c)
        for (int n = 0; n < v.N; ++n)
            m.add_col("mu_" + std::to_string(c) + "_" + std::to_string(n), 0.0, kInf, S / v.N);
    const int mu_base = v.O * v.N;

    for (int o = 0; o < v.O; ++o) {
        const int r = m.add_row("budget_" + std::to_string(o), RowSense::le,
                                static_cast<double>(sizes.size[o]));
        for (int n = 0; n < v.N; ++n) m.add_coef(r, y_index(o, n, v.N), 1.0);
    }
    for (int n = 0; n < v.N; ++n) {
        const int r = m.add_row("size_" + std::to_string(n), RowSense::eq, S);
        for (int o = 0; o < v.O; ++o)
            m.add_coef(r, y_index(o, n, v.N), static_cast<double>(v.user_mass[o]));
    }
    // mu_cn >= +-((1/S) sum_o per_user[o][c] y_on - p_c)
    for (int c = 0; c < v.C; ++c)
        for (int n = 0; n < v.N; ++n) {
            const int rp = m.add_row("absp_" + std::to_string(c) + "_" + std::to_string(n),
                                     RowSense::ge, -p[c]);
            const int rm = m.add_row("absm_" + std::to_string(c) + "_" + std::to_string(n),
                                     RowSense::ge, p[c]);
            m.add_coef(rp, mu_base + c * v.N + n, 1.0);
            m.add_coef(rm, mu_base + c * v.N + n, 1.0);
            for (int o = 0; o < v.O; ++o) {
                if (v.per_user[o][c] == 0) continue;
                const double a = static_cast<double>(v.per_user[o][c]) / S;
                m.add_coef(rp, y_index(o, n, v.N), -a);
                m.add_coef(rm, y_index(o, n, v.N), a);
            }
        }
    return m;
}

SolveResult relax_and_round(const Population& grp, const GroupSizes& sizes,
                            const Topology& topo, i64 equal_size) {
    const InstanceView v = make_view(grp, sizes, topo);
    const LpModel m = build_epigraph_lp(grp, sizes, topo, equal_size);
    const LpResult lp = solve_lp(m);
    SolveResult res;
    if (lp.status == LpStatus::infeasible) {
        res.status = SolveStatus::infeasible;
        return res;
    }
    require(lp.status == LpStatus::optimal, "LP relaxation did not solve to optimality");
    auto [y, slack] = round_repair(v, sizes, equal_size, lp.x);
    res.status = SolveStatus::feasible;
    res.has_assignment = true;
    res.assignment = y;
    res.objective = theta_from_counts(edge_counts(grp, sizes, y));
    res.lower_bound = lp.objective / static_cast<double>(equal_size);
    res.size_slack = slack;
    return res;
}

SolveResult branch_and_bound(const Population& grp, const GroupSizes& sizes,
                             const Topology& topo, i64 equal_size, const BnbOptions& opt) {
    const InstanceView v = make_view(grp, sizes, topo);
    require(equal_size >= 1, "equal size target must be >= 1");
    const LpModel base = build_epigraph_lp(grp, sizes, topo, equal_size);
    const int ny = v.O * v.N;
    const double S = static_cast<double>(equal_size);

    SolveResult res;
    double best = kInf;
    Assignment best_y;
    bool have_inc = false;

    auto offer = [&](const Assignment& y) {
        // incumbents must satisfy the equal-size constraint exactly
        const EdgeCounts ec = edge_counts(grp, sizes, y);
        for (i64 msn : ec.mass)
            if (msn != equal_size) return;
        const double th = theta_from_counts(ec);
        if (!have_inc || th < best) {
            have_inc = true;
            best = th;
            best_y = y;
        }
    };

    try {
        offer(equal_assign(sizes, topo));
    } catch (const std::exception&) {
        // unreachable group etc: no heuristic seed
    }

    struct Node {
        double bound;  // theta units, inherited from parent LP
        int parent;
        int var;        // branched column, -1 at root
        double nlo, nhi;
    };
    std::vector<Node> arena;
    arena.push_back({0.0, -1, -1, 0.0, 0.0});
    using QE = std::pair<double, int>;  // (bound, node id)
    std::priority_queue<QE, std::vector<QE>, std::greater<QE>> open;
    open.push({0.0, 0});

    LpModel work = base;
    i64 explored = 0;
    bool hit_limit = false;
    double open_min = kInf;

    while (!open.empty()) {
        if (explored >= opt.node_limit) {
            hit_limit = true;
            open_min = open.top().first;
            break;
        }
        const auto [nb, id] = open.top();
        open.pop();
        if (have_inc && nb >= best - 1e-9) continue;  // bound-dominated

        // materialize bounds along the ancestry chain
        work.lo = base.lo;
        work.hi = base.hi;
        for (int a = id; a >= 0; a = arena[a].parent) {
            if (arena[a].var < 0) continue;
            work.lo[arena[a].var] = std::max(work.lo[arena[a].var], arena[a].nlo);
            work.hi[arena[a].var] = std::min(work.hi[arena[a].var], arena[a].nhi);
        }

        ++explored;
        const LpResult lp = solve_lp(work);
        if (lp.status == LpStatus::infeasible) continue;
        require(lp.status == LpStatus::optimal, "node LP did not solve to optimality");
        const double bound = lp.objective / S;
        if (have_inc && bound >= best - 1e-9) continue;

        // most fractional Y variable; ties at the lowest (o, n)
        int bvar = -1;
        double bfrac = opt.int_tol;
        for (int j = 0; j < ny; ++j) {
            const double f = std::fabs(lp.x[j] - std::round(lp.x[j]));
            if (f > bfrac + 1e-12 && f > bfrac) {
                bfrac = f;
                bvar = j;
            }
        }
        if (bvar < 0) {
            // integral: verify and offer
            Assignment y;
            y.alloc = Mat<i64>(v.O, v.N, 0);
            bool sane = true;
            for (int o = 0; o < v.O && sane; ++o) {
                i64 row = 0;
                for (int n = 0; n < v.N; ++n) {
                    const i64 amt = static_cast<i64>(std::llround(lp.x[y_index(o, n, v.N)]));
                    if (amt < 0 || amt > sizes.size[o]) sane = false;
                    y.alloc(o, n) = std::max<i64>(amt, 0);
                    row += std::max<i64>(amt, 0);
                }
                if (row > sizes.size[o]) sane = false;
            }
            if (sane) offer(y);
            continue;
        }
        if (id == 0) {
            // root: LP rounding provides a second incumbent candidate
            auto [ry, slack] = round_repair(v, sizes, equal_size, lp.x);
            if (slack == 0.0) offer(ry);
        }
        const double xf = std::floor(lp.x[bvar]);
        const int down = static_cast<int>(arena.size());
        arena.push_back({bound, id, bvar, -kInf, xf});
        open.push({bound, down});
        const int up = static_cast<int>(arena.size());
        arena.push_back({bound, id, bvar, xf + 1.0, kInf});
        open.push({bound, up});
    }

    res.nodes_explored = explored;
    if (hit_limit) {
        res.status = SolveStatus::node_limit;
        res.lower_bound = have_inc ? std::min(open_min, best) : open_min;
    } else {
        res.status = have_inc ? SolveStatus::optimal : SolveStatus::infeasible;
        res.lower_bound = have_inc ? best : kInf;
    }
    if (have_inc) {
        res.has_assignment = true;
        res.assignment = best_y;
        res.objective = best;
    }
    return res;
}

Assignment random_assign(const GroupSizes& sizes, const Topology& topo, u64 seed) {
    const int O = static_cast<int>(sizes.size.size());
    const int N = topo.edges();
    require(topo.units() == O, "topology/sizes shape mismatch");
    Assignment y;
    y.alloc = Mat<i64>(O, N, 0);
    Rng rng(seed_mix({seed, 0x72616e64ull}));  // "rand"
    for (int o = 0; o < O; ++o) {
        std::vector<int> reach;
        for (int n = 0; n < N; ++n)
            if (topo.reach(n, o)) reach.push_back(n);
        require(!reach.empty(), "group " + std::to_string(o) + " reaches no edge");
        for (i64 i = 0; i < sizes.size[o]; ++i)
            y.alloc(o, reach[rng.below(reach.size())]) += 1;
    }
    return y;
}

}  // namespace hfl
