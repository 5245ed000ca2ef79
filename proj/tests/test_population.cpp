#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "hfl/population.hpp"

using namespace hfl;

namespace {

// Straight float recomputation of theta from its definition; the production
// path goes through exact integer arithmetic, so this is an independent check.
double theta_oracle(const EdgeCounts& ec) {
    if (ec.total == 0) return 0.0;
    const double M = static_cast<double>(ec.total);
    double th = 0.0;
    for (int n = 0; n < ec.counts.cols; ++n) {
        if (ec.mass[n] == 0) continue;
        const double mn = static_cast<double>(ec.mass[n]);
        double d = 0.0;
        for (int c = 0; c < ec.counts.rows; ++c)
            d += std::fabs(static_cast<double>(ec.counts(c, n)) / mn -
                           static_cast<double>(ec.class_total[c]) / M);
        th += (mn / M) * d;
    }
    return th;
}

Population group_pop(int classes, const std::vector<std::vector<i64>>& cols) {
    Population p;
    p.role = PopRole::group;
    p.counts = Mat<i64>(classes, static_cast<int>(cols.size()), 0);
    for (int o = 0; o < static_cast<int>(cols.size()); ++o)
        for (int c = 0; c < classes; ++c) p.counts(c, o) = cols[o][c];
    return p;
}

Topology full_reach(int edges, int units) {
    Topology t;
    t.reach = Mat<std::uint8_t>(edges, units, 1);
    return t;
}

// the 5-edge design: group o holds classes 2o, 2o+1, 10 users x 10 samples
struct Designed {
    Population grp;
    GroupSizes sizes;
    Topology topo;
};
Designed designed_scenario() {
    Designed d;
    std::vector<std::vector<i64>> cols(5, std::vector<i64>(10, 0));
    for (int o = 0; o < 5; ++o) {
        cols[o][2 * o] = 50;
        cols[o][2 * o + 1] = 50;
    }
    d.grp = group_pop(10, cols);
    d.sizes.size.assign(5, 10);
    d.topo = full_reach(5, 5);
    return d;
}

}  // namespace

TEST_CASE("global distribution from raw counts") {
    Population p;
    p.role = PopRole::user;
    p.counts = Mat<i64>(2, 2, 0);
    p.counts(0, 0) = 1;
    p.counts(1, 0) = 2;
    p.counts(0, 1) = 3;
    p.counts(1, 1) = 2;
    const std::vector<double> g = global_distribution(p);
    CHECK(g[0] == 0.5);
    CHECK(g[1] == 0.5);
}

TEST_CASE("population validation rejects malformed inputs") {
    Population one_class;
    one_class.counts = Mat<i64>(1, 2, 3);
    CHECK_THROWS(validate_population(one_class));

    Population neg;
    neg.counts = Mat<i64>(2, 1, 0);
    neg.counts(0, 0) = -1;
    neg.counts(1, 0) = 2;
    CHECK_THROWS(validate_population(neg));

    Population empty_col;
    empty_col.counts = Mat<i64>(2, 2, 0);
    empty_col.counts(0, 0) = 1;  // column 1 stays all-zero
    CHECK_THROWS(validate_population(empty_col));
}

TEST_CASE("per-user column requires divisibility") {
    Population grp = group_pop(2, {{4, 6}});
    GroupSizes sizes{{2}};
    const std::vector<i64> col = per_user_column(grp, sizes, 0);
    CHECK(col[0] == 2);
    CHECK(col[1] == 3);

    GroupSizes bad{{3}};  // 4 % 3 != 0
    CHECK_THROWS(per_user_column(grp, bad, 0));
}

TEST_CASE("l1 distance between distributions") {
    CHECK(distance_l1({0.5, 0.5}, {1.0, 0.0}) == 1.0);
    CHECK(distance_l1({0.25, 0.75}, {0.25, 0.75}) == 0.0);
    CHECK_THROWS(distance_l1({0.5}, {0.5, 0.0}));
}

TEST_CASE("designed home assignment scores 1.6 exactly") {
    const Designed d = designed_scenario();
    Assignment y;
    y.alloc = Mat<i64>(5, 5, 0);
    for (int o = 0; o < 5; ++o) y.alloc(o, o) = 10;

    const EdgeCounts ec = edge_counts(d.grp, d.sizes, y);
    CHECK(ec.total == 500);
    CHECK(ec.mass[2] == 100);
    CHECK(ec.counts(4, 2) == 50);

    const double th = theta_from_counts(ec);
    CHECK(th == 1.6);  // 400000 / 250000, both exactly representable
    CHECK(std::fabs(th - theta_oracle(ec)) <= 1e-12);

    const Objective obj = objective_theta(d.grp, d.sizes, y);
    CHECK(obj.theta == th);
    CHECK(obj.weights[0] == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(obj.per_edge_distance[0] == doctest::Approx(1.6).epsilon(1e-12));
}

TEST_CASE("uniform split of the designed scenario scores zero") {
    const Designed d = designed_scenario();
    Assignment y;
    y.alloc = Mat<i64>(5, 5, 2);  // every group spread evenly
    CHECK(theta_from_counts(edge_counts(d.grp, d.sizes, y)) == 0.0);
}

TEST_CASE("theta ignores zero-mass edges") {
    Population grp = group_pop(2, {{6, 6}});
    GroupSizes sizes{{6}};
    Assignment y;
    y.alloc = Mat<i64>(1, 3, 0);
    y.alloc(0, 0) = 3;
    y.alloc(0, 2) = 3;  // edge 1 stays empty
    const EdgeCounts ec = edge_counts(grp, sizes, y);
    CHECK(ec.mass[1] == 0);
    CHECK(theta_from_counts(ec) == 0.0);
    CHECK_THROWS(edge_distributions(grp, sizes, y));  // distributions do reject empty edges
}

TEST_CASE("theta matches the float oracle on random instances") {
    Rng rng(42);
    for (int it = 0; it < 200; ++it) {
        const int C = 2 + static_cast<int>(rng.below(4));
        const int O = 1 + static_cast<int>(rng.below(4));
        const int N = 1 + static_cast<int>(rng.below(4));
        std::vector<std::vector<i64>> cols(O, std::vector<i64>(C, 0));
        GroupSizes sizes;
        for (int o = 0; o < O; ++o) {
            for (int c = 0; c < C; ++c) cols[o][c] = static_cast<i64>(rng.below(5));
            if (*std::max_element(cols[o].begin(), cols[o].end()) == 0) cols[o][0] = 1;
            sizes.size.push_back(1);
        }
        const Population grp = group_pop(C, cols);
        Assignment y;
        y.alloc = Mat<i64>(O, N, 0);
        for (int o = 0; o < O; ++o) y.alloc(o, static_cast<int>(rng.below(N))) = 1;
        const EdgeCounts ec = edge_counts(grp, sizes, y);
        CHECK(std::fabs(theta_from_counts(ec) - theta_oracle(ec)) <= 1e-12);
    }
}

TEST_CASE("assignment validation flags the right problems") {
    Population grp = group_pop(2, {{2, 2}, {4, 0}});
    GroupSizes sizes{{2, 2}};
    Topology topo;
    topo.reach = Mat<std::uint8_t>(2, 2, 1);
    topo.reach(1, 1) = 0;  // group 1 cannot reach edge 1

    Assignment ok;
    ok.alloc = Mat<i64>(2, 2, 0);
    ok.alloc(0, 0) = 1;
    ok.alloc(0, 1) = 1;
    ok.alloc(1, 0) = 2;
    CHECK(validate_assignment(sizes, topo, ok).feasible());

    Assignment unreachable = ok;
    unreachable.alloc(1, 0) = 1;
    unreachable.alloc(1, 1) = 1;
    const ValidationReport r1 = validate_assignment(sizes, topo, unreachable);
    CHECK(!r1.feasible());
    CHECK(r1.violations[0].group == 1);
    CHECK(r1.violations[0].edge == 1);

    Assignment oversub = ok;
    oversub.alloc(0, 0) = 3;  // 3 + 1 > size 2
    CHECK(!validate_assignment(sizes, topo, oversub).feasible());

    Assignment partial = ok;
    partial.alloc(1, 0) = 1;  // one user of group 1 left out: reported, still feasible
    const ValidationReport r2 = validate_assignment(sizes, topo, partial);
    CHECK(r2.feasible());
    REQUIRE(r2.unassigned.size() == 1);
    CHECK(r2.unassigned[0].first == 1);
    CHECK(r2.unassigned[0].second == 1);
}

TEST_CASE("users merge into groups by counts and reachability") {
    // users 0 and 2 identical; user 1 differs by counts; user 3 by reach
    Population users;
    users.role = PopRole::user;
    users.counts = Mat<i64>(2, 4, 0);
    const i64 cols[4][2] = {{1, 1}, {2, 0}, {1, 1}, {1, 1}};
    for (int u = 0; u < 4; ++u)
        for (int c = 0; c < 2; ++c) users.counts(c, u) = cols[u][c];
    Topology topo = full_reach(2, 4);
    topo.reach(0, 3) = 0;

    const GroupedPopulation gp = group_users(users, topo);
    REQUIRE(gp.sizes.size.size() == 3);
    CHECK(gp.sizes.size[0] == 2);  // users 0, 2
    CHECK(gp.sizes.size[1] == 1);
    CHECK(gp.sizes.size[2] == 1);
    CHECK(gp.group_of == std::vector<int>({0, 1, 0, 2}));
    CHECK(gp.pop.counts(0, 0) == 2);  // per-group totals
    CHECK(gp.pop.counts(1, 0) == 2);
    CHECK(gp.topo.reach(0, 2) == 0);

    // expansion walks users ascending, edges ascending
    Assignment y;
    y.alloc = Mat<i64>(3, 2, 0);
    y.alloc(0, 0) = 1;
    y.alloc(0, 1) = 1;
    y.alloc(1, 0) = 1;
    y.alloc(2, 1) = 1;
    const UserAssignment ua = expand_assignment(gp, y);
    CHECK(ua.edge_of == std::vector<int>({0, 0, 1, 1}));

    // user-level recount equals the group-level count
    const EdgeCounts a = edge_counts(gp.pop, gp.sizes, y);
    const EdgeCounts b = edge_counts_users(users, ua.edge_of, 2);
    CHECK(a.counts == b.counts);
    CHECK(a.mass == b.mass);

    // leftover users surface as -1
    y.alloc(0, 1) = 0;
    const UserAssignment partial = expand_assignment(gp, y);
    CHECK(partial.edge_of == std::vector<int>({0, 0, -1, 1}));
}

TEST_CASE("user-level counting validates its inputs") {
    Population users;
    users.role = PopRole::user;
    users.counts = Mat<i64>(2, 2, 1);
    CHECK_THROWS(edge_counts_users(users, {0}, 2));      // wrong length
    CHECK_THROWS(edge_counts_users(users, {0, 5}, 2));   // edge out of range
    const EdgeCounts ec = edge_counts_users(users, {1, -1}, 2);  // -1 skipped
    CHECK(ec.total == 2);
    CHECK(ec.mass[1] == 2);
}
