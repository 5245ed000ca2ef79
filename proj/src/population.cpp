#include "hfl/population.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>

#include "hfl/kernels.hpp"

namespace hfl {

Mat<std::uint8_t> UserAssignment::to_matrix(int n_edges) const {
    Mat<std::uint8_t> x(static_cast<int>(edge_of.size()), n_edges, 0);
    for (int u = 0; u < x.rows; ++u) {
        if (edge_of[u] >= 0) {
            require(edge_of[u] < n_edges, "to_matrix: edge index out of range");
            x(u, edge_of[u]) = 1;
        }
    }
    return x;
}

void validate_population(const Population& p) {
    require(!p.counts.empty(), "empty population");
    require(p.counts.rows >= 2, "population needs at least 2 classes");
    for (int c = 0; c < p.counts.rows; ++c)
        for (int k = 0; k < p.counts.cols; ++k)
            require(p.counts(c, k) >= 0, "negative sample count");
    for (int k = 0; k < p.counts.cols; ++k) {
        i64 s = 0;
        for (int c = 0; c < p.counts.rows; ++c) s += p.counts(c, k);
        require(s > 0, "unit " + std::to_string(k) + " holds no samples");
    }
}

void validate_group_shapes(const Population& grp, const GroupSizes& sizes) {
    require(grp.role == PopRole::group, "expected a group population");
    validate_population(grp);
    require(static_cast<int>(sizes.size.size()) == grp.units(),
            "sizes/population shape mismatch");
    for (i64 g : sizes.size) require(g >= 1, "group size must be >= 1");
}

std::vector<i64> per_user_column(const Population& grp, const GroupSizes& sizes, int o) {
    require(o >= 0 && o < grp.units(), "group index out of range");
    const i64 g = sizes.size[o];
    std::vector<i64> col(grp.classes());
    for (int c = 0; c < grp.classes(); ++c) {
        const i64 v = grp.counts(c, o);
        require(v % g == 0, "group " + std::to_string(o) +
                                " class " + std::to_string(c) +
                                " count not divisible by its size");
        col[c] = v / g;
    }
    return col;
}

std::vector<double> global_distribution(const Population& p) {
    validate_population(p);
    std::vector<double> dist(p.classes(), 0.0);
    i64 total = 0;
    for (int c = 0; c < p.classes(); ++c)
        for (int k = 0; k < p.units(); ++k) total += p.counts(c, k);
    for (int c = 0; c < p.classes(); ++c) {
        i64 s = 0;
        for (int k = 0; k < p.units(); ++k) s += p.counts(c, k);
        dist[c] = static_cast<double>(s) / static_cast<double>(total);
    }
    return dist;
}

double distance_l1(const std::vector<double>& a, const std::vector<double>& b) {
    require(a.size() == b.size(), "distance_l1: length mismatch");
    return kernels::l1_dist(a.data(), b.data(), a.size());
}

EdgeCounts edge_counts(const Population& grp, const GroupSizes& sizes, const Assignment& y) {
    validate_group_shapes(grp, sizes);
    require(y.alloc.rows == grp.units(), "assignment rows != group count");
    require(y.alloc.cols >= 1, "assignment needs at least one edge");
    const int C = grp.classes(), O = grp.units(), N = y.alloc.cols;

    EdgeCounts ec;
    ec.counts = Mat<i64>(C, N, 0);
    ec.mass.assign(N, 0);
    ec.class_total.assign(C, 0);
    for (int o = 0; o < O; ++o) {
        const std::vector<i64> per_user = per_user_column(grp, sizes, o);
        for (int n = 0; n < N; ++n) {
            const i64 users = y.alloc(o, n);
            require(users >= 0, "negative assignment entry");
            if (users == 0) continue;
            for (int c = 0; c < C; ++c) ec.counts(c, n) += per_user[c] * users;
        }
    }
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c) {
            ec.mass[n] += ec.counts(c, n);
            ec.class_total[c] += ec.counts(c, n);
            ec.total += ec.counts(c, n);
        }
    return ec;
}

EdgeCounts edge_counts_users(const Population& users, const std::vector<int>& edge_of, int n_edges) {
    validate_population(users);
    require(static_cast<int>(edge_of.size()) == users.units(),
            "edge_counts_users: one edge index per user expected");
    require(n_edges >= 1, "edge_counts_users: need at least one edge");
    const int C = users.classes();

    EdgeCounts ec;
    ec.counts = Mat<i64>(C, n_edges, 0);
    ec.mass.assign(n_edges, 0);
    ec.class_total.assign(C, 0);
    for (int u = 0; u < users.units(); ++u) {
        const int n = edge_of[u];
        if (n < 0) continue;
        require(n < n_edges, "edge_counts_users: edge index out of range");
        for (int c = 0; c < C; ++c) {
            const i64 k = users.counts(c, u);
            ec.counts(c, n) += k;
            ec.mass[n] += k;
            ec.class_total[c] += k;
            ec.total += k;
        }
    }
    return ec;
}

double theta_from_counts(const EdgeCounts& ec) {
    const i64 M = ec.total;
    if (M == 0) return 0.0;
    i64 num = 0;  // sum |M*k_cn - m_n*K_c|; exact while M*k stays in int64
    for (int n = 0; n < ec.counts.cols; ++n)
        for (int c = 0; c < ec.counts.rows; ++c)
            num += std::abs(M * ec.counts(c, n) - ec.mass[n] * ec.class_total[c]);
    return static_cast<double>(num) / (static_cast<double>(M) * static_cast<double>(M));
}

Mat<double> edge_distributions(const Population& grp, const GroupSizes& sizes, const Assignment& y) {
    const EdgeCounts ec = edge_counts(grp, sizes, y);
    Mat<double> dist(ec.counts.rows, ec.counts.cols, 0.0);
    for (int n = 0; n < ec.counts.cols; ++n) {
        require(ec.mass[n] > 0, "empty edge " + std::to_string(n));
        for (int c = 0; c < ec.counts.rows; ++c)
            dist(c, n) = static_cast<double>(ec.counts(c, n)) / static_cast<double>(ec.mass[n]);
    }
    return dist;
}

std::vector<double> edge_weights(const Population& grp, const GroupSizes& sizes, const Assignment& y) {
    const EdgeCounts ec = edge_counts(grp, sizes, y);
    require(ec.total > 0, "no assigned mass");
    std::vector<double> w(ec.mass.size());
    for (size_t n = 0; n < w.size(); ++n)
        w[n] = static_cast<double>(ec.mass[n]) / static_cast<double>(ec.total);
    return w;
}

Objective objective_theta(const Population& grp, const GroupSizes& sizes, const Assignment& y) {
    const EdgeCounts ec = edge_counts(grp, sizes, y);
    require(ec.total > 0, "no assigned mass");
    const int C = ec.counts.rows, N = ec.counts.cols;
    Objective obj;
    obj.per_edge_distance.resize(N);
    obj.weights.resize(N);
    const double M = static_cast<double>(ec.total);
    for (int n = 0; n < N; ++n) {
        require(ec.mass[n] > 0, "empty edge " + std::to_string(n));
        obj.weights[n] = static_cast<double>(ec.mass[n]) / M;
        double d = 0.0;
        for (int c = 0; c < C; ++c)
            d += std::fabs(static_cast<double>(ec.counts(c, n)) / static_cast<double>(ec.mass[n]) -
                           static_cast<double>(ec.class_total[c]) / M);
        obj.per_edge_distance[n] = d;
    }
    obj.theta = theta_from_counts(ec);
    return obj;
}

ValidationReport validate_assignment(const GroupSizes& sizes, const Topology& topo, const Assignment& y) {
    ValidationReport rep;
    const int O = static_cast<int>(sizes.size.size());
    const int N = topo.edges();
    if (y.alloc.rows != O || y.alloc.cols != N) {
        rep.violations.push_back({"assignment shape mismatch", -1, -1});
        return rep;
    }
    for (int o = 0; o < O; ++o) {
        i64 row = 0;
        for (int n = 0; n < N; ++n) {
            const i64 v = y.alloc(o, n);
            if (v < 0) rep.violations.push_back({"negative allocation", o, n});
            if (v > 0 && !topo.reach(n, o))
                rep.violations.push_back({"allocation to unreachable edge", o, n});
            row += std::max<i64>(v, 0);
        }
        if (row > sizes.size[o])
            rep.violations.push_back({"allocation exceeds group size", o, -1});
        else if (row < sizes.size[o])
            rep.unassigned.emplace_back(o, sizes.size[o] - row);
    }
    return rep;
}

GroupedPopulation group_users(const Population& users, const Topology& user_topo) {
    require(users.role == PopRole::user, "group_users expects a user population");
    validate_population(users);
    require(user_topo.units() == users.units(), "topology/population shape mismatch");
    const int C = users.classes(), U = users.units(), N = user_topo.edges();
    require(N >= 1, "need at least one edge");

    // key = count column ++ reach column; first-occurrence order
    std::map<std::vector<i64>, int> seen;
    GroupedPopulation gp;
    gp.group_of.assign(U, -1);
    std::vector<std::vector<i64>> keys;
    std::vector<i64> members;
    for (int u = 0; u < U; ++u) {
        std::vector<i64> key(C + N);
        for (int c = 0; c < C; ++c) key[c] = users.counts(c, u);
        for (int n = 0; n < N; ++n) key[C + n] = user_topo.reach(n, u) ? 1 : 0;
        auto it = seen.find(key);
        if (it == seen.end()) {
            it = seen.emplace(key, static_cast<int>(keys.size())).first;
            keys.push_back(key);
            members.push_back(0);
        }
        gp.group_of[u] = it->second;
        members[it->second] += 1;
    }
    const int O = static_cast<int>(keys.size());
    gp.pop.role = PopRole::group;
    gp.pop.counts = Mat<i64>(C, O, 0);
    gp.sizes.size = members;
    gp.topo.reach = Mat<std::uint8_t>(N, O, 0);
    for (int o = 0; o < O; ++o) {
        for (int c = 0; c < C; ++c) gp.pop.counts(c, o) = keys[o][c] * members[o];
        for (int n = 0; n < N; ++n) gp.topo.reach(n, o) = static_cast<std::uint8_t>(keys[o][C + n]);
    }
    return gp;
}

UserAssignment expand_assignment(const GroupedPopulation& gp, const Assignment& y) {
    const int O = gp.pop.units();
    const int N = y.alloc.cols;
    require(y.alloc.rows == O, "assignment rows != group count");
    const int U = static_cast<int>(gp.group_of.size());

    std::vector<i64> row_sum(O, 0);
    for (int o = 0; o < O; ++o) {
        for (int n = 0; n < N; ++n) {
            require(y.alloc(o, n) >= 0, "negative allocation");
            row_sum[o] += y.alloc(o, n);
        }
        require(row_sum[o] <= gp.sizes.size[o], "allocation exceeds group size");
    }

    UserAssignment ua;
    ua.edge_of.assign(U, -1);
    // cursor(o, n): how many of group o's users already routed to edge n
    Mat<i64> handed(O, N, 0);
    std::vector<int> next_edge(O, 0);
    for (int u = 0; u < U; ++u) {
        const int o = gp.group_of[u];
        int n = next_edge[o];
        while (n < N && handed(o, n) >= y.alloc(o, n)) ++n;
        next_edge[o] = n;
        if (n < N) {
            handed(o, n) += 1;
            ua.edge_of[u] = n;
        }
    }
    return ua;
}

}  // namespace hfl
