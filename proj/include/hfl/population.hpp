#pragma once

#include <optional>
#include <utility>

#include "hfl/common.hpp"

namespace hfl {

enum class PopRole { user, group };

// counts(c, k): number of class-c samples held by unit k.
// Units are users (role=user) or groups (role=group). A group column stores
// the PER-GROUP TOTAL; each of its G_o members carries counts/G_o, which must
// be an integer vector (checked wherever a group population meets its sizes).
struct Population {
    PopRole role = PopRole::user;
    Mat<i64> counts;  // C x K

    int classes() const { return counts.rows; }
    int units() const { return counts.cols; }
};

struct GroupSizes {
    std::vector<i64> size;  // G_o >= 1
};

// reach(n, k) != 0 iff unit k may be assigned to edge n.
struct Topology {
    Mat<std::uint8_t> reach;  // N x K
    int edges() const { return reach.rows; }
    int units() const { return reach.cols; }
};

// alloc(o, n): users of group o assigned to edge n (the integer decision matrix).
struct Assignment {
    Mat<i64> alloc;  // O x N
};

// User-level expansion: edge index per user, -1 when unassigned.
struct UserAssignment {
    std::vector<int> edge_of;
    Mat<std::uint8_t> to_matrix(int n_edges) const;  // U x N binary
};

struct GroupedPopulation {
    Population pop;  // role=group
    GroupSizes sizes;
    Topology topo;              // N x O
    std::vector<int> group_of;  // user -> group
};

void validate_population(const Population& p);
void validate_group_shapes(const Population& grp, const GroupSizes& sizes);

// counts/G_o for group o; errors when any entry is not divisible
std::vector<i64> per_user_column(const Population& grp, const GroupSizes& sizes, int o);

std::vector<double> global_distribution(const Population& p);

// total variation style L1 distance between two distributions, in [0, 2]
double distance_l1(const std::vector<double>& a, const std::vector<double>& b);

// Integer class counts landing on each edge under an assignment.
struct EdgeCounts {
    Mat<i64> counts;              // C x N
    std::vector<i64> mass;        // per-edge totals
    std::vector<i64> class_total; // per-class totals over assigned mass
    i64 total = 0;                // assigned mass
};
EdgeCounts edge_counts(const Population& grp, const GroupSizes& sizes, const Assignment& y);

// Same, from a user-level population and per-user edge indices (-1 skipped).
EdgeCounts edge_counts_users(const Population& users, const std::vector<int>& edge_of, int n_edges);

// theta = sum_n r_n * ||p_edge_n - p_global||_1 over assigned mass, computed as
// sum_{n,c} |M*k_cn - m_n*K_c| / M^2 in exact int64 arithmetic. Zero-mass edges
// contribute zero (their weight is zero).
double theta_from_counts(const EdgeCounts& ec);

// column n = class distribution of edge n's virtual dataset; errors on an empty edge
Mat<double> edge_distributions(const Population& grp, const GroupSizes& sizes, const Assignment& y);

// r_n = assigned mass on edge n / total assigned mass
std::vector<double> edge_weights(const Population& grp, const GroupSizes& sizes, const Assignment& y);

struct Objective {
    double theta = 0.0;
    std::vector<double> per_edge_distance;
    std::vector<double> weights;
};
Objective objective_theta(const Population& grp, const GroupSizes& sizes, const Assignment& y);

struct Violation {
    std::string what;
    int group = -1;
    int edge = -1;
};
struct ValidationReport {
    std::vector<Violation> violations;
    std::vector<std::pair<int, i64>> unassigned;  // (group, users left out)
    bool feasible() const { return violations.empty(); }
};
ValidationReport validate_assignment(const GroupSizes& sizes, const Topology& topo, const Assignment& y);

// Merge users with identical count columns AND identical reachability into
// groups, ordered by first occurrence (ascending user index).
GroupedPopulation group_users(const Population& users, const Topology& user_topo);

// Deterministic user-level expansion of a group assignment: users of each
// group taken ascending, edges filled ascending. Leftover users stay -1.
UserAssignment expand_assignment(const GroupedPopulation& gp, const Assignment& y);

}  // namespace hfl
