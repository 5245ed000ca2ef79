#pragma once

#include "hfl/model.hpp"

namespace hfl {

// max_i ||J_i(w)||_2 where J_i is the per-class mean gradient of the true
// class log-probability; the max runs over classes present in `pooled`.
double jmax_at(const ModelShape& s, const std::vector<double>& w, const Dataset& pooled);

// Per-class curvature estimate: L_i = max over snapshot pairs of
// ||J_i(w) - J_i(w')|| / ||w - w'||, skipping pairs with ||w - w'|| < min_dw.
// Raw estimate: callers apply their own safety factor.
std::vector<double> lipschitz_estimate(const ModelShape& s,
                                       const std::vector<std::vector<double>>& snapshots,
                                       const Dataset& pooled, double min_dw = 1e-8);

// Per-edge growth factor 1 + lr * sum_i p_edge(i) * L_i.
double growth_factor(double lr, const std::vector<double>& edge_dist,
                     const std::vector<double>& lipschitz);

struct BoundInputs {
    std::vector<double> r;         // per-edge weights, sums to 1
    std::vector<double> growth;    // per-edge growth factors
    std::vector<double> dist_l1;   // per-edge L1 distance to the global mix
    std::vector<double> jmax;      // J_max along the centralized trajectory, per step
    int t_cloud = 1;               // edge rounds per cloud round
    double lr = 0.01;
};

// Upper bound on ||w_fed - w_central||_2 at cloud round m. Exactly zero when
// t_cloud == 1 or every edge matches the global mix. Trajectory indexes below
// step 0 clamp to 0; errors when jmax history is shorter than m*t_cloud - 1.
double divergence_bound(const BoundInputs& in, int m);

}  // namespace hfl
