#include "hfl/bound.hpp"

#include <cmath>

#include "hfl/kernels.hpp"

namespace hfl {

double jmax_at(const ModelShape& s, const std::vector<double>& w, const Dataset& pooled) {
    double best = 0.0;
    bool any = false;
    for (int c = 0; c < s.classes; ++c) {
        bool present = false;
        for (int i = 0; i < pooled.n && !present; ++i) present = pooled.y[i] == c;
        if (!present) continue;
        any = true;
        const std::vector<double> j = class_log_gradient(s, w, pooled, c);
        best = std::max(best, std::sqrt(kernels::dot(j.data(), j.data(), j.size())));
    }
    require(any, "no classes present in pooled data");
    return best;
}

std::vector<double> lipschitz_estimate(const ModelShape& s,
                                       const std::vector<std::vector<double>>& snapshots,
                                       const Dataset& pooled, double min_dw) {
    require(snapshots.size() >= 2, "need at least two snapshots");
    const size_t S = snapshots.size();
    std::vector<double> L(s.classes, 0.0);
    // per-class gradients once per snapshot, then all pairs
    std::vector<std::vector<std::vector<double>>> J(S);
    std::vector<bool> present(s.classes, false);
    for (int c = 0; c < s.classes; ++c)
        for (int i = 0; i < pooled.n && !present[c]; ++i) present[c] = pooled.y[i] == c;
    for (size_t t = 0; t < S; ++t) {
        J[t].resize(s.classes);
        for (int c = 0; c < s.classes; ++c)
            if (present[c]) J[t][c] = class_log_gradient(s, snapshots[t], pooled, c);
    }
    for (size_t a = 0; a < S; ++a)
        for (size_t b = a + 1; b < S; ++b) {
            const double dw = std::sqrt(kernels::l2_dist_sq(
                snapshots[a].data(), snapshots[b].data(), snapshots[a].size()));
            if (dw < min_dw) continue;
            for (int c = 0; c < s.classes; ++c) {
                if (!present[c]) continue;
                const double dj = std::sqrt(kernels::l2_dist_sq(
                    J[a][c].data(), J[b][c].data(), J[a][c].size()));
                L[c] = std::max(L[c], dj / dw);
            }
        }
    return L;
}

double growth_factor(double lr, const std::vector<double>& edge_dist,
                     const std::vector<double>& lipschitz) {
    require(edge_dist.size() == lipschitz.size(), "distribution/lipschitz length mismatch");
    double s = 0.0;
    for (size_t i = 0; i < edge_dist.size(); ++i) s += edge_dist[i] * lipschitz[i];
    return 1.0 + lr * s;
}

double divergence_bound(const BoundInputs& in, int m) {
    require(m >= 0, "round index must be >= 0");
    const int T = in.t_cloud;
    require(T >= 1, "t_cloud must be >= 1");
    const size_t N = in.r.size();
    require(in.growth.size() == N && in.dist_l1.size() == N, "per-edge input length mismatch");
    if (T == 1) return 0.0;

    bool skewed = false;
    for (double d : in.dist_l1)
        if (d > 0.0) skewed = true;
    if (!skewed) return 0.0;

    const long long need = static_cast<long long>(m) * T - 1;
    require(static_cast<long long>(in.jmax.size()) >= std::max(1LL, need),
            "jmax history too short: need " + std::to_string(std::max(1LL, need)) +
                " entries, have " + std::to_string(in.jmax.size()));

    auto jm = [&](long long idx) { return in.jmax[idx < 0 ? 0 : idx]; };

    // carry = sum_n r_n * growth_n^T, compounded per skipped sync window
    double carry = 0.0;
    for (size_t n = 0; n < N; ++n) carry += in.r[n] * std::pow(in.growth[n], T);

    double total = 0.0;
    for (int v = 0; v <= m; ++v) {
        double inner = 0.0;
        for (size_t n = 0; n < N; ++n) {
            if (in.dist_l1[n] == 0.0) continue;
            double acc = 0.0;
            for (int h = 0; h <= T - 2; ++h)
                acc += std::pow(in.growth[n], h + 1) *
                       jm(static_cast<long long>(m - v) * T - 2 - h);
            inner += in.r[n] * acc * in.dist_l1[n];
        }
        total += std::pow(carry, v) * in.lr * inner;
    }
    return total;
}

}  // namespace hfl
