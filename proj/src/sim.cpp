#include "hfl/sim.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "hfl/kernels.hpp"

namespace hfl {

namespace {

constexpr u64 kUserTag = 0x75736572ull;            // stream id: per-user batches
constexpr u64 kCentralTag = 0x63656e7472616cull;   // stream id: twin batches

std::vector<int> sample_batch(u64 seed, int n, int count) {
    Rng rng(seed);
    std::vector<int> idx(static_cast<size_t>(count));
    for (int j = 0; j < count; ++j) idx[j] = static_cast<int>(rng.below(static_cast<u64>(n)));
    return idx;
}

void sgd_step(const ModelShape& s, std::vector<double>& w, const Dataset& data, double lr,
              const std::vector<int>& idx) {
    std::vector<double> g = gradient(s, w, data, idx);
    kernels::axpy(-lr, g.data(), w.data(), w.size());
}

void format_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    out += buf;
}

struct BoundTrace {
    std::vector<std::vector<double>> snapshots;  // twin weights, one per step, plus final
    std::vector<double> jmax;                    // J_max at each pre-step snapshot
};

}  // namespace

const char* TrainLog::csv_header() { return "round,loss,accuracy,divergence,theta,bound"; }

void TrainLog::write_csv(std::ostream& os) const {
    std::string line;
    os << csv_header() << '\n';
    for (const RoundRecord& r : rows) {
        line.clear();
        line += std::to_string(r.round);
        line += ',';
        format_double(line, r.loss);
        line += ',';
        format_double(line, r.accuracy);
        line += ',';
        format_double(line, r.divergence);
        line += ',';
        format_double(line, r.theta);
        line += ',';
        if (r.bound) format_double(line, *r.bound);
        line += '\n';
        os << line;
    }
}

std::vector<double> aggregate(const std::vector<std::vector<double>>& models,
                              const std::vector<i64>& sizes) {
    require(!models.empty() && models.size() == sizes.size(), "aggregate: size mismatch");
    i64 total = 0;
    for (size_t k = 0; k < sizes.size(); ++k) {
        require(sizes[k] > 0, "aggregate: sizes must be positive");
        require(models[k].size() == models[0].size(), "aggregate: ragged models");
        total += sizes[k];
    }
    std::vector<double> out(models[0].size(), 0.0);
    for (size_t k = 0; k < models.size(); ++k) {
        const double wk = static_cast<double>(sizes[k]) / static_cast<double>(total);
        kernels::axpy(wk, models[k].data(), out.data(), out.size());
    }
    return out;
}

TrainLog run_hfl(const HflScenario& sc, const SimConfig& cfg) {
    require(sc.user_data && sc.users && sc.assignment && sc.test, "run_hfl: missing scenario inputs");
    const std::vector<Dataset>& uds = *sc.user_data;
    const Population& pop = *sc.users;
    const std::vector<int>& edge_of = sc.assignment->edge_of;
    const int N = sc.n_edges;
    const int U = pop.units();
    require(pop.role == PopRole::user, "run_hfl: population must be user-level");
    require(static_cast<int>(uds.size()) == U, "run_hfl: dataset count != user count");
    require(static_cast<int>(edge_of.size()) == U, "run_hfl: assignment size != user count");
    require(N >= 1, "run_hfl: need at least one edge");
    require(cfg.rounds >= 1 && cfg.t_cloud >= 1 && cfg.t_edge >= 1 && cfg.eval_every >= 1,
            "run_hfl: bad schedule");
    require(cfg.lr > 0.0, "run_hfl: lr must be positive");
    if (cfg.compute_bound)
        require(cfg.t_edge == 1, "run_hfl: the divergence bound assumes per-step edge syncing");

    const int C = pop.classes();
    const ModelShape& s = cfg.model;
    require(s.classes == C, "run_hfl: model class count != population class count");

    std::vector<std::vector<int>> members(static_cast<size_t>(N));
    std::vector<int> assigned;
    for (int u = 0; u < U; ++u) {
        if (edge_of[u] < 0) continue;
        require(edge_of[u] < N, "run_hfl: edge index out of range");
        i64 col_mass = 0;
        for (int c = 0; c < C; ++c) col_mass += pop.counts(c, u);
        require(col_mass == uds[u].n, "run_hfl: population counts disagree with user data");
        members[edge_of[u]].push_back(u);
        assigned.push_back(u);
    }
    require(!assigned.empty(), "run_hfl: no user is assigned to any edge");

    // Pooled training data: assigned users, ascending. The twin trains here and
    // the logged loss is measured here.
    Dataset pooled;
    pooled.d = uds[assigned[0]].d;
    for (int u : assigned) {
        require(uds[u].d == pooled.d, "run_hfl: feature dim mismatch");
        for (int i = 0; i < uds[u].n; ++i) pooled.push(uds[u].row(i), uds[u].y[i]);
    }

    // Edge class counts under this assignment; drives theta and the bound inputs.
    const EdgeCounts ec = edge_counts_users(pop, edge_of, N);
    const double theta = theta_from_counts(ec);

    std::vector<std::vector<double>> w_user(static_cast<size_t>(U));
    std::vector<double> w_c = init_weights(s, cfg.seed);
    for (int u : assigned) w_user[u] = w_c;
    std::vector<double> w_f = w_c;

    BoundTrace trace;
    TrainLog log;
    i64 t = 0;
    for (int m = 1; m <= cfg.rounds; ++m) {
        for (int er = 0; er < cfg.t_cloud; ++er) {
            for (int ls = 0; ls < cfg.t_edge; ++ls) {
                ++t;
                if (cfg.compute_bound) {
                    trace.snapshots.push_back(w_c);
                    trace.jmax.push_back(jmax_at(s, w_c, pooled));
                }
                for (int u : assigned) {
                    std::vector<int> idx;
                    if (cfg.batch_mode == BatchMode::minibatch)
                        idx = sample_batch(seed_mix({cfg.seed, kUserTag, static_cast<u64>(u),
                                                     static_cast<u64>(t)}),
                                           uds[u].n, cfg.batch_size);
                    sgd_step(s, w_user[u], uds[u], cfg.lr, idx);
                }
                std::vector<int> cidx;
                if (cfg.batch_mode == BatchMode::minibatch)
                    cidx = sample_batch(seed_mix({cfg.seed, kCentralTag, static_cast<u64>(t)}),
                                        pooled.n, cfg.batch_size * N);
                sgd_step(s, w_c, pooled, cfg.lr, cidx);
            }
            for (int n = 0; n < N; ++n) {
                if (members[n].empty()) continue;
                std::vector<std::vector<double>> ws;
                std::vector<i64> sz;
                for (int u : members[n]) {
                    ws.push_back(w_user[u]);
                    sz.push_back(uds[u].n);
                }
                std::vector<double> we = aggregate(ws, sz);
                for (int u : members[n]) w_user[u] = we;
            }
        }
        std::vector<std::vector<double>> ws;
        std::vector<i64> sz;
        for (int n = 0; n < N; ++n) {
            if (members[n].empty()) continue;
            ws.push_back(w_user[members[n][0]]);
            sz.push_back(ec.mass[n]);
        }
        w_f = aggregate(ws, sz);
        for (int u : assigned) w_user[u] = w_f;

        if (m % cfg.eval_every == 0 || m == cfg.rounds) {
            RoundRecord row;
            row.round = m;
            row.loss = loss(s, w_f, pooled);
            row.accuracy = accuracy(s, w_f, *sc.test);
            row.divergence = std::sqrt(kernels::l2_dist_sq(w_f.data(), w_c.data(), w_f.size()));
            row.theta = theta;
            row.weight_hash = hash_bytes(w_f.data(), w_f.size() * sizeof(double));
            log.rows.push_back(row);
        }
    }
    log.final_weights = w_f;

    if (cfg.compute_bound) {
        trace.snapshots.push_back(w_c);
        std::vector<double> lip = lipschitz_estimate(s, trace.snapshots, pooled);
        kernels::scal(cfg.lipschitz_safety, lip.data(), lip.size());

        BoundInputs in;
        in.t_cloud = cfg.t_cloud;
        in.lr = cfg.lr;
        in.jmax = trace.jmax;
        in.r.assign(static_cast<size_t>(N), 0.0);
        in.growth.assign(static_cast<size_t>(N), 1.0);
        in.dist_l1.assign(static_cast<size_t>(N), 0.0);
        std::vector<double> global(static_cast<size_t>(C));
        for (int c = 0; c < C; ++c)
            global[c] = static_cast<double>(ec.class_total[c]) / static_cast<double>(ec.total);
        for (int n = 0; n < N; ++n) {
            if (ec.mass[n] == 0) continue;
            std::vector<double> dist(static_cast<size_t>(C));
            for (int c = 0; c < C; ++c)
                dist[c] = static_cast<double>(ec.counts(c, n)) / static_cast<double>(ec.mass[n]);
            in.r[n] = static_cast<double>(ec.mass[n]) / static_cast<double>(ec.total);
            in.growth[n] = growth_factor(cfg.lr, dist, lip);
            in.dist_l1[n] = distance_l1(dist, global);
        }
        for (RoundRecord& row : log.rows) row.bound = divergence_bound(in, row.round);
    }
    return log;
}

TrainLog run_centralized_twin(const Dataset& pooled, const Dataset& test, const SimConfig& cfg,
                              int batch_scale) {
    require(cfg.rounds >= 1 && cfg.t_cloud >= 1 && cfg.t_edge >= 1 && cfg.eval_every >= 1,
            "run_centralized_twin: bad schedule");
    require(batch_scale >= 1, "run_centralized_twin: bad batch scale");
    const ModelShape& s = cfg.model;
    std::vector<double> w = init_weights(s, cfg.seed);

    TrainLog log;
    i64 t = 0;
    for (int m = 1; m <= cfg.rounds; ++m) {
        for (int step = 0; step < cfg.t_cloud * cfg.t_edge; ++step) {
            ++t;
            std::vector<int> idx;
            if (cfg.batch_mode == BatchMode::minibatch)
                idx = sample_batch(seed_mix({cfg.seed, kCentralTag, static_cast<u64>(t)}),
                                   pooled.n, cfg.batch_size * batch_scale);
            sgd_step(s, w, pooled, cfg.lr, idx);
        }
        if (m % cfg.eval_every == 0 || m == cfg.rounds) {
            RoundRecord row;
            row.round = m;
            row.loss = loss(s, w, pooled);
            row.accuracy = accuracy(s, w, test);
            row.divergence = 0.0;
            row.theta = 0.0;
            row.weight_hash = hash_bytes(w.data(), w.size() * sizeof(double));
            log.rows.push_back(row);
        }
    }
    log.final_weights = w;
    return log;
}

double edge_sync_deviation(const std::vector<Dataset>& users, const ModelShape& s, double lr,
                           int steps, int sync_period, u64 seed) {
    require(!users.empty(), "edge_sync_deviation: no users");
    require(steps >= 1 && sync_period >= 1, "edge_sync_deviation: bad schedule");
    require(steps % sync_period == 0, "edge_sync_deviation: steps must be a multiple of the period");

    Dataset pooled;
    pooled.d = users[0].d;
    std::vector<i64> sizes;
    for (const Dataset& ds : users) {
        require(ds.n > 0, "edge_sync_deviation: empty user");
        require(ds.d == pooled.d, "edge_sync_deviation: feature dim mismatch");
        for (int i = 0; i < ds.n; ++i) pooled.push(ds.row(i), ds.y[i]);
        sizes.push_back(ds.n);
    }

    std::vector<double> w_c = init_weights(s, seed);
    std::vector<std::vector<double>> w(users.size(), w_c);

    double worst = 0.0;
    for (int step = 1; step <= steps; ++step) {
        for (size_t u = 0; u < users.size(); ++u) sgd_step(s, w[u], users[u], lr, {});
        sgd_step(s, w_c, pooled, lr, {});
        if (step % sync_period == 0) {
            std::vector<double> w_e = aggregate(w, sizes);
            for (auto& wu : w) wu = w_e;
            worst = std::max(worst, kernels::max_abs_diff(w_e.data(), w_c.data(), w_e.size()));
        }
    }
    return worst;
}

double sync_equivalence_gap(const std::vector<Dataset>& users, const ModelShape& s,
                            const SyncCheckConfig& cfg) {
    require(cfg.sync_period == 1,
            "sync_equivalence_gap: equivalence holds only for per-step syncing (period 1)");
    require(cfg.full_gradient, "sync_equivalence_gap: equivalence holds only for full gradients");
    return edge_sync_deviation(users, s, cfg.lr, cfg.steps, 1, cfg.seed);
}

}  // namespace hfl
