#pragma once

#include <iosfwd>
#include <optional>

#include "hfl/bound.hpp"
#include "hfl/model.hpp"
#include "hfl/population.hpp"

namespace hfl {

enum class BatchMode { full_gradient, minibatch };

struct SimConfig {
    int t_cloud = 5;   // edge rounds per cloud aggregation
    int t_edge = 1;    // local steps per edge aggregation
    int rounds = 10;   // cloud rounds
    double lr = 0.01;
    BatchMode batch_mode = BatchMode::minibatch;
    int batch_size = 10;  // per user; the centralized twin uses batch_size * edges
    ModelShape model;
    u64 seed = 1;
    int eval_every = 1;
    bool compute_bound = false;     // requires t_edge == 1
    double lipschitz_safety = 2.0;
};

struct RoundRecord {
    int round = 0;
    double loss = 0.0;
    double accuracy = 0.0;
    double divergence = 0.0;
    double theta = 0.0;
    std::optional<double> bound;
    u64 weight_hash = 0;
};

struct TrainLog {
    std::vector<RoundRecord> rows;
    std::vector<double> final_weights;

    static const char* csv_header();  // round,loss,accuracy,divergence,theta,bound
    void write_csv(std::ostream& os) const;
};

struct HflScenario {
    const std::vector<Dataset>* user_data = nullptr;
    const Population* users = nullptr;        // C x U counts (for theta / weighting)
    const UserAssignment* assignment = nullptr;
    int n_edges = 0;
    const Dataset* test = nullptr;
};

// Hierarchical FedSGD/FedAvg with a lockstep centralized twin; per cloud round
// logs pooled training loss, test accuracy, L2 divergence from the twin, the
// assignment's theta, and (when enabled) the divergence bound.
TrainLog run_hfl(const HflScenario& sc, const SimConfig& cfg);

// The twin alone: plain (S)GD on the pooled data, logged at the same cadence.
// batch_scale multiplies batch_size (the embedded twin uses the edge count) so
// a standalone run can reproduce the in-simulation trajectory exactly.
TrainLog run_centralized_twin(const Dataset& pooled, const Dataset& test, const SimConfig& cfg,
                              int batch_scale = 1);

// Size-weighted average of weight vectors, reduced in ascending index order.
std::vector<double> aggregate(const std::vector<std::vector<double>>& models,
                              const std::vector<i64>& sizes);

// Users of one edge, full gradients, synced every `sync_period` steps; returns
// the max |aggregate - centralized-on-pooled| coordinate over all sync points.
double edge_sync_deviation(const std::vector<Dataset>& users, const ModelShape& s,
                           double lr, int steps, int sync_period, u64 seed);

struct SyncCheckConfig {
    double lr = 0.05;
    int steps = 50;
    int sync_period = 1;
    bool full_gradient = true;
    u64 seed = 1;
};

// Per-step-sync equivalence gap (expected ~1e-15 * steps); errors unless
// sync_period == 1 and full_gradient, the regime where equality holds.
double sync_equivalence_gap(const std::vector<Dataset>& users, const ModelShape& s,
                            const SyncCheckConfig& cfg);

}  // namespace hfl
