#pragma once

#include <string>

#include "hfl/model.hpp"
#include "hfl/population.hpp"

namespace hfl {

// Class-conditional Gaussians around deterministic, well-separated means.
struct SynthSpec {
    int classes = 10;
    int feature_dim = 10;
    int samples_per_class = 400;
    double class_mean_scale = 2.0;
    double noise_sigma = 1.0;
    u64 seed = 1;
};

struct SplitDataset {
    Dataset train, test;  // stratified 80/20
};
SplitDataset generate_synthetic(const SynthSpec& spec);

// Label-skewed layout: edge n's users hold only the classes_per_edge classes
// starting at n*classes_per_edge (mod classes); every user carries
// per_user_samples split evenly over its class block; a user homed at edge n
// may reach edges n .. n+rho-1 (mod edges).
struct PartitionSpec {
    int edges = 10;
    int users_per_edge = 10;
    int classes_per_edge = 2;
    int per_user_samples = 32;
    int rho = 1;
    u64 seed = 1;
};

struct PartitionedData {
    std::vector<Dataset> user_data;
    std::vector<int> home_edge;
    Population users;  // C x U counts
    Topology topo;     // N x U
};
PartitionedData partition_non_iid(const Dataset& train, int classes, const PartitionSpec& spec);

// Same counts/topology layout without any feature data (assignment-only runs).
struct DesignedPopulation {
    Population users;
    Topology topo;
    std::vector<int> home_edge;
};
DesignedPopulation design_population(int edges, int classes, int classes_per_edge,
                                     int users_per_edge, int per_user_samples, int rho);

// IDX image/label pair (big-endian, magics 0x803 / 0x801); pixels scaled to [0,1].
// limit > 0 keeps only the first `limit` samples.
Dataset load_idx(const std::string& images_path, const std::string& labels_path, int limit = 0);

}  // namespace hfl
