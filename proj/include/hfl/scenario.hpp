#pragma once

#include <optional>
#include <string>

#include "hfl/data.hpp"
#include "hfl/sim.hpp"
#include "hfl/solver.hpp"

namespace hfl {

// One group given explicitly: per-group class totals, user count, reachable
// edges, and the edge its users start at (-1 when the `none` policy is unused).
struct GroupSpec {
    std::vector<i64> counts;
    i64 size = 1;
    std::vector<int> reach;
    int home = -1;
};

struct PopulationSpecCfg {
    int classes = 0;
    int edges = 0;
    std::vector<GroupSpec> groups;
};

// Designed label-skew layout (no feature data): edge n's users hold the
// classes_per_edge classes starting at n*classes_per_edge mod classes.
struct DesignSpec {
    int edges = 10;
    int classes = 10;
    int classes_per_edge = 2;
    int users_per_edge = 60;
    int per_user_samples = 10;
};

struct ScenarioConfig {
    std::string name = "custom";
    std::optional<PopulationSpecCfg> population;  // explicit groups
    std::optional<DesignSpec> design;             // designed counts, no data
    std::optional<SynthSpec> synthetic;           // data source for training
    std::optional<PartitionSpec> partition;       // rho/seed filled per run
    std::vector<std::string> policies;
    std::vector<int> rho_list;  // each value materializes its own instance
    SimConfig sim;
    u64 seed = 1;
    i64 node_limit = 200000;
    std::string output_dir = "out";
};

const std::vector<std::string>& preset_names();
ScenarioConfig preset_config(const std::string& name);
ScenarioConfig load_config_file(const std::string& path);   // strict: unknown keys rejected
ScenarioConfig parse_config_text(const std::string& text, const std::string& origin);
std::string config_json(const ScenarioConfig& c);           // canonical echo for the manifest

// Group-level optimization instance; home_edge drives the `none` policy.
struct ProblemInstance {
    GroupedPopulation gp;
    std::vector<int> home_edge;  // per user, -1 when unknown
    int n_edges = 0;
};
ProblemInstance make_problem(const ScenarioConfig& c, int rho);

// Full training materialization (synthetic data, partition, grouped instance).
struct LearnInstance {
    SplitDataset data;
    PartitionedData part;
    ProblemInstance prob;
};
LearnInstance make_learn_instance(const ScenarioConfig& c, int rho);

bool known_policy(const std::string& p);

struct PolicyOutcome {
    std::string policy;
    int rho = 0;
    UserAssignment ua;
    double theta = 0.0;
    i64 nodes = 0;
    double solve_ms = 0.0;  // stays 0 unless timing collection is on
    std::string status = "ok";
};
PolicyOutcome run_policy(const std::string& policy, const ProblemInstance& pi, i64 node_limit,
                         u64 seed, bool timings);

}  // namespace hfl
