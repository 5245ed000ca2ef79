#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hfl/scenario.hpp"

namespace hfl {

struct CliOptions {
    std::string command;      // assign | train | rho-sweep | summary
    std::string config_path;  // --config (JSON file)
    std::string preset;       // --preset (built-in scenario)
    std::optional<u64> seed;
    std::optional<int> rounds;
    std::optional<i64> node_limit;
    std::vector<std::string> policies;  // nonempty replaces the config's list
    std::string out_dir;
    bool timings = false;  // off by default so outputs stay byte-identical
};

// Parses argv and runs; on error prints {"error": ...} to stderr, returns 1.
int run_cli(int argc, const char* const* argv);

// Post-parse entry; throws on failure.
void run_command(const CliOptions& opt);

// Reads a TrainLog CSV written by the train command (bound column optional).
std::vector<RoundRecord> read_train_csv(const std::string& path);

}  // namespace hfl
