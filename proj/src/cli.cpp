#include "hfl/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

namespace hfl {

namespace {

using njson = nlohmann::json;
namespace fs = std::filesystem;

std::string fmt(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.12g", v);
    return b;
}

ScenarioConfig resolve_config(const CliOptions& opt) {
    require(opt.config_path.empty() != opt.preset.empty(),
            "pass exactly one of --config or --preset");
    ScenarioConfig c =
        opt.preset.empty() ? load_config_file(opt.config_path) : preset_config(opt.preset);
    if (opt.seed) c.seed = *opt.seed;
    if (opt.rounds) {
        require(*opt.rounds >= 1, "--rounds must be >= 1");
        c.sim.rounds = *opt.rounds;
    }
    if (opt.node_limit) {
        require(*opt.node_limit >= 1, "--node-limit must be >= 1");
        c.node_limit = *opt.node_limit;
    }
    if (!opt.policies.empty()) {
        for (const std::string& p : opt.policies)
            require(known_policy(p), "unknown policy '" + p + "'");
        c.policies = opt.policies;
    }
    if (!opt.out_dir.empty()) c.output_dir = opt.out_dir;
    return c;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    require(out.good(), "cannot open '" + p.string() + "' for writing");
    out << content;
    out.close();
    require(out.good(), "failed writing '" + p.string() + "'");
}

void write_manifest(const ScenarioConfig& c, const std::string& command,
                    const std::vector<std::string>& outputs) {
    njson m;
    m["command"] = command;
    m["version"] = "0.1.0";
    m["seed"] = c.seed;
    m["config"] = njson::parse(config_json(c));
    m["outputs"] = outputs;
    write_file(fs::path(c.output_dir) / "manifest.json", m.dump(2) + "\n");
}

void cmd_assign(const ScenarioConfig& c, bool timings) {
    fs::create_directories(c.output_dir);
    std::string csv = "policy,rho,theta,solve_time_ms,nodes,status\n";
    for (int rho : c.rho_list) {
        const ProblemInstance pi = make_problem(c, rho);
        for (const std::string& p : c.policies) {
            const PolicyOutcome o = run_policy(p, pi, c.node_limit, c.seed, timings);
            csv += p;
            csv += ',';
            csv += std::to_string(rho);
            csv += ',';
            csv += fmt(o.theta);
            csv += ',';
            csv += timings ? fmt(o.solve_ms) : std::string("0");
            csv += ',';
            csv += std::to_string(o.nodes);
            csv += ',';
            csv += o.status;
            csv += '\n';
        }
    }
    write_file(fs::path(c.output_dir) / "assign.csv", csv);
    write_manifest(c, "assign", {"assign.csv"});
}

void cmd_rho_sweep(const ScenarioConfig& c) {
    require(c.design.has_value(), "rho-sweep needs a designed scenario ('design' block)");
    fs::create_directories(c.output_dir);
    std::string csv = "rho,theta\n";
    for (int rho : c.rho_list) {
        const ProblemInstance pi = make_problem(c, rho);
        const PolicyOutcome o = run_policy("heuristic", pi, c.node_limit, c.seed, false);
        csv += std::to_string(rho);
        csv += ',';
        csv += fmt(o.theta);
        csv += '\n';
    }
    write_file(fs::path(c.output_dir) / "rho_sweep.csv", csv);
    write_manifest(c, "rho-sweep", {"rho_sweep.csv"});
}

void reject_empty_edges(const UserAssignment& ua, int n_edges, const std::string& policy) {
    std::vector<int> users(n_edges, 0);
    for (int e : ua.edge_of)
        if (e >= 0) ++users[e];
    for (int n = 0; n < n_edges; ++n)
        require(users[n] > 0, "policy '" + policy + "' leaves edge " + std::to_string(n) +
                                  " empty; refusing to train");
}

std::string log_to_csv(const TrainLog& log) {
    std::ostringstream ss;
    log.write_csv(ss);
    return ss.str();
}

void cmd_train(const ScenarioConfig& c, bool timings) {
    require(c.synthetic && c.partition, "train needs a synthetic+partition scenario");
    fs::create_directories(c.output_dir);
    const fs::path dir(c.output_dir);
    std::vector<std::string> outputs;

    SimConfig sim = c.sim;
    sim.seed = c.seed;
    sim.model.classes = c.synthetic->classes;
    sim.model.feature_dim = c.synthetic->feature_dim;

    bool want_none = false;
    std::optional<LearnInstance> first;
    for (int rho : c.rho_list) {
        LearnInstance li = make_learn_instance(c, rho);
        for (const std::string& p : c.policies) {
            if (p == "none") {
                want_none = true;
                continue;  // rho-independent, run once below
            }
            const PolicyOutcome o = run_policy(p, li.prob, c.node_limit, c.seed, timings);
            reject_empty_edges(o.ua, li.prob.n_edges, p);
            HflScenario sc;
            sc.user_data = &li.part.user_data;
            sc.users = &li.part.users;
            sc.assignment = &o.ua;
            sc.n_edges = li.prob.n_edges;
            sc.test = &li.data.test;
            const TrainLog log = run_hfl(sc, sim);
            const std::string name = "train_" + p + "_rho" + std::to_string(rho) + ".csv";
            write_file(dir / name, log_to_csv(log));
            outputs.push_back(name);
        }
        if (!first) first.emplace(std::move(li));
    }
    require(first.has_value(), "train ran no scenario");

    if (want_none) {
        const PolicyOutcome o = run_policy("none", first->prob, c.node_limit, c.seed, timings);
        reject_empty_edges(o.ua, first->prob.n_edges, "none");
        HflScenario sc;
        sc.user_data = &first->part.user_data;
        sc.users = &first->part.users;
        sc.assignment = &o.ua;
        sc.n_edges = first->prob.n_edges;
        sc.test = &first->data.test;
        const TrainLog log = run_hfl(sc, sim);
        write_file(dir / "train_none.csv", log_to_csv(log));
        outputs.push_back("train_none.csv");
    }

    Dataset pooled;
    pooled.d = first->data.train.d;
    for (const Dataset& ds : first->part.user_data)
        for (int i = 0; i < ds.n; ++i) pooled.push(ds.row(i), ds.y[i]);
    const TrainLog clog =
        run_centralized_twin(pooled, first->data.test, sim, c.partition->edges);
    write_file(dir / "centralized.csv", log_to_csv(clog));
    outputs.push_back("centralized.csv");

    write_manifest(c, "train", outputs);
}

int first_reach(const std::vector<RoundRecord>& rows, double target) {
    for (const RoundRecord& r : rows)
        if (r.accuracy >= target) return r.round;
    return -1;
}

void cmd_summary(const ScenarioConfig& c) {
    const fs::path dir(c.output_dir);
    const fs::path base_path = dir / "train_none.csv";
    require(fs::exists(base_path),
            "summary needs " + base_path.string() + " (run train with policy none first)");
    const std::vector<RoundRecord> base = read_train_csv(base_path.string());
    require(!base.empty(), "train_none.csv holds no rows");
    const double final_none = base.back().accuracy;
    require(final_none > 0.0, "baseline final accuracy is zero; improvements undefined");
    // speed target: the best accuracy the unoptimized run ever attains, so a
    // curve that sags after peaking still sets a meaningful bar
    double speed_target = 0.0;
    for (const RoundRecord& r : base) speed_target = std::max(speed_target, r.accuracy);
    const int base_first = first_reach(base, speed_target);
    const int total_rounds = base.back().round;

    std::vector<std::string> optimized;
    for (const std::string& p : c.policies)
        if (p != "none") optimized.push_back(p);
    require(!optimized.empty(), "summary needs at least one optimized policy besides none");

    std::vector<std::string> outputs;
    for (const std::string& p : optimized) {
        std::string csv;
        csv +=
            "# acc_improvement_pct: relative final-accuracy gain over the unoptimized (none) "
            "assignment, in percent\n";
        csv +=
            "# speed_improvement_pct: (1 - first_reach/total_rounds)*100, where first_reach is "
            "the first round the optimized run attains the best accuracy the none run ever "
            "reaches; n/a when never attained or not attained earlier than the none run itself\n";
        std::string rows;
        for (int rho : c.rho_list) {
            const fs::path fp = dir / ("train_" + p + "_rho" + std::to_string(rho) + ".csv");
            require(fs::exists(fp), "summary: missing " + fp.string());
            const std::vector<RoundRecord> log = read_train_csv(fp.string());
            require(!log.empty(), "summary: " + fp.string() + " holds no rows");
            const double acc_imp = (log.back().accuracy - final_none) / final_none * 100.0;
            const int fr = first_reach(log, speed_target);
            csv += "# rho=" + std::to_string(rho) +
                   ": optimized_first_reach=" + (fr < 0 ? std::string("never") : std::to_string(fr)) +
                   " baseline_first_reach=" + std::to_string(base_first) +
                   " target_accuracy=" + fmt(speed_target) + "\n";
            rows += std::to_string(rho);
            rows += ',';
            rows += fmt(acc_imp);
            rows += ',';
            if (fr >= 0 && fr < base_first)
                rows += fmt((1.0 - static_cast<double>(fr) / total_rounds) * 100.0);
            else
                rows += "n/a";
            rows += '\n';
        }
        csv += "rho,acc_improvement_pct,speed_improvement_pct\n";
        csv += rows;
        const std::string name = "summary_" + p + ".csv";
        write_file(dir / name, csv);
        outputs.push_back(name);
    }
    write_manifest(c, "summary", outputs);
}

}  // namespace

std::vector<RoundRecord> read_train_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "cannot open '" + path + "'");
    std::vector<RoundRecord> rows;
    std::string line;
    bool saw_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!saw_header) {
            require(line.rfind("round,", 0) == 0, "'" + path + "' is not a training log");
            saw_header = true;
            continue;
        }
        std::vector<std::string> f;
        std::string cur;
        for (char ch : line) {
            if (ch == ',') {
                f.push_back(cur);
                cur.clear();
            } else {
                cur += ch;
            }
        }
        f.push_back(cur);
        require(f.size() == 6, "'" + path + "': malformed row '" + line + "'");
        RoundRecord r;
        r.round = std::stoi(f[0]);
        r.loss = std::stod(f[1]);
        r.accuracy = std::stod(f[2]);
        r.divergence = std::stod(f[3]);
        r.theta = std::stod(f[4]);
        if (!f[5].empty()) r.bound = std::stod(f[5]);
        rows.push_back(r);
    }
    return rows;
}

void run_command(const CliOptions& opt) {
    const ScenarioConfig c = resolve_config(opt);
    if (opt.command == "assign")
        cmd_assign(c, opt.timings);
    else if (opt.command == "train")
        cmd_train(c, opt.timings);
    else if (opt.command == "rho-sweep")
        cmd_rho_sweep(c);
    else if (opt.command == "summary")
        cmd_summary(c);
    else
        fail("unknown command '" + opt.command + "'");
}

int run_cli(int argc, const char* const* argv) {
    CliOptions opt;
    CLI::App app{"hierarchical federated assignment and training harness"};
    app.require_subcommand(1);

    std::string presets;
    for (const std::string& n : preset_names()) {
        if (!presets.empty()) presets += ", ";
        presets += n;
    }

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "JSON scenario config file");
        sub->add_option("--preset", opt.preset, "built-in scenario (" + presets + ")");
        sub->add_option("--seed", opt.seed, "global seed override");
        sub->add_option("--rounds", opt.rounds, "cloud-round count override");
        sub->add_option("--node-limit", opt.node_limit, "branch-and-bound node budget");
        sub->add_option("--policy", opt.policies,
                        "assignment policy (repeatable; replaces the config's list)");
        sub->add_option("--out", opt.out_dir, "output directory override");
        sub->add_flag("--timings", opt.timings,
                      "record wall-clock solve times (reruns stop being byte-identical)");
    };
    add_common(app.add_subcommand("assign", "objective table per policy"));
    add_common(app.add_subcommand("train", "training curves per policy plus the centralized twin"));
    add_common(app.add_subcommand("rho-sweep", "heuristic objective as reach grows"));
    add_common(app.add_subcommand("summary", "accuracy/speed improvement table from train logs"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        njson err;
        err["error"] = std::string(e.what());
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 1;
    }

    opt.command = app.get_subcommands().at(0)->get_name();
    try {
        run_command(opt);
    } catch (const std::exception& e) {
        njson err;
        err["error"] = std::string(e.what());
        err["command"] = opt.command;
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 1;
    }
    return 0;
}

}  // namespace hfl
