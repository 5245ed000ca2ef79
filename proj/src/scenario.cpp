#include "hfl/scenario.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "hfl/heuristic.hpp"
#include "json.hpp"

namespace hfl {

namespace {

using njson = nlohmann::json;

void check_keys(const njson& j, const char* where, std::initializer_list<const char*> allowed) {
    require(j.is_object(), std::string("config: ") + where + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            if (it.key() == a) {
                ok = true;
                break;
            }
        if (!ok) fail(std::string("config: unknown key '") + it.key() + "' in " + where);
    }
}

// Reconstruct the per-user population a grouped instance came from.
Population users_from_groups(const GroupedPopulation& gp) {
    const int C = gp.pop.classes();
    const int U = static_cast<int>(gp.group_of.size());
    std::vector<std::vector<i64>> cols;
    cols.reserve(gp.pop.units());
    for (int o = 0; o < gp.pop.units(); ++o) cols.push_back(per_user_column(gp.pop, gp.sizes, o));
    Population users;
    users.role = PopRole::user;
    users.counts = Mat<i64>(C, U, 0);
    for (int u = 0; u < U; ++u)
        for (int c = 0; c < C; ++c) users.counts(c, u) = cols[gp.group_of[u]][c];
    return users;
}

BatchMode batch_mode_from(const std::string& s) {
    if (s == "minibatch") return BatchMode::minibatch;
    if (s == "full_gradient") return BatchMode::full_gradient;
    fail("config: batch_mode must be 'minibatch' or 'full_gradient', got '" + s + "'");
}

ModelKind model_kind_from(const std::string& s) {
    if (s == "softmax") return ModelKind::softmax_regression;
    if (s == "dense_net") return ModelKind::dense_net;
    fail("config: model must be 'softmax' or 'dense_net', got '" + s + "'");
}

const char* batch_mode_name(BatchMode m) {
    return m == BatchMode::minibatch ? "minibatch" : "full_gradient";
}
const char* model_kind_name(ModelKind k) {
    return k == ModelKind::softmax_regression ? "softmax" : "dense_net";
}

int edge_count_of(const ScenarioConfig& c) {
    if (c.population) return c.population->edges;
    if (c.design) return c.design->edges;
    if (c.partition) return c.partition->edges;
    return 0;
}

void validate_config(const ScenarioConfig& c) {
    const bool pop = c.population.has_value(), des = c.design.has_value();
    const bool syn = c.synthetic.has_value(), par = c.partition.has_value();
    require(syn == par, "config: synthetic and partition come together");
    require(pop + des + syn == 1, "config: exactly one of population, design, synthetic+partition");
    require(!c.policies.empty(), "config: at least one policy");
    for (const std::string& p : c.policies)
        require(known_policy(p), "config: unknown policy '" + p + "'");
    require(!c.rho_list.empty(), "config: rho list must not be empty");
    const int N = edge_count_of(c);
    for (int r : c.rho_list)
        require(r >= 1 && r <= N, "config: rho values must lie in [1, edges]");
    require(c.node_limit >= 1, "config: node_limit must be positive");
    if (c.population) {
        const PopulationSpecCfg& ps = *c.population;
        require(ps.classes >= 2 && ps.edges >= 1, "config: population needs classes >= 2, edges >= 1");
        require(!ps.groups.empty(), "config: population needs at least one group");
        for (const GroupSpec& g : ps.groups) {
            require(static_cast<int>(g.counts.size()) == ps.classes,
                    "config: group counts length must equal classes");
            require(g.size >= 1, "config: group size must be >= 1");
            require(!g.reach.empty(), "config: group must reach at least one edge");
            for (int e : g.reach)
                require(e >= 0 && e < ps.edges, "config: reach edge out of range");
            require(g.home == -1 || (g.home >= 0 && g.home < ps.edges),
                    "config: home edge out of range");
        }
    }
}

}  // namespace

bool known_policy(const std::string& p) {
    return p == "none" || p == "random" || p == "heuristic" || p == "lp-round" ||
           p == "optimal" || p == "oracle";
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"designed-noniid", "group-split", "rho-sweep",
                                                   "train-small", "bound-check"};
    return names;
}

ScenarioConfig preset_config(const std::string& name) {
    ScenarioConfig c;
    c.name = name;
    if (name == "designed-noniid") {
        // 5 edges, 10 classes, 2 classes per edge, equal groups: theta(none) = 1.6
        DesignSpec d;
        d.edges = 5;
        d.classes = 10;
        d.classes_per_edge = 2;
        d.users_per_edge = 10;
        d.per_user_samples = 10;
        c.design = d;
        c.rho_list = {5};
        c.policies = {"none", "random", "heuristic", "lp-round", "optimal"};
    } else if (name == "group-split") {
        // three groups of 10 over 10 edges, full reach: the equal split is optimal
        PopulationSpecCfg p;
        p.classes = 10;
        p.edges = 10;
        for (int o = 0; o < 3; ++o) {
            GroupSpec g;
            g.size = 10;
            g.home = o;
            g.counts.assign(10, 0);
            g.counts[2 * o] = 50;
            g.counts[2 * o + 1] = 50;
            for (int n = 0; n < 10; ++n) g.reach.push_back(n);
            p.groups.push_back(g);
        }
        c.population = p;
        c.rho_list = {10};
        c.policies = {"none", "random", "heuristic", "lp-round", "optimal"};
    } else if (name == "rho-sweep") {
        DesignSpec d;
        d.edges = 10;
        d.classes = 10;
        d.classes_per_edge = 2;
        d.users_per_edge = 60;
        d.per_user_samples = 10;
        c.design = d;
        c.rho_list = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
        c.policies = {"heuristic"};
    } else if (name == "train-small") {
        // Tight hidden layer plus long edge windows keep the fully skewed
        // baseline drift-limited; wider reach then buys a visible accuracy gap.
        SynthSpec s;
        s.classes = 10;
        s.feature_dim = 10;
        s.samples_per_class = 400;
        s.class_mean_scale = 2.0;
        s.noise_sigma = 1.0;
        c.synthetic = s;
        PartitionSpec p;
        p.edges = 10;
        p.users_per_edge = 10;
        p.classes_per_edge = 2;
        p.per_user_samples = 32;
        c.partition = p;
        c.rho_list = {2, 10};
        c.policies = {"none", "heuristic"};
        c.seed = 4;
        c.sim.t_cloud = 20;
        c.sim.t_edge = 1;
        c.sim.rounds = 60;
        c.sim.lr = 0.05;
        c.sim.batch_mode = BatchMode::minibatch;
        c.sim.batch_size = 10;
        c.sim.model.kind = ModelKind::dense_net;
        c.sim.model.hidden = 4;
    } else if (name == "bound-check") {
        SynthSpec s;
        s.classes = 3;
        s.feature_dim = 5;
        s.samples_per_class = 40;
        s.class_mean_scale = 2.0;
        s.noise_sigma = 1.0;
        c.synthetic = s;
        PartitionSpec p;
        p.edges = 3;
        p.users_per_edge = 3;
        p.classes_per_edge = 1;
        p.per_user_samples = 9;
        c.partition = p;
        c.rho_list = {3};
        c.policies = {"none", "heuristic"};
        c.sim.t_cloud = 5;
        c.sim.t_edge = 1;
        c.sim.rounds = 10;
        c.sim.lr = 0.01;
        c.sim.batch_mode = BatchMode::full_gradient;
        c.sim.model.kind = ModelKind::softmax_regression;
        c.sim.compute_bound = true;
    } else {
        fail("unknown preset '" + name + "'");
    }
    validate_config(c);
    return c;
}

ScenarioConfig parse_config_text(const std::string& text, const std::string& origin) {
    njson j;
    try {
        j = njson::parse(text);
    } catch (const njson::exception& e) {
        fail("config: " + origin + " is not valid JSON: " + e.what());
    }
    ScenarioConfig c;
    try {
        check_keys(j, "top level",
                   {"name", "seed", "node_limit", "output_dir", "policies", "rho", "population",
                    "design", "synthetic", "partition", "sim"});
        if (j.contains("name")) c.name = j["name"].get<std::string>();
        if (j.contains("seed")) c.seed = j["seed"].get<u64>();
        if (j.contains("node_limit")) c.node_limit = j["node_limit"].get<i64>();
        if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
        if (j.contains("policies")) c.policies = j["policies"].get<std::vector<std::string>>();
        if (j.contains("rho")) c.rho_list = j["rho"].get<std::vector<int>>();
        if (j.contains("population")) {
            const njson& p = j["population"];
            check_keys(p, "population", {"classes", "edges", "groups"});
            PopulationSpecCfg ps;
            ps.classes = p.at("classes").get<int>();
            ps.edges = p.at("edges").get<int>();
            for (const njson& gj : p.at("groups")) {
                check_keys(gj, "population.groups[]", {"counts", "size", "reach", "home"});
                GroupSpec g;
                g.counts = gj.at("counts").get<std::vector<i64>>();
                g.size = gj.at("size").get<i64>();
                g.reach = gj.at("reach").get<std::vector<int>>();
                if (gj.contains("home")) g.home = gj["home"].get<int>();
                ps.groups.push_back(std::move(g));
            }
            c.population = std::move(ps);
        }
        if (j.contains("design")) {
            const njson& d = j["design"];
            check_keys(d, "design",
                       {"edges", "classes", "classes_per_edge", "users_per_edge",
                        "per_user_samples"});
            DesignSpec ds;
            if (d.contains("edges")) ds.edges = d["edges"].get<int>();
            if (d.contains("classes")) ds.classes = d["classes"].get<int>();
            if (d.contains("classes_per_edge")) ds.classes_per_edge = d["classes_per_edge"].get<int>();
            if (d.contains("users_per_edge")) ds.users_per_edge = d["users_per_edge"].get<int>();
            if (d.contains("per_user_samples"))
                ds.per_user_samples = d["per_user_samples"].get<int>();
            c.design = ds;
        }
        if (j.contains("synthetic")) {
            const njson& s = j["synthetic"];
            check_keys(s, "synthetic",
                       {"classes", "feature_dim", "samples_per_class", "class_mean_scale",
                        "noise_sigma"});
            SynthSpec ss;
            if (s.contains("classes")) ss.classes = s["classes"].get<int>();
            if (s.contains("feature_dim")) ss.feature_dim = s["feature_dim"].get<int>();
            if (s.contains("samples_per_class"))
                ss.samples_per_class = s["samples_per_class"].get<int>();
            if (s.contains("class_mean_scale"))
                ss.class_mean_scale = s["class_mean_scale"].get<double>();
            if (s.contains("noise_sigma")) ss.noise_sigma = s["noise_sigma"].get<double>();
            c.synthetic = ss;
        }
        if (j.contains("partition")) {
            const njson& p = j["partition"];
            check_keys(p, "partition",
                       {"edges", "users_per_edge", "classes_per_edge", "per_user_samples"});
            PartitionSpec ps;
            if (p.contains("edges")) ps.edges = p["edges"].get<int>();
            if (p.contains("users_per_edge")) ps.users_per_edge = p["users_per_edge"].get<int>();
            if (p.contains("classes_per_edge"))
                ps.classes_per_edge = p["classes_per_edge"].get<int>();
            if (p.contains("per_user_samples"))
                ps.per_user_samples = p["per_user_samples"].get<int>();
            c.partition = ps;
        }
        if (j.contains("sim")) {
            const njson& s = j["sim"];
            check_keys(s, "sim",
                       {"t_cloud", "t_edge", "rounds", "lr", "batch_mode", "batch_size", "model",
                        "hidden", "eval_every", "compute_bound", "lipschitz_safety"});
            if (s.contains("t_cloud")) c.sim.t_cloud = s["t_cloud"].get<int>();
            if (s.contains("t_edge")) c.sim.t_edge = s["t_edge"].get<int>();
            if (s.contains("rounds")) c.sim.rounds = s["rounds"].get<int>();
            if (s.contains("lr")) c.sim.lr = s["lr"].get<double>();
            if (s.contains("batch_mode"))
                c.sim.batch_mode = batch_mode_from(s["batch_mode"].get<std::string>());
            if (s.contains("batch_size")) c.sim.batch_size = s["batch_size"].get<int>();
            if (s.contains("model")) c.sim.model.kind = model_kind_from(s["model"].get<std::string>());
            if (s.contains("hidden")) c.sim.model.hidden = s["hidden"].get<int>();
            if (s.contains("eval_every")) c.sim.eval_every = s["eval_every"].get<int>();
            if (s.contains("compute_bound")) c.sim.compute_bound = s["compute_bound"].get<bool>();
            if (s.contains("lipschitz_safety"))
                c.sim.lipschitz_safety = s["lipschitz_safety"].get<double>();
        }
    } catch (const njson::exception& e) {
        fail("config: bad value in " + origin + ": " + e.what());
    }
    validate_config(c);
    return c;
}

ScenarioConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), "'" + path + "'");
}

std::string config_json(const ScenarioConfig& c) {
    njson j;
    j["name"] = c.name;
    j["seed"] = c.seed;
    j["node_limit"] = c.node_limit;
    j["output_dir"] = c.output_dir;
    j["policies"] = c.policies;
    j["rho"] = c.rho_list;
    if (c.population) {
        njson p;
        p["classes"] = c.population->classes;
        p["edges"] = c.population->edges;
        p["groups"] = njson::array();
        for (const GroupSpec& g : c.population->groups) {
            njson gj;
            gj["counts"] = g.counts;
            gj["size"] = g.size;
            gj["reach"] = g.reach;
            gj["home"] = g.home;
            p["groups"].push_back(gj);
        }
        j["population"] = p;
    }
    if (c.design) {
        j["design"] = {{"edges", c.design->edges},
                       {"classes", c.design->classes},
                       {"classes_per_edge", c.design->classes_per_edge},
                       {"users_per_edge", c.design->users_per_edge},
                       {"per_user_samples", c.design->per_user_samples}};
    }
    if (c.synthetic) {
        j["synthetic"] = {{"classes", c.synthetic->classes},
                          {"feature_dim", c.synthetic->feature_dim},
                          {"samples_per_class", c.synthetic->samples_per_class},
                          {"class_mean_scale", c.synthetic->class_mean_scale},
                          {"noise_sigma", c.synthetic->noise_sigma}};
    }
    if (c.partition) {
        j["partition"] = {{"edges", c.partition->edges},
                          {"users_per_edge", c.partition->users_per_edge},
                          {"classes_per_edge", c.partition->classes_per_edge},
                          {"per_user_samples", c.partition->per_user_samples}};
    }
    j["sim"] = {{"t_cloud", c.sim.t_cloud},
                {"t_edge", c.sim.t_edge},
                {"rounds", c.sim.rounds},
                {"lr", c.sim.lr},
                {"batch_mode", batch_mode_name(c.sim.batch_mode)},
                {"batch_size", c.sim.batch_size},
                {"model", model_kind_name(c.sim.model.kind)},
                {"hidden", c.sim.model.hidden},
                {"eval_every", c.sim.eval_every},
                {"compute_bound", c.sim.compute_bound},
                {"lipschitz_safety", c.sim.lipschitz_safety}};
    return j.dump(2);
}

ProblemInstance make_problem(const ScenarioConfig& c, int rho) {
    validate_config(c);
    ProblemInstance pi;
    if (c.population) {
        const PopulationSpecCfg& ps = *c.population;
        const int C = ps.classes, N = ps.edges;
        const int O = static_cast<int>(ps.groups.size());
        pi.gp.pop.role = PopRole::group;
        pi.gp.pop.counts = Mat<i64>(C, O, 0);
        pi.gp.topo.reach = Mat<std::uint8_t>(N, O, 0);
        for (int o = 0; o < O; ++o) {
            const GroupSpec& g = ps.groups[o];
            for (int cl = 0; cl < C; ++cl) pi.gp.pop.counts(cl, o) = g.counts[cl];
            pi.gp.sizes.size.push_back(g.size);
            for (int e : g.reach) pi.gp.topo.reach(e, o) = 1;
            for (i64 k = 0; k < g.size; ++k) {
                pi.gp.group_of.push_back(o);
                pi.home_edge.push_back(g.home);
            }
        }
        pi.n_edges = N;
        validate_group_shapes(pi.gp.pop, pi.gp.sizes);
    } else if (c.design) {
        const DesignSpec& d = *c.design;
        DesignedPopulation dp = design_population(d.edges, d.classes, d.classes_per_edge,
                                                  d.users_per_edge, d.per_user_samples, rho);
        pi.gp = group_users(dp.users, dp.topo);
        pi.home_edge = dp.home_edge;
        pi.n_edges = d.edges;
    } else {
        pi = make_learn_instance(c, rho).prob;
    }
    return pi;
}

LearnInstance make_learn_instance(const ScenarioConfig& c, int rho) {
    validate_config(c);
    require(c.synthetic && c.partition, "config: training needs synthetic+partition");
    LearnInstance li;
    SynthSpec s = *c.synthetic;
    s.seed = c.seed;
    li.data = generate_synthetic(s);
    PartitionSpec p = *c.partition;
    p.seed = c.seed;
    p.rho = rho;
    li.part = partition_non_iid(li.data.train, s.classes, p);
    li.prob.gp = group_users(li.part.users, li.part.topo);
    li.prob.home_edge = li.part.home_edge;
    li.prob.n_edges = p.edges;
    return li;
}

PolicyOutcome run_policy(const std::string& policy, const ProblemInstance& pi, i64 node_limit,
                         u64 seed, bool timings) {
    require(known_policy(policy), "unknown policy '" + policy + "'");
    const auto t0 = std::chrono::steady_clock::now();
    PolicyOutcome out;
    out.policy = policy;
    const GroupedPopulation& gp = pi.gp;
    const int N = pi.n_edges;

    auto finish_group = [&](const Assignment& y, const std::string& status, i64 nodes) {
        const ValidationReport rep = validate_assignment(gp.sizes, gp.topo, y);
        require(rep.feasible(), "policy '" + policy + "' produced an infeasible assignment");
        out.ua = expand_assignment(gp, y);
        out.theta = theta_from_counts(edge_counts(gp.pop, gp.sizes, y));
        out.status = status;
        out.nodes = nodes;
    };

    if (policy == "none") {
        require(!pi.home_edge.empty(), "policy none needs home edges");
        for (int h : pi.home_edge)
            require(h >= 0 && h < N, "policy none: user without a valid home edge");
        out.ua.edge_of = pi.home_edge;
        out.theta = theta_from_counts(edge_counts_users(users_from_groups(gp), out.ua.edge_of, N));
    } else if (policy == "random") {
        finish_group(random_assign(gp.sizes, gp.topo, seed), "ok", 0);
    } else if (policy == "heuristic") {
        finish_group(equal_assign(gp.sizes, gp.topo), "ok", 0);
    } else {
        const std::optional<i64> S = default_equal_size(gp.pop, gp.sizes, N);
        auto fallback = [&](const std::string& why, i64 nodes) {
            finish_group(equal_assign(gp.sizes, gp.topo), why, nodes);
        };
        if (!S) {
            fallback("fallback_heuristic_no_equal_size", 0);
        } else if (policy == "lp-round") {
            const SolveResult r = relax_and_round(gp.pop, gp.sizes, gp.topo, *S);
            if (!r.has_assignment)
                fallback("fallback_heuristic_infeasible", 0);
            else
                finish_group(r.assignment, r.size_slack > 0 ? "size_slack" : "ok", 0);
        } else if (policy == "optimal") {
            BnbOptions opt;
            opt.node_limit = node_limit;
            const SolveResult r = branch_and_bound(gp.pop, gp.sizes, gp.topo, *S, opt);
            if (r.has_assignment)
                finish_group(r.assignment,
                             r.status == SolveStatus::optimal ? "ok" : solve_status_name(r.status),
                             r.nodes_explored);
            else
                fallback(std::string("fallback_heuristic_") + solve_status_name(r.status),
                         r.nodes_explored);
        } else {  // oracle
            try {
                const SolveResult r = brute_force_optimal(gp.pop, gp.sizes, gp.topo, *S);
                if (r.has_assignment)
                    finish_group(r.assignment, "ok", r.nodes_explored);
                else
                    fallback("fallback_heuristic_infeasible", r.nodes_explored);
            } catch (const std::runtime_error&) {
                fallback("fallback_heuristic_guard", 0);
            }
        }
    }
    if (timings)
        out.solve_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
    return out;
}

}  // namespace hfl
