// Command-line driver binding flat-JSON configs to the experiment harness.
//
// Exit codes: 0 success, 1 experiment error, 2 usage error, 3 capacity error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "oco/errors.hpp"
#include "oco/experts.hpp"
#include "oco/harness.hpp"

namespace {

using nlohmann::json;

struct CommonArgs {
    std::string config_path;
    std::string out_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int trials = 0;
    bool trials_set = false;
    int threads = 1;
    std::vector<std::string> overrides;
};

// flat JSON object; command-line --set key=value pairs win over file values
json resolve_config(const CommonArgs& args) {
    json cfg = json::object();
    if (!args.config_path.empty()) {
        std::ifstream is(args.config_path);
        if (!is) throw std::runtime_error("cannot open config file " + args.config_path);
        is >> cfg;
        if (!cfg.is_object()) throw std::runtime_error("config must be a flat JSON object");
    }
    for (const auto& kv : args.overrides) {
        auto pos = kv.find('=');
        if (pos == std::string::npos)
            throw CLI::ValidationError("--set expects key=value, got '" + kv + "'");
        std::string key = kv.substr(0, pos);
        std::string val = kv.substr(pos + 1);
        try {
            cfg[key] = json::parse(val);
        } catch (...) {
            cfg[key] = val;  // plain string
        }
    }
    if (args.seed_set) cfg["seed"] = args.seed;
    if (args.trials_set) cfg["trials"] = args.trials;
    cfg["threads"] = args.threads;
    return cfg;
}

template <typename T>
T get_or(const json& cfg, const std::string& key, T fallback) {
    if (!cfg.contains(key)) return fallback;
    return cfg.at(key).get<T>();
}

void echo_config(oco::harness::ExperimentOutput& out, const json& cfg) {
    for (auto it = cfg.begin(); it != cfg.end(); ++it)
        out.config_echo[it.key()] = it.value().dump();
}

void write_output(const oco::harness::ExperimentOutput& out, const std::string& path) {
    using oco::harness::EmitFormat;
    if (path.empty()) {
        oco::harness::emit(out, EmitFormat::Csv, "/dev/stdout");
        return;
    }
    EmitFormat fmt = path.size() >= 5 && path.substr(path.size() - 5) == ".json"
                         ? EmitFormat::Json
                         : EmitFormat::Csv;
    oco::harness::emit(out, fmt, path);
}

void write_json(const json& j, const std::string& path) {
    if (path.empty()) {
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::trunc);
        if (!os) throw std::runtime_error("cannot open " + tmp);
        os << j.dump(2) << "\n";
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("rename failed for " + path);
}

int run_regret(const CommonArgs& args) {
    json cfg = resolve_config(args);
    oco::harness::RegretExperimentConfig rc;
    rc.experiment_id = get_or<std::string>(cfg, "experiment_id", "regret");
    rc.geometry = get_or<std::string>(cfg, "geometry", "euclidean_ball");
    rc.policy = get_or<std::string>(cfg, "policy", "lipschitz");
    rc.adversary = get_or<std::string>(cfg, "adversary", "linear_tree");
    rc.d = get_or<int>(cfg, "d", 8);
    rc.n_grid = get_or<std::vector<int>>(cfg, "n_grid", {64, 256, 1024});
    rc.trials = get_or<int>(cfg, "trials", 5);
    rc.master_seed = get_or<std::uint64_t>(cfg, "seed", 1);
    rc.sigma = get_or<double>(cfg, "sigma", 1.0);
    rc.threads = get_or<int>(cfg, "threads", 1);
    auto out = oco::harness::run_regret_experiment(rc);
    echo_config(out, cfg);
    if (out.rows.size() >= 3 && rc.n_grid.size() >= 3) {
        auto fit = oco::harness::fit_rate(out.rows);
        out.config_echo["fit_exponent"] = std::to_string(fit.exponent);
        out.config_echo["fit_r2"] = std::to_string(fit.r2);
    }
    write_output(out, args.out_path);
    return 0;
}

int run_counterexample(const CommonArgs& args) {
    json cfg = resolve_config(args);
    int d = get_or<int>(cfg, "d", 256);
    int n = get_or<int>(cfg, "n", 8);
    int trials = get_or<int>(cfg, "trials", 200);
    int draws = get_or<int>(cfg, "mc_draws", 100000);
    std::uint64_t seed = get_or<std::uint64_t>(cfg, "seed", 1);
    int threads = get_or<int>(cfg, "threads", 1);
    auto s = oco::harness::counterexample_experiment(d, n, trials, seed, draws, threads);
    json j;
    j["library_version"] = oco::harness::kLibraryVersion;
    j["config"] = cfg;
    j["unobserved_frequency"] = s.unobserved_frequency;
    j["conditioned_trials"] = s.conditioned_trials;
    j["erm_population_risk"] = s.erm_population_risk;
    j["erm_population_risk_stderr"] = s.erm_population_risk_stderr;
    j["erm_norm_mean"] = s.erm_norm_mean;
    j["sgd_suboptimality"] = s.sgd_suboptimality;
    j["sgd_suboptimality_stderr"] = s.sgd_suboptimality_stderr;
    j["sgd_bound"] = s.sgd_bound;
    j["population_optimum"] = s.population_optimum;
    j["runtime_ms"] = s.runtime_ms;
    write_json(j, args.out_path);
    return 0;
}

int run_oracle_lb(const CommonArgs& args) {
    json cfg = resolve_config(args);
    oco::harness::OracleCurveConfig oc;
    oc.experiment_id = get_or<std::string>(cfg, "experiment_id", "oracle");
    oc.algorithm = get_or<std::string>(cfg, "algorithm", "md");
    oc.m_grid = get_or<std::vector<int>>(cfg, "m_grid", {4, 16, 64});
    oc.master_seed = get_or<std::uint64_t>(cfg, "seed", 1);
    auto out = oco::harness::oracle_complexity_curve(oc);
    echo_config(out, cfg);
    write_output(out, args.out_path);
    return 0;
}

int run_complexity(const CommonArgs& args) {
    json cfg = resolve_config(args);
    // the class comes from the config: either an explicit table or the full
    // binary class on x_points
    oco::cplx::FiniteClass F =
        cfg.contains("table")
            ? oco::cplx::FiniteClass::from_table(
                  cfg.at("table").get<std::vector<std::vector<double>>>())
            : oco::cplx::FiniteClass::full_binary(get_or<int>(cfg, "x_points", 3));
    double alpha = get_or<double>(cfg, "alpha", 1.0);
    oco::cplx::Caps caps;
    caps.seq_fat_max_depth = get_or<int>(cfg, "seq_fat_max_depth", caps.seq_fat_max_depth);
    caps.seq_fat_max_points = get_or<int>(cfg, "seq_fat_max_points", caps.seq_fat_max_points);
    caps.stat_fat_max_points = get_or<int>(cfg, "stat_fat_max_points", caps.stat_fat_max_points);

    json j;
    j["library_version"] = oco::harness::kLibraryVersion;
    j["config"] = cfg;
    j["num_functions"] = F.num_functions();
    j["num_points"] = F.num_points();
    if (F.is_binary()) j["littlestone_dim"] = oco::cplx::littlestone_dim(F, caps);
    auto sf = oco::cplx::seq_fat(F, alpha, caps);
    j["seq_fat"] = sf.value;
    j["seq_fat_saturated"] = sf.saturated;
    if (sf.tree_certificate) {
        j["seq_fat_tree"] = sf.tree_certificate->tree.nodes;
        j["seq_fat_witness"] = sf.tree_certificate->witness.nodes;
    }
    auto st = oco::cplx::stat_fat(F, alpha, caps);
    j["stat_fat"] = st.value;
    if (st.sample_certificate) {
        j["stat_fat_sample"] = st.sample_certificate->points;
        j["stat_fat_witness"] = st.sample_certificate->witness;
    }
    int rad_n = get_or<int>(cfg, "rademacher_n", 2);
    std::vector<int> sample;
    for (int i = 0; i < rad_n; ++i) sample.push_back(i % static_cast<int>(F.num_points()));
    j["stat_rademacher"] = oco::cplx::stat_rademacher(F, sample, caps);
    write_json(j, args.out_path);
    return 0;
}

int run_experts(const CommonArgs& args) {
    json cfg = resolve_config(args);
    oco::cplx::FiniteClass F =
        cfg.contains("table")
            ? oco::cplx::FiniteClass::from_table(
                  cfg.at("table").get<std::vector<std::vector<double>>>())
            : oco::cplx::FiniteClass::full_binary(get_or<int>(cfg, "x_points", 2));
    int n = get_or<int>(cfg, "n", 32);
    std::uint64_t seed = get_or<std::uint64_t>(cfg, "seed", 1);
    std::size_t cap = get_or<std::size_t>(cfg, "expert_cap", 100000);

    oco::Rng rng(seed);
    std::vector<std::pair<int, double>> stream;
    for (int t = 0; t < n; ++t)
        stream.emplace_back(static_cast<int>(rng() % F.num_points()),
                            oco::rademacher(rng) > 0 ? 1.0 : -1.0);
    auto res = oco::experts::agnostic_supervised_run(F, stream, cap);
    json j;
    j["library_version"] = oco::harness::kLibraryVersion;
    j["config"] = cfg;
    j["expected_regret"] = res.expected_regret;
    j["best_grid_bound"] = res.best_grid_bound;
    j["best_alpha"] = res.best_alpha;
    j["skipped_scales"] = res.skipped_scales;
    write_json(j, args.out_path);
    return 0;
}

int run_stability(const CommonArgs& args) {
    json cfg = resolve_config(args);
    oco::harness::StabilityConfig sc;
    sc.rule = get_or<std::string>(cfg, "rule", "rerm");
    sc.sampler = get_or<std::string>(cfg, "sampler", "linear_unit");
    sc.d = get_or<int>(cfg, "d", 8);
    sc.n = get_or<int>(cfg, "n", 32);
    sc.trials = get_or<int>(cfg, "trials", 50);
    sc.lambda = get_or<double>(cfg, "lambda", 1.0);
    sc.master_seed = get_or<std::uint64_t>(cfg, "seed", 1);
    auto est = oco::harness::estimate_ro_stability(sc);
    json j;
    j["library_version"] = oco::harness::kLibraryVersion;
    j["config"] = cfg;
    j["estimate"] = est.estimate;
    j["stderr"] = est.stderr_;
    j["low_trial_warning"] = est.low_trial_warning;
    write_json(j, args.out_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online/stochastic convex learning experiments"};
    app.require_subcommand(1);

    CommonArgs args;
    if (const char* env = std::getenv("THREADS")) {
        args.threads = std::max(1, std::atoi(env));
    }
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", args.config_path, "flat JSON config file");
        sub->add_option("--out", args.out_path, "output path (.json for JSON, else CSV)");
        sub->add_option("--seed", args.seed, "master seed")->each([&](const std::string&) {
            args.seed_set = true;
        });
        sub->add_option("--trials", args.trials, "trial count")->each([&](const std::string&) {
            args.trials_set = true;
        });
        sub->add_option("--threads", args.threads, "worker threads for independent trials");
        sub->add_option("--set", args.overrides, "key=value config override (repeatable)");
    };

    auto* regret = app.add_subcommand("regret", "algorithm-vs-adversary regret runs");
    auto* counter = app.add_subcommand("counterexample",
                                       "empirical-minimization failure experiment");
    auto* oracle = app.add_subcommand("oracle-lb", "resisting-oracle suboptimality curves");
    auto* complexity = app.add_subcommand("complexity", "exact dimension calculators");
    auto* experts_cmd = app.add_subcommand("experts", "agnostic supervised experts run");
    auto* stability = app.add_subcommand("stability", "average replace-one stability estimate");
    for (auto* sub : {regret, counter, oracle, complexity, experts_cmd, stability}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return 0;  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (regret->parsed()) return run_regret(args);
        if (counter->parsed()) return run_counterexample(args);
        if (oracle->parsed()) return run_oracle_lb(args);
        if (complexity->parsed()) return run_complexity(args);
        if (experts_cmd->parsed()) return run_experts(args);
        if (stability->parsed()) return run_stability(args);
    } catch (const oco::CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
