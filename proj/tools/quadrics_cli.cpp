// Command-line front door for the quadric-search toolkit.
//
// Subcommands: generate, build-system, normalize, reward, count, baseline,
// delta-sweep, reproduce-scaling, train, evaluate. Every artifact embeds the
// tool version, the effective config, and the seed; reruns with the same
// config, seed, and workers=1 reproduce numeric payloads byte for byte
// (wall-clock timings are reported separately on stderr or in *_wall_time
// columns and are exempt).

#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "quadrics/baseline.hpp"
#include "quadrics/errors.hpp"
#include "quadrics/power_flow.hpp"
#include "quadrics/reward.hpp"
#include "quadrics/root_oracle.hpp"
#include "quadrics/stats.hpp"
#include "quadrics/td3.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace quadrics;

namespace {

constexpr const char* kVersion = "0.1.0";

int default_workers() {
    if (const char* env = std::getenv("QUADRICS_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    json j;
    in >> j;
    return j;
}

json artifact(std::uint64_t seed, json config, json payload) {
    json j;
    j["tool"] = "quadrics";
    j["version"] = kVersion;
    j["seed"] = seed;
    j["config"] = std::move(config);
    j["payload"] = std::move(payload);
    return j;
}

void emit(const json& j, const std::string& out) {
    if (out.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        if (const fs::path parent = fs::path(out).parent_path(); !parent.empty())
            fs::create_directories(parent);
        std::ofstream f(out);
        if (!f) throw ValidationError("cannot open " + out + " for writing");
        f << j.dump(2) << "\n";
    }
}

std::string csv_header_line(std::uint64_t seed, const json& config) {
    return "# tool=quadrics version=" + std::string(kVersion) +
           " seed=" + std::to_string(seed) + " config=" + config.dump();
}

// values from a --config file fill in anything the user did not pass as a flag
template <typename T>
void cfg_fill(const json& cfg, const char* key, CLI::App* cmd, const std::string& flag, T& val) {
    if (cfg.contains(key) && cmd->count(flag) == 0) val = cfg.at(key).get<T>();
}

double parse_eps(const std::string& eps) {
    if (eps == "auto") return 0.0;
    try {
        std::size_t used = 0;
        const double v = std::stod(eps, &used);
        if (used != eps.size()) throw std::invalid_argument(eps);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("--eps must be a number or 'auto'");
    }
}

// one experiment directory per process
class DirLock {
public:
    explicit DirLock(const fs::path& dir) : path_(dir / "lock") {
        fs::create_directories(dir);
        if (fs::exists(path_))
            throw ValidationError("experiment directory is locked: " + path_.string());
        std::ofstream(path_) << "pid " << ::getpid() << "\n";
    }
    ~DirLock() {
        std::error_code ec;
        fs::remove(path_, ec);
    }

private:
    fs::path path_;
};

std::string timestamp_dir() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", std::localtime(&t));
    return buf;
}

fs::path experiment_dir(const std::string& out_dir, const std::string& experiment_id) {
    if (!out_dir.empty()) return out_dir;
    return fs::path("runs") / experiment_id / timestamp_dir();
}

json strip_wall_time(json j) {
    j.erase("wall_time");
    if (j.contains("diagnostics")) j["diagnostics"].erase("wall_time");
    return j;
}

struct ScalingFlags {
    double tol = 1e-10;
    int max_iters = 500;
    int corrector = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--scaling-tol", tol, "gradient tolerance for the scaling solve");
        cmd->add_option("--scaling-max-iters", max_iters, "quasi-Newton iteration cap");
        cmd->add_option("--corrector", corrector, "Newton corrector steps after convergence");
    }
    ScalingOptions options() const {
        ScalingOptions o;
        o.gradient_tolerance = tol;
        o.max_iterations = max_iters;
        o.corrector_steps = corrector;
        return o;
    }
    json to_json() const {
        return {{"scaling_tol", tol}, {"scaling_max_iters", max_iters}, {"corrector", corrector}};
    }
};

struct RewardFlags {
    double delta = 0.05;
    int points = 100000;
    int tuples = 2500;
    std::string eps = "auto";
    int workers = default_workers();
    bool log_transform = false;
    bool variance_rescale = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--delta", delta, "perturbation size (0 < delta <= 1/n)");
        cmd->add_option("--points,-N", points, "Monte-Carlo points per tuple");
        cmd->add_option("--tuples,-M", tuples, "perturbation tuples");
        cmd->add_option("--eps", eps, "annulus width, a number or 'auto' = max(4/sqrt(n), 0.1)");
        cmd->add_option("--workers", workers, "thread budget (env QUADRICS_THREADS)");
        cmd->add_flag("--log-transform", log_transform, "report log(1 + estimate)");
        cmd->add_flag("--variance-rescale", variance_rescale, "rescale the update by delta^-2");
    }
    RewardConfig config(std::uint64_t seed) const {
        RewardConfig c;
        c.delta = delta;
        c.num_points = points;
        c.num_tuples = tuples;
        c.epsilon = parse_eps(eps);
        c.seed = seed;
        c.workers = workers;
        c.log_transform = log_transform;
        c.variance_rescale = variance_rescale;
        return c;
    }
    json to_json() const {
        return {{"delta", delta},     {"points", points},
                {"tuples", tuples},   {"eps", eps},
                {"workers", workers}, {"log_transform", log_transform},
                {"variance_rescale", variance_rescale}};
    }
};

// ---------------------------------------------------------------- generate

int cmd_generate(const std::string& kind, int n, std::uint64_t seed, double edge_prob,
                 const std::string& out, const std::string& network_out) {
    Rng rng(seed);
    json config = {{"kind", kind}, {"n", n}, {"edge_prob", edge_prob}};
    QuadricSystem system;
    json payload;
    if (kind == "gaussian") {
        system = random_gaussian_system(n, rng);
    } else if (kind == "power") {
        const PowerNetwork net = random_network(n, edge_prob, rng);
        system = random_definite_combination(build_raw_forms(net), rng);
        if (!network_out.empty()) save_network(net, network_out);
        payload["network"] = network_to_json(net);
    } else {
        throw ValidationError("--kind must be 'gaussian' or 'power'");
    }
    payload["system"] = to_json(system);
    emit(artifact(seed, config, payload), out);
    return 0;
}

QuadricSystem load_system_artifact(const std::string& path) {
    const json j = load_json_file(path);
    if (j.contains("payload") && j.at("payload").contains("system"))
        return system_from_json(j.at("payload").at("system"));
    if (j.contains("system")) return system_from_json(j.at("system"));
    return system_from_json(j);
}

int cmd_build_system(const std::string& network_path, std::uint64_t seed, const std::string& out) {
    const PowerNetwork net = load_network(network_path);
    Rng rng(seed);
    const QuadricSystem system = random_definite_combination(build_raw_forms(net), rng);
    json payload = {{"system", to_json(system)}, {"network", network_to_json(net)}};
    emit(artifact(seed, {{"network", network_path}}, payload), out);
    return 0;
}

int cmd_normalize(const std::string& system_path, const ScalingFlags& scaling,
                  std::uint64_t seed, const std::string& out) {
    const QuadricSystem system = load_system_artifact(system_path);
    const NormalizedSystem ns = normalize(system, scaling.options());
    std::cerr << "normalize: " << ns.iterations << " iterations, " << ns.wall_time << " s\n";
    json config = scaling.to_json();
    config["system"] = system_path;
    emit(artifact(seed, config, strip_wall_time(to_json(ns))), out);
    return 0;
}

int cmd_reward(const std::string& system_path, const RewardFlags& reward,
               const ScalingFlags& scaling, std::uint64_t seed, const std::string& out) {
    const QuadricSystem system = load_system_artifact(system_path);
    const RewardEstimate est = reward_pipeline(system, reward.config(seed), scaling.options());
    json config = reward.to_json();
    config["system"] = system_path;
    config.update(scaling.to_json());
    emit(artifact(seed, config, to_json(est)), out);
    return 0;
}

int cmd_count(const std::string& system_path, OracleOptions opts, bool count_only,
              const std::string& out) {
    const QuadricSystem system = load_system_artifact(system_path);
    const RootCountResult res = count_real_solutions(system, opts);
    json config = {{"system", system_path},
                   {"max_dim", opts.max_dim},
                   {"starts", opts.starts},
                   {"workers", opts.workers},
                   {"count_only", count_only}};
    emit(artifact(opts.seed, config, to_json(res, !count_only)), out);
    return 0;
}

int cmd_baseline(int n, std::uint64_t seed, const std::string& out) {
    emit(artifact(seed, {{"n", n}}, baseline::to_json(baseline::make_report(n))), out);
    return 0;
}

// ------------------------------------------------------------- delta-sweep

int cmd_delta_sweep(int n, int num_systems, std::vector<double> deltas, int points, int tuples,
                    bool heuristic, std::uint64_t seed, int workers, const std::string& out_dir) {
    OracleOptions oracle;
    oracle.workers = workers;
    if (n > oracle.max_dim) {
        if (!heuristic)
            throw RefusalError("oracle refuses n = " + std::to_string(n) +
                               "; pass --heuristic to label with the multi-start counter anyway");
        oracle.max_dim = n;
    }
    std::sort(deltas.begin(), deltas.end());

    const fs::path dir = experiment_dir(out_dir, "delta-sweep");
    DirLock lock(dir);
    fs::create_directories(dir / "tables");
    fs::create_directories(dir / "systems");

    json config = {{"n", n},           {"systems", num_systems}, {"deltas", deltas},
                   {"points", points}, {"tuples", tuples},       {"heuristic", heuristic},
                   {"workers", workers}};
    emit(artifact(seed, config, json::object()), (dir / "config.json").string());

    std::vector<double> true_counts(num_systems);
    std::vector<std::vector<double>> estimates(deltas.size(), std::vector<double>(num_systems));
    for (int s = 0; s < num_systems; ++s) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(s));
        const QuadricSystem system = random_gaussian_system(n, rng);
        save_system(system, (dir / "systems" / ("system_" + std::to_string(s) + ".json")).string());
        oracle.seed = mix_seed(seed, 0xacULL, static_cast<std::uint64_t>(s));
        true_counts[s] = static_cast<double>(count_real_solutions(system, oracle).count);
        const NormalizedSystem ns = normalize(system);
        for (std::size_t d = 0; d < deltas.size(); ++d) {
            RewardConfig rc;
            rc.delta = deltas[d];
            rc.num_points = points;
            rc.num_tuples = tuples;
            rc.seed = mix_seed(seed, static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(d));
            rc.workers = workers;
            estimates[d][s] = estimate_reward(ns, rc).value;
        }
        std::cerr << "system " << s << ": true count " << true_counts[s] << "\n";
    }

    std::ofstream sweep(dir / "tables" / "sweep.csv");
    sweep << csv_header_line(seed, config) << "\n";
    sweep.precision(17);
    sweep << "system,true_count";
    for (const double d : deltas) sweep << ",estimate_delta_" << d;
    sweep << "\n";
    for (int s = 0; s < num_systems; ++s) {
        sweep << s << "," << true_counts[s];
        for (std::size_t d = 0; d < deltas.size(); ++d) sweep << "," << estimates[d][s];
        sweep << "\n";
    }

    std::ofstream corr(dir / "tables" / "rank_correlation.csv");
    corr << csv_header_line(seed, config) << "\n";
    corr.precision(17);
    corr << "delta,spearman\n";
    for (std::size_t d = 0; d < deltas.size(); ++d)
        corr << deltas[d] << "," << spearman_rank_correlation(true_counts, estimates[d]) << "\n";
    std::cerr << "wrote " << (dir / "tables").string() << "\n";
    return 0;
}

// -------------------------------------------------------- reproduce-scaling

int cmd_reproduce_scaling(std::vector<int> sizes, int systems_per_size, int corrector,
                          std::uint64_t seed, const std::string& out_dir) {
    const fs::path dir = experiment_dir(out_dir, "reproduce-scaling");
    DirLock lock(dir);
    fs::create_directories(dir / "tables");

    json config = {{"sizes", sizes}, {"systems_per_size", systems_per_size},
                   {"corrector", corrector}};
    emit(artifact(seed, config, json::object()), (dir / "config.json").string());

    std::ofstream table(dir / "tables" / "scaling.csv");
    table << csv_header_line(seed, config) << "\n";
    table.precision(17);
    table << "n,systems,mean_wall_time,mean_trace_distance,mean_summation_distance,"
             "corrector_success_rate,failures\n";
    for (const int n : sizes) {
        double time_sum = 0.0, trace_sum = 0.0, summ_sum = 0.0;
        int ok = 0, corrector_ok = 0, failures = 0;
        for (int s = 0; s < systems_per_size; ++s) {
            Rng rng = Rng::stream(seed, mix_seed(static_cast<std::uint64_t>(n),
                                                 static_cast<std::uint64_t>(s)));
            const QuadricSystem system = random_gaussian_system(n, rng);
            ScalingOptions opts;
            opts.corrector_steps = corrector;
            try {
                const NormalizedSystem ns = normalize(system, opts);
                time_sum += ns.wall_time;
                trace_sum += ns.trace_distance;
                summ_sum += ns.summation_distance;
                ++ok;
                if (!ns.corrector_failed) ++corrector_ok;
            } catch (const std::exception& e) {
                ++failures;
                std::cerr << "n=" << n << " system " << s << " failed: " << e.what() << "\n";
            }
        }
        if (ok == 0) {
            table << n << "," << 0 << ",,,,," << failures << "\n";
            continue;
        }
        table << n << "," << ok << "," << time_sum / ok << "," << trace_sum / ok << ","
              << summ_sum / ok << "," << static_cast<double>(corrector_ok) / ok << "," << failures
              << "\n";
        std::cerr << "n=" << n << ": mean trace distance " << trace_sum / ok << ", mean time "
                  << time_sum / ok << " s\n";
    }
    std::cerr << "wrote " << (dir / "tables" / "scaling.csv").string() << "\n";
    return 0;
}

// ----------------------------------------------------------- train/evaluate

EnvConfig env_from_flags(int n, int episode_length, double action_cap, const RewardFlags& reward,
                         std::uint64_t seed) {
    EnvConfig e;
    e.n = n;
    e.episode_length = episode_length;
    e.action_cap = action_cap;
    e.reward_cfg = reward.config(seed);
    e.seed = seed;
    return e;
}

int cmd_train(const EnvConfig& env_cfg, td3::TrainConfig train_cfg, const RewardFlags& reward,
              const std::string& out_dir, const std::string& resume) {
    const fs::path dir = experiment_dir(out_dir, "train");
    DirLock lock(dir);
    fs::create_directories(dir / "logs");

    json config = {{"n", env_cfg.n},
                   {"episode_length", env_cfg.episode_length},
                   {"action_cap", env_cfg.action_cap},
                   {"reward", reward.to_json()},
                   {"total_steps", train_cfg.total_steps},
                   {"warmup_steps", train_cfg.warmup_steps},
                   {"batch_size", train_cfg.batch_size},
                   {"checkpoint_interval", train_cfg.checkpoint_interval}};
    emit(artifact(train_cfg.seed, config, json::object()), (dir / "config.json").string());

    const td3::TrainResult result = td3::train(env_cfg, train_cfg, dir.string(), resume);
    td3::write_train_log_csv(result.log, (dir / "logs" / "train_log.csv").string());
    td3::save_agent(result.agent, (dir / "agent.json").string());
    std::cerr << "wrote " << (dir / "agent.json").string() << "\n";
    return 0;
}

int cmd_evaluate(const EnvConfig& env_cfg, const std::string& agent_path, td3::EvalConfig eval_cfg,
                 const std::string& out_dir) {
    const fs::path dir = experiment_dir(out_dir, "evaluate");
    DirLock lock(dir);
    fs::create_directories(dir / "tables");

    json config = {{"n", env_cfg.n},       {"agent", agent_path},
                   {"runs", eval_cfg.runs}, {"steps", eval_cfg.steps},
                   {"oracle", eval_cfg.use_oracle}, {"thresholds", eval_cfg.thresholds}};
    emit(artifact(eval_cfg.seed, config, json::object()), (dir / "config.json").string());

    td3::Agent agent;
    const bool have_agent = !agent_path.empty();
    if (have_agent) agent = td3::load_agent(agent_path);

    const td3::EvalResult random_res = td3::evaluate_policy(nullptr, env_cfg, eval_cfg);
    td3::write_eval_csv(random_res, eval_cfg, (dir / "tables" / "eval_random.csv").string());

    json payload;
    payload["random"] = {{"average_count", random_res.average_count},
                         {"mean_reward", random_res.rewards.mean()}};
    if (have_agent) {
        const td3::EvalResult agent_res = td3::evaluate_policy(&agent, env_cfg, eval_cfg);
        td3::write_eval_csv(agent_res, eval_cfg, (dir / "tables" / "eval_agent.csv").string());
        payload["agent"] = {{"average_count", agent_res.average_count},
                            {"mean_reward", agent_res.rewards.mean()}};
    }
    emit(artifact(eval_cfg.seed, config, payload), (dir / "summary.json").string());
    std::cerr << "wrote " << (dir / "summary.json").string() << "\n";
    return 0;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"quadric-search toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    std::string config_path;
    std::uint64_t seed = 0;
    std::string out;
    std::string out_dir;

    // generate
    auto* gen = app.add_subcommand("generate", "sample a random quadric system");
    std::string gen_kind = "gaussian";
    int gen_n = 10;
    double gen_edge_prob = 0.3;
    std::string gen_network_out;
    gen->add_option("--config", config_path, "JSON config file; flags override");
    gen->add_option("--kind", gen_kind, "gaussian or power");
    gen->add_option("--n", gen_n, "dimension (bus count for --kind power)");
    gen->add_option("--edge-prob", gen_edge_prob, "extra-edge probability for power networks");
    gen->add_option("--seed", seed, "root seed");
    gen->add_option("--out", out, "output JSON path (default stdout)");
    gen->add_option("--network-out", gen_network_out, "also save the sampled network here");

    // build-system
    auto* build = app.add_subcommand("build-system",
                                     "definite quadric system from a power network file");
    std::string build_network;
    build->add_option("--config", config_path, "JSON config file; flags override");
    build->add_option("--network", build_network, "network JSON file")->required();
    build->add_option("--seed", seed, "root seed");
    build->add_option("--out", out, "output JSON path (default stdout)");

    // normalize
    auto* norm = app.add_subcommand("normalize", "scale a system to near-isotropic form");
    std::string norm_system;
    ScalingFlags norm_scaling;
    norm->add_option("--config", config_path, "JSON config file; flags override");
    norm->add_option("--system", norm_system, "system JSON file")->required();
    norm_scaling.attach(norm);
    norm->add_option("--seed", seed, "recorded in the artifact header");
    norm->add_option("--out", out, "output JSON path (default stdout)");

    // reward
    auto* rew = app.add_subcommand("reward", "Monte-Carlo root-count estimate");
    std::string rew_system;
    RewardFlags rew_flags;
    ScalingFlags rew_scaling;
    rew->add_option("--config", config_path, "JSON config file; flags override");
    rew->add_option("--system", rew_system, "system JSON file")->required();
    rew_flags.attach(rew);
    rew_scaling.attach(rew);
    rew->add_option("--seed", seed, "root seed");
    rew->add_option("--out", out, "output JSON path (default stdout)");

    // count
    auto* count = app.add_subcommand("count", "multi-start Newton root count");
    std::string count_system;
    OracleOptions count_opts;
    count_opts.workers = default_workers();
    bool count_only = false;
    count->add_option("--config", config_path, "JSON config file; flags override");
    count->add_option("--system", count_system, "system JSON file")->required();
    count->add_option("--max-dim", count_opts.max_dim, "refuse systems above this dimension");
    count->add_option("--starts", count_opts.starts, "Newton starts (0 = automatic)");
    count->add_option("--workers", count_opts.workers, "thread budget");
    count->add_option("--seed", count_opts.seed, "root seed");
    count->add_flag("--count-only", count_only, "omit the solution list from the output");
    count->add_option("--out", out, "output JSON path (default stdout)");

    // baseline
    auto* base = app.add_subcommand("baseline", "average-case closed-form quantities");
    int base_n = 10;
    base->add_option("--config", config_path, "JSON config file; flags override");
    base->add_option("--n", base_n, "dimension");
    base->add_option("--seed", seed, "recorded in the artifact header");
    base->add_option("--out", out, "output JSON path (default stdout)");

    // delta-sweep
    auto* sweep = app.add_subcommand("delta-sweep",
                                     "estimate-vs-oracle ranking across perturbation sizes");
    int sweep_n = 6;
    int sweep_systems = 20;
    std::vector<double> sweep_deltas = {0.01, 0.02, 0.04, 0.08};
    int sweep_points = 20000;
    int sweep_tuples = 500;
    int sweep_workers = default_workers();
    bool sweep_heuristic = false;
    bool sweep_full_scale = false;
    sweep->add_option("--config", config_path, "JSON config file; flags override");
    sweep->add_option("--n", sweep_n, "dimension");
    sweep->add_option("--systems", sweep_systems, "number of random systems");
    sweep->add_option("--deltas", sweep_deltas, "perturbation sizes")->delimiter(',');
    sweep->add_option("--points", sweep_points, "Monte-Carlo points per tuple");
    sweep->add_option("--tuples", sweep_tuples, "perturbation tuples");
    sweep->add_option("--workers", sweep_workers, "thread budget");
    sweep->add_flag("--heuristic", sweep_heuristic, "label with the heuristic counter above n=10");
    sweep->add_flag("--full-scale", sweep_full_scale, "full budgets: N=100000, M=2500");
    sweep->add_option("--seed", seed, "root seed");
    sweep->add_option("--out-dir", out_dir, "experiment directory (default runs/<id>/<ts>)");

    // reproduce-scaling
    auto* scale = app.add_subcommand("reproduce-scaling", "normalization accuracy/time table");
    std::vector<int> scale_sizes = {50, 100, 150};
    int scale_systems = 10;
    int scale_corrector = 2;
    bool scale_full_scale = false;
    scale->add_option("--config", config_path, "JSON config file; flags override");
    scale->add_option("--sizes", scale_sizes, "system dimensions")->delimiter(',');
    scale->add_option("--systems-per-size", scale_systems, "systems per dimension");
    scale->add_option("--corrector", scale_corrector, "Newton corrector steps");
    scale->add_flag("--full-scale", scale_full_scale, "sizes 50,150,250 with 50 systems each");
    scale->add_option("--seed", seed, "root seed");
    scale->add_option("--out-dir", out_dir, "experiment directory (default runs/<id>/<ts>)");

    // train
    auto* train = app.add_subcommand("train", "TD3 search over factor tuples");
    int train_n = 4;
    int train_episode_length = 10;
    double train_action_cap = 0.01;
    RewardFlags train_reward;
    train_reward.points = 2000;
    train_reward.tuples = 40;
    td3::TrainConfig train_cfg;
    std::string train_resume;
    train->add_option("--config", config_path, "JSON config file; flags override");
    train->add_option("--n", train_n, "dimension");
    train->add_option("--episode-length,-L", train_episode_length, "steps per episode");
    train->add_option("--action-cap", train_action_cap, "entrywise action bound");
    train_reward.attach(train);
    train->add_option("--steps", train_cfg.total_steps, "total environment steps");
    train->add_option("--warmup", train_cfg.warmup_steps, "random-action warmup steps");
    train->add_option("--batch", train_cfg.batch_size, "replay batch size");
    train->add_option("--buffer", train_cfg.buffer_capacity, "replay capacity");
    train->add_option("--checkpoint-interval", train_cfg.checkpoint_interval,
                      "steps between checkpoints (0 disables)");
    train->add_option("--resume", train_resume, "checkpoint.json to resume from");
    train->add_option("--seed", seed, "root seed");
    train->add_option("--out-dir", out_dir, "experiment directory (default runs/<id>/<ts>)");

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "roll out a policy and a random baseline");
    std::string eval_agent;
    int eval_n = 4;
    int eval_episode_length = 10;
    double eval_action_cap = 0.01;
    RewardFlags eval_reward;
    eval_reward.points = 2000;
    eval_reward.tuples = 40;
    td3::EvalConfig eval_cfg;
    eval->add_option("--config", config_path, "JSON config file; flags override");
    eval->add_option("--agent", eval_agent, "agent JSON (omit for random baseline only)");
    eval->add_option("--n", eval_n, "dimension");
    eval->add_option("--episode-length,-L", eval_episode_length, "steps per rollout");
    eval->add_option("--action-cap", eval_action_cap, "entrywise action bound");
    eval_reward.attach(eval);
    eval->add_option("--runs", eval_cfg.runs, "independent rollouts");
    eval->add_option("--steps", eval_cfg.steps, "steps per rollout");
    eval->add_option("--thresholds", eval_cfg.thresholds, "root-count thresholds")->delimiter(',');
    eval->add_flag("--oracle", eval_cfg.use_oracle, "count roots of each visited system");
    eval->add_option("--oracle-max-dim", eval_cfg.oracle.max_dim, "oracle refusal bound");
    eval->add_option("--seed", seed, "root seed");
    eval->add_option("--out-dir", out_dir, "experiment directory (default runs/<id>/<ts>)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    json cfg = json::object();
    if (!config_path.empty()) cfg = load_json_file(config_path);

    if (gen->parsed()) {
        cfg_fill(cfg, "kind", gen, "--kind", gen_kind);
        cfg_fill(cfg, "n", gen, "--n", gen_n);
        cfg_fill(cfg, "edge_prob", gen, "--edge-prob", gen_edge_prob);
        cfg_fill(cfg, "seed", gen, "--seed", seed);
        return cmd_generate(gen_kind, gen_n, seed, gen_edge_prob, out, gen_network_out);
    }
    if (build->parsed()) {
        cfg_fill(cfg, "seed", build, "--seed", seed);
        return cmd_build_system(build_network, seed, out);
    }
    if (norm->parsed()) {
        cfg_fill(cfg, "scaling_tol", norm, "--scaling-tol", norm_scaling.tol);
        cfg_fill(cfg, "scaling_max_iters", norm, "--scaling-max-iters", norm_scaling.max_iters);
        cfg_fill(cfg, "corrector", norm, "--corrector", norm_scaling.corrector);
        cfg_fill(cfg, "seed", norm, "--seed", seed);
        return cmd_normalize(norm_system, norm_scaling, seed, out);
    }
    if (rew->parsed()) {
        cfg_fill(cfg, "delta", rew, "--delta", rew_flags.delta);
        cfg_fill(cfg, "points", rew, "--points", rew_flags.points);
        cfg_fill(cfg, "tuples", rew, "--tuples", rew_flags.tuples);
        cfg_fill(cfg, "eps", rew, "--eps", rew_flags.eps);
        cfg_fill(cfg, "workers", rew, "--workers", rew_flags.workers);
        cfg_fill(cfg, "seed", rew, "--seed", seed);
        return cmd_reward(rew_system, rew_flags, rew_scaling, seed, out);
    }
    if (count->parsed()) {
        cfg_fill(cfg, "max_dim", count, "--max-dim", count_opts.max_dim);
        cfg_fill(cfg, "starts", count, "--starts", count_opts.starts);
        cfg_fill(cfg, "workers", count, "--workers", count_opts.workers);
        cfg_fill(cfg, "seed", count, "--seed", count_opts.seed);
        return cmd_count(count_system, count_opts, count_only, out);
    }
    if (base->parsed()) {
        cfg_fill(cfg, "n", base, "--n", base_n);
        return cmd_baseline(base_n, seed, out);
    }
    if (sweep->parsed()) {
        cfg_fill(cfg, "n", sweep, "--n", sweep_n);
        cfg_fill(cfg, "systems", sweep, "--systems", sweep_systems);
        cfg_fill(cfg, "deltas", sweep, "--deltas", sweep_deltas);
        cfg_fill(cfg, "points", sweep, "--points", sweep_points);
        cfg_fill(cfg, "tuples", sweep, "--tuples", sweep_tuples);
        cfg_fill(cfg, "seed", sweep, "--seed", seed);
        if (sweep_full_scale) {
            sweep_points = 100000;
            sweep_tuples = 2500;
        }
        return cmd_delta_sweep(sweep_n, sweep_systems, sweep_deltas, sweep_points, sweep_tuples,
                               sweep_heuristic, seed, sweep_workers, out_dir);
    }
    if (scale->parsed()) {
        cfg_fill(cfg, "sizes", scale, "--sizes", scale_sizes);
        cfg_fill(cfg, "systems_per_size", scale, "--systems-per-size", scale_systems);
        cfg_fill(cfg, "seed", scale, "--seed", seed);
        if (scale_full_scale) {
            scale_sizes = {50, 150, 250};
            scale_systems = 50;
        }
        return cmd_reproduce_scaling(scale_sizes, scale_systems, scale_corrector, seed, out_dir);
    }
    if (train->parsed()) {
        cfg_fill(cfg, "n", train, "--n", train_n);
        cfg_fill(cfg, "episode_length", train, "--episode-length", train_episode_length);
        cfg_fill(cfg, "action_cap", train, "--action-cap", train_action_cap);
        cfg_fill(cfg, "steps", train, "--steps", train_cfg.total_steps);
        cfg_fill(cfg, "warmup", train, "--warmup", train_cfg.warmup_steps);
        cfg_fill(cfg, "points", train, "--points", train_reward.points);
        cfg_fill(cfg, "tuples", train, "--tuples", train_reward.tuples);
        cfg_fill(cfg, "delta", train, "--delta", train_reward.delta);
        cfg_fill(cfg, "seed", train, "--seed", seed);
        train_cfg.seed = seed;
        return cmd_train(env_from_flags(train_n, train_episode_length, train_action_cap,
                                        train_reward, seed),
                         train_cfg, train_reward, out_dir, train_resume);
    }
    if (eval->parsed()) {
        cfg_fill(cfg, "n", eval, "--n", eval_n);
        cfg_fill(cfg, "episode_length", eval, "--episode-length", eval_episode_length);
        cfg_fill(cfg, "runs", eval, "--runs", eval_cfg.runs);
        cfg_fill(cfg, "steps", eval, "--steps", eval_cfg.steps);
        cfg_fill(cfg, "points", eval, "--points", eval_reward.points);
        cfg_fill(cfg, "tuples", eval, "--tuples", eval_reward.tuples);
        cfg_fill(cfg, "seed", eval, "--seed", seed);
        eval_cfg.seed = seed;
        return cmd_evaluate(env_from_flags(eval_n, eval_episode_length, eval_action_cap,
                                           eval_reward, seed),
                            eval_agent, eval_cfg, out_dir);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const RefusalError& e) {
        std::cerr << "refusal: " << e.what() << "\n";
        return 4;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}
