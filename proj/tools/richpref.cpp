// richpref command line: pool construction, simulated experiments,
// rationality estimation and the session server.
#include <csignal>
#include <fstream>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "richpref/error.hpp"
#include "richpref/runner.hpp"
#include "richpref/service.hpp"

using namespace richpref;

namespace {

double parse_real(const std::string& s, const char* what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument, std::string("bad value for ") + what + ": '" + s + "'");
    }
}

FeatureVector parse_theta(const std::string& text) {
    FeatureVector v{};
    std::stringstream ss(text);
    std::string item;
    std::size_t i = 0;
    while (std::getline(ss, item, ',')) {
        if (i >= kFeatureCount) throw Error(ErrorCode::InvalidArgument, "theta needs exactly 7 values");
        v[i++] = parse_real(item, "theta");
    }
    if (i != kFeatureCount) throw Error(ErrorCode::InvalidArgument, "theta needs exactly 7 values");
    return v;
}

struct PoolArgs {
    std::string out = "pool.json";
    std::size_t environments = 40;
    std::size_t rewards = 19;
    std::size_t pool_size = 500;
    std::uint64_t env_seed = 5;
    std::uint64_t reward_seed = 6;
    std::uint64_t pool_seed = 11;
    std::size_t horizon = 10;
    std::size_t candidates = 200;
    std::size_t discrete_levels = 0;
    std::size_t threads = 0;
};

int build_pool_cmd(const PoolArgs& a) {
    PoolConfig cfg;
    cfg.pool_size = a.pool_size;
    cfg.seed = a.pool_seed;
    cfg.world.horizon = a.horizon;
    cfg.optimizer.candidates = a.candidates;
    cfg.optimizer.discrete_levels = a.discrete_levels;
    cfg.threads = a.threads;
    const auto envs = generate_environments(a.environments, a.env_seed, cfg.world);
    const auto thetas = sample_plausible_rewards(a.rewards, a.reward_seed, envs.front(), cfg.world, cfg.optimizer);
    QueryPool pool = build_pool(envs, thetas, cfg);
    pool.provenance.environment_seed = a.env_seed;
    pool.provenance.reward_seed = a.reward_seed;
    save_pool(a.out, pool);
    std::printf("wrote %zu queries (%zu environments, %zu rewards, at most %zu distinct pairs) to %s\n",
                pool.queries.size(), envs.size(), thetas.size(), distinct_pair_bound(envs.size(), thetas.size()),
                a.out.c_str());
    if (pool.queries.size() < a.pool_size) {
        std::fprintf(stderr, "warning: requested %zu queries, only %zu available\n", a.pool_size,
                     pool.queries.size());
    }
    return 0;
}

struct RunArgs {
    std::string config_path;
    std::string pool_path;
    std::string mode;
    std::string beta_c_model, beta_f_model, epsilon_model;
    std::string sim_beta_c, sim_beta_f, sim_epsilon;
    std::optional<std::size_t> budget, gt_count, repetitions, hypotheses, test_envs, threads;
    std::optional<std::uint64_t> hypothesis_seed, gt_seed, user_seed, test_env_seed;
    bool no_regret = false;
    std::string out = "results";
};

void add_run_flags(CLI::App* cmd, RunArgs& a) {
    cmd->add_option("--config", a.config_path, "experiment JSON; flags override its fields");
    cmd->add_option("--pool", a.pool_path, "query pool JSON");
    cmd->add_option("--mode", a.mode, "rich | comparison_only | rich_with_skip");
    cmd->add_option("--beta-c-model", a.beta_c_model, "model comparison rationality (inf allowed)");
    cmd->add_option("--beta-f-model", a.beta_f_model, "model feature rationality (inf allowed)");
    cmd->add_option("--epsilon-model", a.epsilon_model, "model skip half-width");
    cmd->add_option("--sim-beta-c", a.sim_beta_c, "simulated user comparison rationality");
    cmd->add_option("--sim-beta-f", a.sim_beta_f, "simulated user feature rationality");
    cmd->add_option("--sim-epsilon", a.sim_epsilon, "simulated user skip half-width (omit: never skips)");
    cmd->add_option("--budget", a.budget, "queries per run");
    cmd->add_option("--gts", a.gt_count, "number of ground-truth rewards");
    cmd->add_option("--reps", a.repetitions, "repetitions per ground truth");
    cmd->add_option("--hypotheses", a.hypotheses, "hypothesis set size");
    cmd->add_option("--test-envs", a.test_envs, "test environments for regret");
    cmd->add_option("--hypothesis-seed", a.hypothesis_seed);
    cmd->add_option("--gt-seed", a.gt_seed);
    cmd->add_option("--user-seed", a.user_seed);
    cmd->add_option("--test-env-seed", a.test_env_seed);
    cmd->add_option("--threads", a.threads, "worker threads (0 = all cores)");
    cmd->add_flag("--no-regret", a.no_regret, "skip regret evaluation");
    cmd->add_option("--out", a.out, "output directory");
}

ExperimentConfig make_config(const RunArgs& a) {
    ExperimentConfig cfg = a.config_path.empty() ? ExperimentConfig{} : load_experiment_config(a.config_path);
    if (!a.pool_path.empty()) cfg.pool_path = a.pool_path;
    if (!a.mode.empty()) cfg.mode = parse_mode(a.mode);
    if (!a.beta_c_model.empty()) cfg.model.beta_c = parse_real(a.beta_c_model, "--beta-c-model");
    if (!a.beta_f_model.empty()) cfg.model.beta_f = parse_real(a.beta_f_model, "--beta-f-model");
    if (!a.epsilon_model.empty()) cfg.model.epsilon = parse_real(a.epsilon_model, "--epsilon-model");
    if (!a.sim_beta_c.empty()) cfg.sim_beta_c = parse_real(a.sim_beta_c, "--sim-beta-c");
    if (!a.sim_beta_f.empty()) cfg.sim_beta_f = parse_real(a.sim_beta_f, "--sim-beta-f");
    if (!a.sim_epsilon.empty()) cfg.sim_epsilon = parse_real(a.sim_epsilon, "--sim-epsilon");
    if (a.budget) cfg.budget = *a.budget;
    if (a.gt_count) cfg.gt_count = *a.gt_count;
    if (a.repetitions) cfg.repetitions = *a.repetitions;
    if (a.hypotheses) cfg.hypothesis_count = *a.hypotheses;
    if (a.test_envs) cfg.test_environments = *a.test_envs;
    if (a.threads) cfg.threads = *a.threads;
    if (a.hypothesis_seed) cfg.hypothesis_seed = *a.hypothesis_seed;
    if (a.gt_seed) cfg.gt_seed = *a.gt_seed;
    if (a.user_seed) cfg.user_seed = *a.user_seed;
    if (a.test_env_seed) cfg.test_env_seed = *a.test_env_seed;
    if (a.no_regret) cfg.compute_regret = false;
    if (cfg.pool_path.empty()) throw Error(ErrorCode::InvalidArgument, "--pool is required");
    cfg.validate();
    return cfg;
}

int run_cmd(const RunArgs& a, bool scatter_only) {
    ExperimentConfig cfg = make_config(a);
    if (scatter_only) cfg.compute_regret = false;
    auto pool = std::make_shared<const QueryPool>(load_pool(cfg.pool_path));
    const Experiment experiment(cfg, pool);
    const SuiteResult result = experiment.run_suite();
    if (scatter_only) {
        std::filesystem::create_directories(a.out);
        std::ofstream out(std::filesystem::path(a.out) / "scatter.csv", std::ios::binary | std::ios::trunc);
        write_scatter_csv(out, scatter_export(experiment, result.runs));
    } else {
        write_suite_outputs(a.out, experiment, result);
    }
    std::printf("%zu runs completed, %zu failed; outputs in %s\n", result.runs.size(), result.failures.size(),
                a.out.c_str());
    for (const auto& f : result.failures) {
        std::fprintf(stderr, "run gt=%zu rep=%zu failed: %s\n", f.gt, f.rep, f.message.c_str());
    }
    return result.failures.empty() ? 0 : 1;
}

struct BetaArgs {
    std::string log_path;
    std::string theta;
    std::string beta_c;
};

int estimate_cmd(const BetaArgs& a) {
    const AnswerLog log = load_answer_log(a.log_path);
    const FeatureVector theta = parse_theta(a.theta);
    const BetaEstimate c = estimate_beta_c(log, theta);
    std::printf("beta_c %.6g (log-likelihood %.6g)%s\n", c.beta, c.log_likelihood,
                c.degenerate ? " [separable: increasing at grid edge]" : "");
    const double beta_c_star = a.beta_c.empty() ? c.beta : parse_real(a.beta_c, "--beta-c");
    try {
        const BetaEstimate f = estimate_beta_f(log, theta, beta_c_star);
        std::printf("beta_f %.6g (log-likelihood %.6g)%s\n", f.beta, f.log_likelihood,
                    f.degenerate ? " [increasing at grid edge]" : "");
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NoFeatureAnswers) throw;
        std::printf("beta_f n/a (no feature answers in the log)\n");
    }
    return 0;
}

struct ServeArgs {
    std::vector<std::string> pools;
    std::string state_dir = "sessions";
    std::string host = "127.0.0.1";
    int port = 8080;
    std::size_t budget = 20;
    std::string beta_c = "2.0";
    std::string beta_f = "2.5";
    std::string epsilon = "0";
};

HttpService* g_service = nullptr;

void on_signal(int) {
    if (g_service) g_service->stop();
}

int serve_cmd(const ServeArgs& a) {
    std::map<std::string, std::shared_ptr<const QueryPool>> pools;
    for (const auto& spec : a.pools) {
        const auto eq = spec.find('=');
        const std::string name = eq == std::string::npos ? "default" : spec.substr(0, eq);
        const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
        pools[name] = std::make_shared<const QueryPool>(load_pool(path));
    }
    ServiceConfig cfg;
    cfg.state_dir = a.state_dir;
    cfg.default_budget = a.budget;
    cfg.model = {parse_real(a.beta_c, "--beta-c"), parse_real(a.beta_f, "--beta-f"),
                 parse_real(a.epsilon, "--epsilon")};
    SessionStore store(cfg, std::move(pools));
    HttpService service(store);
    const int port = service.bind(a.host, a.port);
    g_service = &service;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::printf("serving %zu sessions on http://%s:%d\n", store.session_ids().size(), a.host.c_str(), port);
    std::fflush(stdout);
    service.listen();
    g_service = nullptr;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Active reward learning from comparisons and feature answers"};
    app.require_subcommand(1);

    auto* pool_cmd = app.add_subcommand("pool", "query pool operations");
    pool_cmd->require_subcommand(1);
    PoolArgs pool_args;
    auto* build = pool_cmd->add_subcommand("build", "optimize trajectories and assemble a query pool");
    build->add_option("--out", pool_args.out, "output file");
    build->add_option("--environments", pool_args.environments);
    build->add_option("--rewards", pool_args.rewards, "plausible rewards to sample");
    build->add_option("--size", pool_args.pool_size, "queries in the pool");
    build->add_option("--env-seed", pool_args.env_seed);
    build->add_option("--reward-seed", pool_args.reward_seed);
    build->add_option("--seed", pool_args.pool_seed, "subsampling seed");
    build->add_option("--horizon", pool_args.horizon);
    build->add_option("--candidates", pool_args.candidates, "random-shooting candidates");
    build->add_option("--discrete-levels", pool_args.discrete_levels, "0 = continuous controls");
    build->add_option("--threads", pool_args.threads);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "simulated learning runs; writes CSV tables");
    add_run_flags(run, run_args);

    RunArgs scatter_args;
    auto* scatter = app.add_subcommand("scatter", "final-belief scatter of (theta . theta_gt, P(theta))");
    add_run_flags(scatter, scatter_args);

    BetaArgs beta_args;
    auto* beta = app.add_subcommand("estimate-beta", "grid MLE of the rationality coefficients");
    beta->add_option("--log", beta_args.log_path, "answer log JSON")->required();
    beta->add_option("--theta", beta_args.theta, "reward weights, 7 comma-separated values")->required();
    beta->add_option("--beta-c", beta_args.beta_c, "hold beta_c fixed when fitting beta_f");

    ServeArgs serve_args;
    auto* serve = app.add_subcommand("serve", "HTTP session service");
    serve->add_option("--pool", serve_args.pools, "pool file, or name=file; repeatable")->required();
    serve->add_option("--state-dir", serve_args.state_dir);
    serve->add_option("--host", serve_args.host);
    serve->add_option("--port", serve_args.port);
    serve->add_option("--budget", serve_args.budget, "training queries per session");
    serve->add_option("--beta-c", serve_args.beta_c, "model comparison rationality");
    serve->add_option("--beta-f", serve_args.beta_f, "model feature rationality");
    serve->add_option("--epsilon", serve_args.epsilon, "model skip half-width");

    CLI11_PARSE(app, argc, argv);

    try {
        if (build->parsed()) return build_pool_cmd(pool_args);
        if (run->parsed()) return run_cmd(run_args, false);
        if (scatter->parsed()) return run_cmd(scatter_args, true);
        if (beta->parsed()) return estimate_cmd(beta_args);
        if (serve->parsed()) return serve_cmd(serve_args);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
