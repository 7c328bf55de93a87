#include "richpref/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json_convert.hpp"
#include "richpref/error.hpp"
#include "richpref/parallel.hpp"
#include "richpref/random.hpp"

namespace richpref {

using json_io::json;

namespace {

std::string num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    return out;
}

}  // namespace

void ExperimentConfig::validate() const {
    model.validate();
    RationalityParams sim{sim_beta_c, sim_beta_f, sim_epsilon.value_or(0.0)};
    sim.validate();
    if (mode == SelectionMode::InformationGain) {
        throw Error(ErrorCode::InvalidArgument, "information_gain selection is not implemented");
    }
    if (gt_count == 0) throw Error(ErrorCode::InvalidArgument, "gt_count must be at least 1");
    if (repetitions == 0) throw Error(ErrorCode::InvalidArgument, "repetitions must be at least 1");
    if (hypothesis_count < 2) throw Error(ErrorCode::InvalidArgument, "need at least two hypotheses");
    if (compute_regret && test_environments == 0) {
        throw Error(ErrorCode::InvalidArgument, "regret needs at least one test environment");
    }
    if (!pool_path.empty() && !std::filesystem::exists(pool_path)) {
        throw Error(ErrorCode::Io, "pool file not found: " + pool_path);
    }
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
    json j{{"schema", "richpref.experiment.v1"},
           {"pool_path", cfg.pool_path},
           {"mode", std::string(to_string(cfg.mode))},
           {"model", json_io::to_json(cfg.model)},
           {"sim",
            {{"beta_c", json_io::encode_real(cfg.sim_beta_c)},
             {"beta_f", json_io::encode_real(cfg.sim_beta_f)},
             {"epsilon", cfg.sim_epsilon ? json(*cfg.sim_epsilon) : json(nullptr)}}},
           {"budget", cfg.budget},
           {"gt_count", cfg.gt_count},
           {"repetitions", cfg.repetitions},
           {"hypothesis_count", cfg.hypothesis_count},
           {"test_environments", cfg.test_environments},
           {"compute_regret", cfg.compute_regret},
           {"close_threshold", cfg.close_threshold},
           {"seeds",
            {{"hypothesis", cfg.hypothesis_seed},
             {"gt", cfg.gt_seed},
             {"user", cfg.user_seed},
             {"test_env", cfg.test_env_seed}}},
           {"threads", cfg.threads}};
    return j.dump(1) + "\n";
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
    const json j = json_io::parse(text);
    json_io::expect_schema(j, "richpref.experiment.v1");
    try {
        ExperimentConfig cfg;
        cfg.pool_path = j.value("pool_path", cfg.pool_path);
        if (j.contains("mode")) cfg.mode = parse_mode(j["mode"].get<std::string>());
        if (j.contains("model")) cfg.model = json_io::rationality_from(j["model"]);
        if (j.contains("sim")) {
            const json& s = j["sim"];
            if (s.contains("beta_c")) cfg.sim_beta_c = json_io::decode_real(s["beta_c"]);
            if (s.contains("beta_f")) cfg.sim_beta_f = json_io::decode_real(s["beta_f"]);
            if (s.contains("epsilon") && !s["epsilon"].is_null()) cfg.sim_epsilon = s["epsilon"].get<double>();
        }
        cfg.budget = j.value("budget", cfg.budget);
        cfg.gt_count = j.value("gt_count", cfg.gt_count);
        cfg.repetitions = j.value("repetitions", cfg.repetitions);
        cfg.hypothesis_count = j.value("hypothesis_count", cfg.hypothesis_count);
        cfg.test_environments = j.value("test_environments", cfg.test_environments);
        cfg.compute_regret = j.value("compute_regret", cfg.compute_regret);
        cfg.close_threshold = j.value("close_threshold", cfg.close_threshold);
        if (j.contains("seeds")) {
            const json& s = j["seeds"];
            cfg.hypothesis_seed = s.value("hypothesis", cfg.hypothesis_seed);
            cfg.gt_seed = s.value("gt", cfg.gt_seed);
            cfg.user_seed = s.value("user", cfg.user_seed);
            cfg.test_env_seed = s.value("test_env", cfg.test_env_seed);
        }
        cfg.threads = j.value("threads", cfg.threads);
        return cfg;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Format, e.what());
    }
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    return experiment_config_from_json(json_io::read_file(path));
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw Error(ErrorCode::InvalidArgument, "percentile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + (values[hi] - values[lo]) * frac;
}

MetricStats describe(const std::vector<double>& values) {
    MetricStats s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    s.median = percentile(values, 0.5);
    s.p25 = percentile(values, 0.25);
    s.p75 = percentile(values, 0.75);
    return s;
}

std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& runs) {
    std::vector<AggregateRow> out;
    if (runs.empty()) return out;
    std::size_t length = runs.front().rows.size();
    for (const auto& r : runs) length = std::min(length, r.rows.size());
    for (std::size_t it = 0; it < length; ++it) {
        std::vector<double> p, c, d, g;
        bool have_regret = true;
        for (const auto& r : runs) {
            const IterationRow& row = r.rows[it];
            p.push_back(row.p_gt);
            c.push_back(row.close_mass);
            d.push_back(row.map_dot_gt);
            if (row.regret) g.push_back(*row.regret);
            else have_regret = false;
        }
        AggregateRow a;
        a.iteration = runs.front().rows[it].iteration;
        a.runs = runs.size();
        a.p_gt = describe(p);
        a.close_mass = describe(c);
        a.map_dot_gt = describe(d);
        if (have_regret) a.regret = describe(g);
        out.push_back(a);
    }
    return out;
}

RegretEvaluator::RegretEvaluator(std::vector<Environment> environments, WorldConfig world,
                                 OptimizerConfig optimizer, bool memoize)
    : environments_(std::move(environments)),
      world_(world),
      optimizer_(optimizer),
      memoize_(memoize) {
    if (environments_.empty()) throw Error(ErrorCode::InvalidArgument, "no test environments");
}

FeatureVector RegretEvaluator::optimal_phi(std::size_t env, const FeatureVector& theta) const {
    if (!memoize_) return optimize_trajectory(environments_.at(env), theta, world_, optimizer_).phi;
    const auto key = std::make_pair(env, theta);
    {
        std::lock_guard lock(mutex_);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    }
    const FeatureVector phi = optimize_trajectory(environments_.at(env), theta, world_, optimizer_).phi;
    std::lock_guard lock(mutex_);
    memo_.emplace(key, phi);
    return phi;
}

double RegretEvaluator::regret(const RewardWeights& theta_gt, const FeatureVector& learned) const {
    double total = 0.0;
    for (std::size_t e = 0; e < environments_.size(); ++e) {
        const FeatureVector best = optimal_phi(e, theta_gt.values());
        const FeatureVector mine = optimal_phi(e, learned);
        total += std::max(0.0, dot(theta_gt.values(), best - mine));
    }
    return total / static_cast<double>(environments_.size());
}

Experiment::Experiment(ExperimentConfig config, std::shared_ptr<const QueryPool> pool,
                       std::optional<std::vector<RewardWeights>> ground_truths)
    : config_(std::move(config)), pool_(std::move(pool)) {
    config_.validate();
    if (!pool_ || pool_->queries.empty()) throw Error(ErrorCode::UnknownPool, "empty query pool");
    if (config_.budget > pool_->queries.size()) {
        throw Error(ErrorCode::InvalidArgument, "budget exceeds the pool size");
    }
    if (ground_truths) {
        if (ground_truths->empty()) throw Error(ErrorCode::InvalidArgument, "no ground truths given");
        ground_truths_ = std::move(*ground_truths);
        config_.gt_count = ground_truths_.size();
    } else {
        ground_truths_ = sample_plausible_rewards(config_.gt_count, config_.gt_seed,
                                                  pool_->environments.front(), pool_->world,
                                                  pool_->optimizer);
    }
    if (config_.compute_regret) {
        regret_ = std::make_unique<RegretEvaluator>(
            generate_environments(config_.test_environments, config_.test_env_seed, pool_->world, "test"),
            pool_->world, pool_->optimizer);
    }
}

std::shared_ptr<const HypothesisSet> Experiment::hypotheses_for(std::size_t gt) const {
    return std::make_shared<const HypothesisSet>(HypothesisSet::sample_with_ground_truth(
        config_.hypothesis_count, mix_seed(config_.hypothesis_seed, gt), ground_truths_.at(gt)));
}

RunRecord Experiment::run_session(std::size_t gt, std::size_t rep) const {
    auto hs = hypotheses_for(gt);
    const LikelihoodTable table(*hs, *pool_, config_.model, config_.threads);
    return run_with_table(gt, rep, hs, table);
}

RunRecord Experiment::run_with_table(std::size_t gt, std::size_t rep,
                                     const std::shared_ptr<const HypothesisSet>& hypotheses,
                                     const LikelihoodTable& table) const {
    using clock = std::chrono::steady_clock;
    const RewardWeights& theta_gt = ground_truths_.at(gt);

    SimUserConfig user_cfg;
    user_cfg.theta_gt = theta_gt;
    user_cfg.beta_c = config_.sim_beta_c;
    user_cfg.beta_f = config_.sim_beta_f;
    user_cfg.epsilon = config_.sim_epsilon;
    user_cfg.seed = mix_seed(mix_seed(config_.user_seed, gt), rep);
    SimulatedUser user(user_cfg);

    RunRecord record;
    record.gt = gt;
    record.rep = rep;

    auto measure = [&](const Belief& b, std::size_t iteration, clock::time_point start) {
        const BeliefSummary s = summarize(b, theta_gt, config_.close_threshold);
        IterationRow row;
        row.iteration = iteration;
        row.p_gt = *s.p_gt;
        row.close_mass = *s.close_mass;
        row.map_dot_gt = *s.map_dot_gt;
        if (regret_) row.regret = regret_->regret(theta_gt, s.map_theta);
        row.wall_seconds = std::chrono::duration<double>(clock::now() - start).count();
        return row;
    };

    Belief belief = Belief::uniform(hypotheses);
    record.rows.push_back(measure(belief, 0, clock::now()));

    std::vector<bool> asked(pool_->queries.size(), false);
    const bool ask_feature = asks_feature(config_.mode);
    for (std::size_t it = 1; it <= config_.budget; ++it) {
        const auto start = clock::now();
        const std::size_t q = select_query(belief, table, config_.mode, asked);
        asked[q] = true;
        const Answer answer = user.answer(table.contrast(q), ask_feature);
        belief = update_with_log_likelihoods(belief, table.log_likelihoods(q, answer));
        IterationRow row = measure(belief, it, start);
        row.query_id = q;
        row.answer = answer;
        record.rows.push_back(std::move(row));
    }
    const auto lw = belief.log_weights();
    record.final_log_weights.assign(lw.begin(), lw.end());
    return record;
}

SuiteResult Experiment::run_suite() const {
    const std::size_t reps = config_.repetitions;
    std::vector<std::optional<RunRecord>> slots(ground_truths_.size() * reps);
    std::vector<std::string> errors(slots.size());

    for (std::size_t gt = 0; gt < ground_truths_.size(); ++gt) {
        std::shared_ptr<const HypothesisSet> hs;
        std::unique_ptr<LikelihoodTable> table;
        try {
            hs = hypotheses_for(gt);
            table = std::make_unique<LikelihoodTable>(*hs, *pool_, config_.model, config_.threads);
        } catch (const std::exception& e) {
            for (std::size_t rep = 0; rep < reps; ++rep) errors[gt * reps + rep] = e.what();
            continue;
        }
        parallel_for(reps, config_.threads, [&](std::size_t rep) {
            try {
                slots[gt * reps + rep] = run_with_table(gt, rep, hs, *table);
            } catch (const std::exception& e) {
                errors[gt * reps + rep] = e.what();
            }
        });
    }

    SuiteResult result;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i]) result.runs.push_back(std::move(*slots[i]));
        else result.failures.push_back({i / reps, i % reps, errors[i]});
    }
    return result;
}

std::vector<ScatterRow> scatter_export(const Experiment& experiment, const std::vector<RunRecord>& runs) {
    std::vector<ScatterRow> rows;
    for (const auto& run : runs) {
        const auto hs = experiment.hypotheses_for(run.gt);
        const Belief b(hs, run.final_log_weights);
        const RewardWeights& gt = experiment.ground_truths().at(run.gt);
        for (std::size_t i = 0; i < hs->size(); ++i) {
            rows.push_back({run.gt, run.rep, i, std::clamp(gt.dot((*hs)[i]), -1.0, 1.0),
                            b.probability(i)});
        }
    }
    return rows;
}

void write_runs_csv(std::ostream& out, const std::string& label, const std::vector<RunRecord>& runs) {
    const bool feature_asked = label != to_string(SelectionMode::ComparisonOnly);
    out << "mode,gt,rep,iteration,p_gt,close_mass,map_dot_gt,regret,query_id,comparison,feature\n";
    for (const auto& run : runs) {
        for (const auto& row : run.rows) {
            out << label << ',' << run.gt << ',' << run.rep << ',' << row.iteration << ','
                << num(row.p_gt) << ',' << num(row.close_mass) << ',' << num(row.map_dot_gt) << ','
                << opt_num(row.regret) << ',';
            if (row.query_id) out << *row.query_id;
            out << ',';
            if (row.answer) out << (row.answer->comparison == Choice::A ? 'A' : 'B');
            out << ',';
            if (row.answer) {
                if (row.answer->feature) out << feature_labels()[*row.answer->feature];
                else if (feature_asked) out << "skip";
            }
            out << '\n';
        }
    }
}

void write_aggregate_csv(std::ostream& out, const std::string& label,
                         const std::vector<AggregateRow>& rows) {
    out << "mode,iteration,runs";
    for (const char* m : {"p_gt", "close_mass", "map_dot_gt", "regret"}) {
        for (const char* s : {"mean", "median", "p25", "p75"}) out << ',' << m << '_' << s;
    }
    out << '\n';
    auto stats = [&](const MetricStats& s) {
        out << ',' << num(s.mean) << ',' << num(s.median) << ',' << num(s.p25) << ',' << num(s.p75);
    };
    for (const auto& r : rows) {
        out << label << ',' << r.iteration << ',' << r.runs;
        stats(r.p_gt);
        stats(r.close_mass);
        stats(r.map_dot_gt);
        if (r.regret) stats(*r.regret);
        else out << ",,,,";
        out << '\n';
    }
}

void write_timing_csv(std::ostream& out, const std::vector<RunRecord>& runs) {
    out << "gt,rep,iteration,wall_seconds\n";
    for (const auto& run : runs) {
        for (const auto& row : run.rows) {
            out << run.gt << ',' << run.rep << ',' << row.iteration << ',' << num(row.wall_seconds) << '\n';
        }
    }
}

void write_scatter_csv(std::ostream& out, const std::vector<ScatterRow>& rows) {
    out << "gt,rep,hypothesis,dot_gt,probability\n";
    for (const auto& r : rows) {
        out << r.gt << ',' << r.rep << ',' << r.hypothesis << ',' << num(r.dot_gt) << ','
            << num(r.probability) << '\n';
    }
}

std::string provenance_json(const ExperimentConfig& cfg, const QueryPool& pool, const SuiteResult& result) {
    json failures = json::array();
    for (const auto& f : result.failures) {
        failures.push_back(json{{"gt", f.gt}, {"rep", f.rep}, {"message", f.message}});
    }
    json j{{"schema", "richpref.provenance.v1"},
           {"config", json::parse(experiment_config_to_json(cfg))},
           {"pool",
            {{"queries", pool.queries.size()},
             {"seed", pool.provenance.pool_seed},
             {"environment_seed", pool.provenance.environment_seed},
             {"reward_seed", pool.provenance.reward_seed},
             {"config_hash", pool.provenance.config_hash}}},
           {"completed_runs", result.runs.size()},
           {"failed_runs", failures}};
    return j.dump(1) + "\n";
}

void write_suite_outputs(const std::filesystem::path& dir, const Experiment& experiment,
                         const SuiteResult& result, bool with_scatter) {
    std::filesystem::create_directories(dir);
    const std::string label(to_string(experiment.config().mode));
    {
        auto out = open_out(dir / "runs.csv");
        write_runs_csv(out, label, result.runs);
    }
    {
        auto out = open_out(dir / "aggregate.csv");
        write_aggregate_csv(out, label, aggregate(result.runs));
    }
    {
        auto out = open_out(dir / "timing.csv");
        write_timing_csv(out, result.runs);
    }
    if (with_scatter) {
        auto out = open_out(dir / "scatter.csv");
        write_scatter_csv(out, scatter_export(experiment, result.runs));
    }
    json_io::write_file(dir / "provenance.json", provenance_json(experiment.config(), experiment.pool(), result));
}

}  // namespace richpref
