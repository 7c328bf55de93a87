#ifndef RICHPREF_RUNNER_HPP
#define RICHPREF_RUNNER_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "richpref/active.hpp"
#include "richpref/belief.hpp"
#include "richpref/querygen.hpp"
#include "richpref/simuser.hpp"

namespace richpref {

struct ExperimentConfig {
    std::string pool_path;
    SelectionMode mode = SelectionMode::Rich;

    RationalityParams model;                  // beta_c_m, beta_f_m, epsilon_m
    double sim_beta_c = kInfinity;
    double sim_beta_f = kInfinity;
    std::optional<double> sim_epsilon;        // nullopt: simulated users never skip

    std::size_t budget = 40;
    std::size_t gt_count = 20;
    std::size_t repetitions = 1;
    std::size_t hypothesis_count = 500;
    std::size_t test_environments = 10;
    bool compute_regret = true;
    double close_threshold = kCloseThreshold;

    std::uint64_t hypothesis_seed = 1;
    std::uint64_t gt_seed = 2;
    std::uint64_t user_seed = 3;
    std::uint64_t test_env_seed = 4;

    std::size_t threads = 0;

    void validate() const;
};

std::string experiment_config_to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const std::string& text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Named (comparison-only, rich) beta_c pairs from the pilot estimates.
struct BetaPreset {
    const char* name;
    double comparison_only_beta_c;
    double rich_beta_c;
};
inline constexpr BetaPreset kBetaPresetFigure{"figure", 5.0, 2.0};
inline constexpr BetaPreset kBetaPresetText{"text", 1.6, 5.65};
inline constexpr double kDefaultBetaF = 2.5;
inline constexpr double kPilotSkipEpsilon = 0.066;

struct IterationRow {
    std::size_t iteration = 0;
    double p_gt = 0.0;
    double close_mass = 0.0;
    double map_dot_gt = 0.0;
    std::optional<double> regret;
    std::optional<std::size_t> query_id;  // absent on the prior row
    std::optional<Answer> answer;
    double wall_seconds = 0.0;            // excluded from the deterministic tables
};

struct RunRecord {
    std::size_t gt = 0;
    std::size_t rep = 0;
    std::vector<IterationRow> rows;       // rows[0] is the prior
    std::vector<double> final_log_weights;
};

struct FailedRun {
    std::size_t gt = 0;
    std::size_t rep = 0;
    std::string message;
};

struct SuiteResult {
    std::vector<RunRecord> runs;          // ordered by (gt, rep)
    std::vector<FailedRun> failures;
};

struct MetricStats {
    double mean = 0.0;
    double median = 0.0;
    double p25 = 0.0;
    double p75 = 0.0;
};

struct AggregateRow {
    std::size_t iteration = 0;
    std::size_t runs = 0;
    MetricStats p_gt;
    MetricStats close_mass;
    MetricStats map_dot_gt;
    std::optional<MetricStats> regret;
};

/// Linear-interpolation percentile (q in [0, 1]) of an unsorted sample.
double percentile(std::vector<double> values, double q);
MetricStats describe(const std::vector<double>& values);

/// Per-iteration aggregates over completed runs.
std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& runs);

/// Regret of acting on learned weights, averaged over test environments:
/// theta_gt^T (phi(xi(theta_gt)) - phi(xi(learned))). Each term is floored
/// at zero since the optimizer is approximate. Optimal trajectories are
/// memoized per (environment, weights); thread-safe.
class RegretEvaluator {
public:
    RegretEvaluator(std::vector<Environment> environments, WorldConfig world,
                    OptimizerConfig optimizer, bool memoize = true);

    double regret(const RewardWeights& theta_gt, const FeatureVector& learned) const;

    /// Cumulative features of the optimal trajectory for theta in environment e.
    FeatureVector optimal_phi(std::size_t env, const FeatureVector& theta) const;

    const std::vector<Environment>& environments() const { return environments_; }

private:
    std::vector<Environment> environments_;
    WorldConfig world_;
    OptimizerConfig optimizer_;
    bool memoize_;
    mutable std::mutex mutex_;
    mutable std::map<std::pair<std::size_t, FeatureVector>, FeatureVector> memo_;
};

/// Simulated learning experiment over a query pool.
class Experiment {
public:
    Experiment(ExperimentConfig config, std::shared_ptr<const QueryPool> pool,
               std::optional<std::vector<RewardWeights>> ground_truths = std::nullopt);

    const ExperimentConfig& config() const { return config_; }
    const QueryPool& pool() const { return *pool_; }
    const std::vector<RewardWeights>& ground_truths() const { return ground_truths_; }
    const RegretEvaluator& regret_evaluator() const { return *regret_; }

    /// Hypothesis set with ground truth `gt` injected.
    std::shared_ptr<const HypothesisSet> hypotheses_for(std::size_t gt) const;

    /// select -> simulated answer -> update -> measure, `budget` times.
    RunRecord run_session(std::size_t gt, std::size_t rep) const;

    /// All (gt, rep) sessions on the worker set; failures are collected, not thrown.
    SuiteResult run_suite() const;

private:
    RunRecord run_with_table(std::size_t gt, std::size_t rep,
                             const std::shared_ptr<const HypothesisSet>& hypotheses,
                             const LikelihoodTable& table) const;

    ExperimentConfig config_;
    std::shared_ptr<const QueryPool> pool_;
    std::vector<RewardWeights> ground_truths_;
    std::unique_ptr<RegretEvaluator> regret_;
};

struct ScatterRow {
    std::size_t gt = 0;
    std::size_t rep = 0;
    std::size_t hypothesis = 0;
    double dot_gt = 0.0;
    double probability = 0.0;
};

/// One row per hypothesis per run: (theta . theta_gt, P(theta)) at the end of the run.
std::vector<ScatterRow> scatter_export(const Experiment& experiment, const std::vector<RunRecord>& runs);

void write_runs_csv(std::ostream& out, const std::string& label, const std::vector<RunRecord>& runs);
void write_aggregate_csv(std::ostream& out, const std::string& label,
                         const std::vector<AggregateRow>& rows);
void write_timing_csv(std::ostream& out, const std::vector<RunRecord>& runs);
void write_scatter_csv(std::ostream& out, const std::vector<ScatterRow>& rows);
std::string provenance_json(const ExperimentConfig& cfg, const QueryPool& pool,
                            const SuiteResult& result);

/// Writes runs.csv, aggregate.csv, timing.csv and provenance.json into `dir`.
void write_suite_outputs(const std::filesystem::path& dir, const Experiment& experiment,
                         const SuiteResult& result, bool with_scatter = false);

}  // namespace richpref

#endif  // RICHPREF_RUNNER_HPP
