#ifndef RICHPREF_QUERYGEN_HPP
#define RICHPREF_QUERYGEN_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "richpref/config.hpp"
#include "richpref/features.hpp"
#include "richpref/observation.hpp"
#include "richpref/world.hpp"

namespace richpref {

/// Random shooting followed by coordinate descent over the control entries.
struct OptimizerConfig {
    std::size_t candidates = 200;  // random control sequences
    std::size_t passes = 3;        // coordinate descent sweeps, step halved each sweep
    double initial_step = 0.5;     // fraction of the control bound
    /// 0 for continuous controls; otherwise each control component takes
    /// this many evenly spaced values in [-max, max].
    std::size_t discrete_levels = 0;
    std::uint64_t seed = 7;
};

/// Approximately reward-maximizing trajectory. Deterministic in (env, theta,
/// config); never worse than the best random candidate examined.
Trajectory optimize_trajectory(const Environment& env, const FeatureVector& theta,
                               const WorldConfig& world, const OptimizerConfig& optimizer);

struct PlausibilityConfig {
    double collision_distance = 0.5;
    std::size_t max_draws = 1'000'000;
};

/// Off-road at the end, or closer than the collision distance to the other car
/// at any step.
bool is_plausible(const Trajectory& traj, const Environment& env, const PlausibilityConfig& config);

/// Rejection-samples `count` unit reward vectors whose optimal trajectory in
/// the probe environment is plausible. Throws RejectionBudgetExceeded.
std::vector<RewardWeights> sample_plausible_rewards(std::size_t count, std::uint64_t seed,
                                                    const Environment& probe,
                                                    const WorldConfig& world,
                                                    const OptimizerConfig& optimizer,
                                                    const PlausibilityConfig& plausibility = {});

struct PoolConfig {
    std::size_t pool_size = 500;
    std::uint64_t seed = 11;
    WorldConfig world;
    OptimizerConfig optimizer;
    std::size_t threads = 0;  // 0 = hardware concurrency
};

struct PoolProvenance {
    std::uint64_t pool_seed = 0;
    std::uint64_t environment_seed = 0;
    std::uint64_t reward_seed = 0;
    std::string config_hash;
};

struct QueryPool {
    std::vector<Query> queries;
    std::vector<RewardWeights> plausible_thetas;
    std::vector<Environment> environments;
    FeatureScales feature_scales;
    WorldConfig world;
    OptimizerConfig optimizer;
    std::uint64_t seed = 0;
    PoolProvenance provenance;

    const Environment& environment_of(const Query& q) const { return environments.at(q.env); }
    Contrast contrast(std::size_t query) const {
        return make_contrast(queries.at(query), feature_scales);
    }
};

/// Upper bound on the number of distinct same-environment pairs.
std::size_t distinct_pair_bound(std::size_t environments, std::size_t rewards);

/// Optimizes one trajectory per (environment, reward), pairs distinct
/// trajectories within each environment, subsamples to pool_size and sets
/// feature scales to the per-feature mean |delta phi| over the pool.
QueryPool build_pool(const std::vector<Environment>& envs, const std::vector<RewardWeights>& thetas,
                     const PoolConfig& config);

std::string pool_to_json(const QueryPool& pool);
QueryPool pool_from_json(const std::string& text);
void save_pool(const std::filesystem::path& path, const QueryPool& pool);
QueryPool load_pool(const std::filesystem::path& path);

/// Stable hash of a world/optimizer configuration, used in provenance records.
std::string config_hash(const WorldConfig& world, const OptimizerConfig& optimizer,
                        std::size_t pool_size);

}  // namespace richpref

#endif  // RICHPREF_QUERYGEN_HPP
