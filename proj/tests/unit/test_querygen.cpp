#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "richpref/error.hpp"
#include "richpref/querygen.hpp"

using namespace richpref;

namespace {

double mean_speed(const Trajectory& t) {
    double s = 0.0;
    for (std::size_t i = 1; i < t.states.size(); ++i) s += t.states[i].speed;
    return s / static_cast<double>(t.states.size() - 1);
}

// Best reward over all 3^(2T) sequences on the {-max, 0, max} grid.
double exhaustive_best(const Environment& env, const FeatureVector& theta, const WorldConfig& world) {
    const double steer[3] = {-world.dynamics.steer_max, 0.0, world.dynamics.steer_max};
    const double accel[3] = {-world.dynamics.accel_max, 0.0, world.dynamics.accel_max};
    double best = -kInfinity;
    for (int s0 = 0; s0 < 3; ++s0)
        for (int a0 = 0; a0 < 3; ++a0)
            for (int s1 = 0; s1 < 3; ++s1)
                for (int a1 = 0; a1 < 3; ++a1) {
                    const std::vector<Control> u{{steer[s0], accel[a0]}, {steer[s1], accel[a1]}};
                    best = std::max(best, reward(theta, rollout(env, u, world).phi));
                }
    return best;
}

}  // namespace

TEST(Optimizer, SpeedRewardBeatsRandomRollouts) {
    WorldConfig world;
    const auto envs = generate_environments(3, 12, world);
    const FeatureVector e5 = RewardWeights::basis(Feature::Speed).values();
    for (const auto& env : envs) {
        const Trajectory best = optimize_trajectory(env, e5, world, OptimizerConfig{});
        Rng rng = make_rng(99);
        double random_mean = 0.0;
        for (int k = 0; k < 1000; ++k) {
            std::vector<Control> u(world.horizon);
            for (auto& c : u) {
                c = {uniform(rng, -world.dynamics.steer_max, world.dynamics.steer_max),
                     uniform(rng, -world.dynamics.accel_max, world.dynamics.accel_max)};
            }
            random_mean += mean_speed(rollout(env, u, world));
        }
        EXPECT_GE(mean_speed(best), random_mean / 1000.0);
    }
}

TEST(Optimizer, ScaleInvariantAndDeterministic) {
    WorldConfig world;
    const auto envs = generate_environments(2, 13, world);
    Rng rng = make_rng(14);
    const RewardWeights theta = RewardWeights::random(rng);
    const RewardWeights rescaled = RewardWeights::normalized(2.0 * theta.values());
    for (const auto& env : envs) {
        const Trajectory a = optimize_trajectory(env, theta.values(), world, OptimizerConfig{});
        EXPECT_EQ(a, optimize_trajectory(env, theta.values(), world, OptimizerConfig{}));
        EXPECT_EQ(a.controls, optimize_trajectory(env, rescaled.values(), world, OptimizerConfig{}).controls);
    }
}

TEST(Optimizer, MatchesExhaustiveSearchOnTinyGrid) {
    WorldConfig world;
    world.horizon = 2;
    OptimizerConfig opt;
    opt.discrete_levels = 3;
    const auto envs = generate_environments(10, 15, world);
    Rng rng = make_rng(16);
    for (int k = 0; k < 30; ++k) {
        const auto& env = envs[static_cast<std::size_t>(k) % envs.size()];
        const FeatureVector theta = RewardWeights::random(rng).values();
        const Trajectory t = optimize_trajectory(env, theta, world, opt);
        EXPECT_NEAR(reward(theta, t.phi), exhaustive_best(env, theta, world), 1e-12);
    }
}

TEST(Optimizer, NeverWorseThanBestRandomCandidate) {
    WorldConfig world;
    const auto envs = generate_environments(1, 17, world);
    Rng rng = make_rng(18);
    const FeatureVector theta = RewardWeights::random(rng).values();
    OptimizerConfig none;
    none.passes = 0;
    const double shooting = reward(theta, optimize_trajectory(envs[0], theta, world, none).phi);
    const double full = reward(theta, optimize_trajectory(envs[0], theta, world, OptimizerConfig{}).phi);
    EXPECT_GE(full, shooting);
}

TEST(Plausibility, DetectsOffRoadAndCollision) {
    WorldConfig world;
    Environment env;
    env.id = "p";
    env.ego_init = {0.0, 1.5, 0.0, 1.0};
    env.other_trajectory.assign(world.horizon + 1, CarState{100.0, 2.5, 0.0, 0.0});
    const Trajectory ok = rollout(env, std::vector<Control>(world.horizon), world);
    EXPECT_TRUE(is_plausible(ok, env, {}));

    Environment blocked = env;
    blocked.other_trajectory.assign(world.horizon + 1, CarState{2.0, 1.5, 0.0, 0.0});
    EXPECT_FALSE(is_plausible(rollout(blocked, std::vector<Control>(world.horizon), world), blocked, {}));

    Environment leftward = env;
    leftward.ego_init = {0.0, 2.5, 1.2, 1.0};
    const Trajectory off = rollout(leftward, std::vector<Control>(world.horizon), world);
    ASSERT_GT(off.states.back().y, leftward.road.width());
    EXPECT_FALSE(is_plausible(off, leftward, {}));
}

TEST(PlausibleRewards, PostconditionAndDeterminism) {
    WorldConfig world;
    OptimizerConfig opt;
    opt.candidates = 60;
    const auto envs = generate_environments(1, 19, world);
    const auto a = sample_plausible_rewards(19, 20, envs[0], world, opt);
    EXPECT_EQ(a.size(), 19u);
    EXPECT_EQ(a, sample_plausible_rewards(19, 20, envs[0], world, opt));
    for (const auto& theta : a) {
        EXPECT_TRUE(is_plausible(optimize_trajectory(envs[0], theta.values(), world, opt), envs[0], {}));
    }
}

TEST(PlausibleRewards, RejectionBudget) {
    WorldConfig world;
    OptimizerConfig opt;
    opt.candidates = 5;
    const auto envs = generate_environments(1, 19, world);
    PlausibilityConfig strict;
    strict.collision_distance = 1e6;
    strict.max_draws = 10;
    try {
        sample_plausible_rewards(1, 1, envs[0], world, opt, strict);
        FAIL() << "expected RejectionBudgetExceeded";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::RejectionBudgetExceeded);
    }
}

TEST(Pool, PairBound) {
    EXPECT_EQ(distinct_pair_bound(40, 19), 6840u);
    EXPECT_EQ(distinct_pair_bound(1, 2), 1u);
}

TEST(Pool, TwoRewardsOneEnvironmentGiveOneQuery) {
    PoolConfig cfg;
    cfg.pool_size = 1;
    cfg.optimizer.candidates = 40;
    cfg.threads = 1;
    const auto envs = generate_environments(1, 23, cfg.world);
    const QueryPool pool = build_pool(
        envs, {RewardWeights::basis(Feature::Speed), RewardWeights::normalized({0, 0, 1, 0, -1, 0, 0})}, cfg);
    ASSERT_EQ(pool.queries.size(), 1u);
    EXPECT_NO_THROW(validate_query(pool.queries[0]));
}

TEST(Pool, InvariantsAndScales) {
    const auto pool = fixtures::small_pool();
    EXPECT_EQ(pool->queries.size(), 20u);
    EXPECT_LE(pool->queries.size(), distinct_pair_bound(pool->environments.size(), pool->plausible_thetas.size()));
    FeatureVector mean_abs{};
    for (std::size_t i = 0; i < pool->queries.size(); ++i) {
        const Query& q = pool->queries[i];
        EXPECT_EQ(q.id, i);
        ASSERT_LT(q.env, pool->environments.size());
        const Environment& env = pool->environment_of(q);
        // both trajectories are rollouts in the query's environment
        EXPECT_EQ(q.a.states.front(), env.ego_init);
        EXPECT_EQ(q.b.states.front(), env.ego_init);
        EXPECT_EQ(rollout(env, q.a.controls, pool->world), q.a);
        EXPECT_EQ(rollout(env, q.b.controls, pool->world), q.b);
        EXPECT_NO_THROW(validate_query(q));
        for (std::size_t f = 0; f < kFeatureCount; ++f) mean_abs[f] += std::abs(q.a.phi[f] - q.b.phi[f]) / 20.0;
    }
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        if (mean_abs[f] > 0.0) EXPECT_NEAR(pool->feature_scales.values[f], mean_abs[f], 1e-12 * mean_abs[f]);
        else EXPECT_EQ(pool->feature_scales.values[f], 1.0);
    }
}

TEST(Pool, JsonRoundTrip) {
    const auto pool = fixtures::small_pool();
    const QueryPool back = pool_from_json(pool_to_json(*pool));
    EXPECT_EQ(back.queries, pool->queries);
    EXPECT_EQ(back.environments, pool->environments);
    EXPECT_EQ(back.plausible_thetas, pool->plausible_thetas);
    EXPECT_EQ(back.feature_scales, pool->feature_scales);
    EXPECT_EQ(back.seed, pool->seed);
    EXPECT_EQ(back.provenance.config_hash, pool->provenance.config_hash);
}
