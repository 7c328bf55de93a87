#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "richpref/error.hpp"
#include "richpref/features.hpp"

using namespace richpref;

namespace {

Environment env_with_other(CarState other, std::size_t horizon) {
    Environment env;
    env.id = "probe";
    env.other_trajectory.assign(horizon + 1, other);
    return env;
}

}  // namespace

TEST(PerStepFeatures, LaneCenterAndHeading) {
    FeatureParams params;
    const Environment env = env_with_other({40.0, 0.5, 0.0, 0.0}, 1);
    const FeatureVector f = per_step_features(env, {0.0, 1.5, 0.0, 1.0}, {}, 1, params);
    EXPECT_DOUBLE_EQ(f[0], 1.0);
    EXPECT_DOUBLE_EQ(f[2], 1.0);
    const FeatureVector g = per_step_features(env, {0.0, 1.5, std::numbers::pi / 2, 1.0}, {}, 1, params);
    EXPECT_NEAR(g[2], 0.0, 1e-15);
}

TEST(PerStepFeatures, SpeedAndReverse) {
    FeatureParams params;
    const Environment env = env_with_other({40.0, 0.5, 0.0, 0.0}, 1);
    const FeatureVector back = per_step_features(env, {0.0, 1.5, 0.0, -0.5}, {}, 1, params);
    EXPECT_DOUBLE_EQ(back[4], -0.5);
    EXPECT_DOUBLE_EQ(back[6], -0.5);
    const FeatureVector fwd = per_step_features(env, {0.0, 1.5, 0.0, 2.0}, {}, 1, params);
    EXPECT_DOUBLE_EQ(fwd[4], 2.0);
    EXPECT_DOUBLE_EQ(fwd[6], 0.0);
}

TEST(PerStepFeatures, DistanceShapes) {
    FeatureParams params;
    const Environment env = env_with_other({1.0, 1.5, 0.0, 0.0}, 1);
    const CarState s{0.0, 0.7, 0.0, 1.0};
    const FeatureVector f = per_step_features(env, s, {}, 1, params);
    EXPECT_NEAR(f[0], std::exp(-4.0 * 0.2 * 0.2), 1e-15);
    EXPECT_NEAR(f[1], std::exp(-4.0 * 0.7 * 0.7), 1e-15);
    EXPECT_NEAR(f[3], std::exp(-(1.0 + 4.0 * 0.8 * 0.8)), 1e-15);
    EXPECT_DOUBLE_EQ(f[5], 1.0);
}

TEST(CumulativeFeatures, SingleStepEqualsPerStep) {
    WorldConfig cfg;
    cfg.horizon = 1;
    const Environment env = env_with_other({5.0, 2.5, 0.0, 0.5}, 1);
    Environment e = env;
    e.ego_init = {0.0, 0.5, 0.0, 1.0};
    const Trajectory traj = rollout(e, std::vector<Control>{{0.2, 0.1}}, cfg);
    EXPECT_EQ(traj.phi, per_step_features(e, traj.states[1], traj.controls[0], 1, cfg.features));
}

TEST(CumulativeFeatures, SplitsAddUp) {
    WorldConfig cfg;
    const auto envs = generate_environments(2, 5, cfg);
    Rng rng = make_rng(8);
    for (const auto& env : envs) {
        std::vector<Control> controls(cfg.horizon);
        for (auto& u : controls) u = {uniform(rng, -0.5, 0.5), uniform(rng, -0.25, 0.25)};
        const Trajectory traj = rollout(env, controls, cfg);
        for (std::size_t t = 0; t <= cfg.horizon; ++t) {
            const FeatureVector head = cumulative_features(env, traj.states, traj.controls, cfg.features, 0, t);
            const FeatureVector tail =
                cumulative_features(env, traj.states, traj.controls, cfg.features, t, cfg.horizon);
            for (std::size_t i = 0; i < kFeatureCount; ++i) EXPECT_NEAR(head[i] + tail[i], traj.phi[i], 1e-12);
        }
    }
}

TEST(CumulativeFeatures, StationaryAtLaneCenterForTenSteps) {
    WorldConfig cfg;
    Environment env = env_with_other({30.0, 2.5, 0.0, 0.0}, cfg.horizon);
    env.ego_init = {0.0, 0.5, 0.0, 0.0};
    const Trajectory traj = rollout(env, std::vector<Control>(cfg.horizon), cfg);
    EXPECT_DOUBLE_EQ(traj.phi[0], 10.0 * std::exp(0.0));
    EXPECT_DOUBLE_EQ(traj.phi[5], 10.0);
    EXPECT_DOUBLE_EQ(traj.phi[4], 0.0);
}

TEST(Reward, BasisProjectionAndLinearity) {
    const FeatureVector p1{1, 2, 3, 4, 5, 6, 7};
    const FeatureVector p2{-0.5, 0.25, 0, 2, -1, 3, 0.1};
    EXPECT_DOUBLE_EQ(reward(RewardWeights::basis(Feature::LaneCenter), p1), 1.0);
    EXPECT_DOUBLE_EQ(reward(RewardWeights::basis(Feature::Speed), p1), 5.0);
    EXPECT_DOUBLE_EQ(reward(RewardWeights::basis(Feature::Speed), FeatureVector{}), 0.0);
    Rng rng = make_rng(2);
    const RewardWeights theta = RewardWeights::random(rng);
    const double a = 1.7;
    const double b = -0.3;
    EXPECT_NEAR(reward(theta, a * p1 + b * p2), a * reward(theta, p1) + b * reward(theta, p2), 1e-12);
}

TEST(RewardWeights, RequiresUnitNorm) {
    EXPECT_THROW(RewardWeights(FeatureVector{1, 1, 0, 0, 0, 0, 0}), Error);
    EXPECT_THROW(RewardWeights::normalized(FeatureVector{}), Error);
    const RewardWeights w = RewardWeights::normalized(FeatureVector{3, 4, 0, 0, 0, 0, 0});
    EXPECT_DOUBLE_EQ(w[0], 0.6);
    EXPECT_DOUBLE_EQ(w[1], 0.8);
}

TEST(RewardWeights, RandomIsUnitAndSeeded) {
    Rng a = make_rng(4);
    Rng b = make_rng(4);
    for (int i = 0; i < 50; ++i) {
        const RewardWeights w = RewardWeights::random(a);
        EXPECT_NEAR(norm(w.values()), 1.0, 1e-12);
        EXPECT_EQ(w, RewardWeights::random(b));
    }
}

TEST(FeatureLabels, SevenDistinctLabels) {
    const auto& labels = feature_labels();
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        EXPECT_FALSE(labels[i].empty());
        for (std::size_t j = i + 1; j < kFeatureCount; ++j) EXPECT_NE(labels[i], labels[j]);
    }
}
