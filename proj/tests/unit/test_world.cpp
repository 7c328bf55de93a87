#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "richpref/error.hpp"
#include "richpref/features.hpp"
#include "richpref/world.hpp"

using namespace richpref;

namespace {

Environment straight_env(std::size_t horizon, CarState ego = {}) {
    Environment env;
    env.id = "straight";
    env.ego_init = ego;
    CarState other{50.0, 2.5, 0.0, 0.0};
    env.other_trajectory.assign(horizon + 1, other);
    return env;
}

}  // namespace

TEST(Step, ZeroControlsAdvanceAlongHeading) {
    DynamicsConfig dyn;
    const CarState s{1.0, 0.5, 0.0, 1.2};
    const StepResult r = step(s, {}, dyn);
    EXPECT_DOUBLE_EQ(r.state.x, 1.0 + 1.2 * dyn.dt);
    EXPECT_DOUBLE_EQ(r.state.y, 0.5);
    EXPECT_DOUBLE_EQ(r.state.heading, 0.0);
    EXPECT_FALSE(r.clamped);
}

TEST(Step, StationaryCarDoesNotMove) {
    DynamicsConfig dyn;
    const CarState s{3.0, 1.5, 0.3, 0.0};
    const StepResult r = step(s, {0.4, 0.0}, dyn);
    EXPECT_DOUBLE_EQ(r.state.x, 3.0);
    EXPECT_DOUBLE_EQ(r.state.y, 1.5);
    EXPECT_DOUBLE_EQ(r.state.heading, 0.3);
}

TEST(Step, HeadingChangeMatchesBicycleFormula) {
    DynamicsConfig dyn;
    dyn.dt = 0.1;
    dyn.wheelbase = 1.0;
    const StepResult r = step({0.0, 0.0, 0.0, 1.0}, {0.1, 0.0}, dyn);
    EXPECT_NEAR(r.state.heading, 0.1 * std::tan(0.1), 1e-15);
    EXPECT_NEAR(r.state.heading, 0.01003, 1e-5);
}

TEST(Step, OutOfBoundControlsAreClampedAndFlagged) {
    DynamicsConfig dyn;
    const StepResult a = step({0.0, 0.0, 0.0, 1.0}, {5.0, 5.0}, dyn);
    const StepResult b = step({0.0, 0.0, 0.0, 1.0}, {dyn.steer_max, dyn.accel_max}, dyn);
    EXPECT_TRUE(a.clamped);
    EXPECT_EQ(a.state, b.state);
}

TEST(Step, SpeedSaturates) {
    DynamicsConfig dyn;
    CarState s{0.0, 0.0, 0.0, dyn.speed_max};
    EXPECT_DOUBLE_EQ(step(s, {0.0, dyn.accel_max}, dyn).state.speed, dyn.speed_max);
    s.speed = -dyn.speed_max;
    EXPECT_DOUBLE_EQ(step(s, {0.0, -dyn.accel_max}, dyn).state.speed, -dyn.speed_max);
}

TEST(WrapAngle, StaysInHalfOpenInterval) {
    for (double a : {-10.0, -std::numbers::pi, 0.0, 3.0, std::numbers::pi, 7.5, 100.0}) {
        const double w = wrap_angle(a);
        EXPECT_GE(w, -std::numbers::pi);
        EXPECT_LT(w, std::numbers::pi);
        EXPECT_NEAR(std::remainder(w - a, 2.0 * std::numbers::pi), 0.0, 1e-12);
    }
}

TEST(Rollout, ZeroControlsFromStandstillKeepInitialState) {
    WorldConfig cfg;
    const CarState ego{0.0, 0.5, 0.0, 0.0};
    const Environment env = straight_env(cfg.horizon, ego);
    const std::vector<Control> controls(cfg.horizon);
    const Trajectory traj = rollout(env, controls, cfg);
    ASSERT_EQ(traj.states.size(), cfg.horizon + 1);
    for (const auto& s : traj.states) EXPECT_EQ(s, ego);
}

TEST(Rollout, EmptyHorizonGivesSingleStateAndZeroFeatures) {
    WorldConfig cfg;
    cfg.horizon = 0;
    const Environment env = straight_env(0, {0.0, 0.5, 0.0, 1.0});
    const Trajectory traj = rollout(env, std::vector<Control>{}, cfg);
    ASSERT_EQ(traj.states.size(), 1u);
    EXPECT_EQ(traj.states[0], env.ego_init);
    for (double v : traj.phi) EXPECT_EQ(v, 0.0);
}

TEST(Rollout, WrongControlCountThrows) {
    WorldConfig cfg;
    const Environment env = straight_env(cfg.horizon);
    try {
        rollout(env, std::vector<Control>(cfg.horizon - 1), cfg);
        FAIL() << "expected HorizonMismatch";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::HorizonMismatch);
    }
}

TEST(Rollout, CachedFeaturesMatchRecomputation) {
    WorldConfig cfg;
    const auto envs = generate_environments(3, 9, cfg);
    Rng rng = make_rng(17);
    for (const auto& env : envs) {
        std::vector<Control> controls(cfg.horizon);
        for (auto& u : controls) u = {uniform(rng, -0.5, 0.5), uniform(rng, -0.25, 0.25)};
        const Trajectory traj = rollout(env, controls, cfg);
        FeatureVector phi{};
        for (std::size_t t = 0; t < cfg.horizon; ++t) {
            phi += per_step_features(env, traj.states[t + 1], controls[t], t + 1, cfg.features);
        }
        EXPECT_EQ(phi, traj.phi);
    }
}

TEST(Environments, SeededAndWellFormed) {
    WorldConfig cfg;
    const auto a = generate_environments(10, 3, cfg);
    const auto b = generate_environments(10, 3, cfg);
    const auto c = generate_environments(10, 4, cfg);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    for (const auto& env : a) {
        EXPECT_EQ(env.other_trajectory.size(), cfg.horizon + 1);
        EXPECT_TRUE(env.road.contains_lateral(env.ego_init.y));
        EXPECT_GT(env.other_trajectory.front().x, env.ego_init.x);
    }
}

TEST(RoadGeometry, LaneQueries) {
    RoadGeometry road;
    EXPECT_DOUBLE_EQ(road.width(), 3.0);
    EXPECT_DOUBLE_EQ(road.lane_center(0), 0.5);
    EXPECT_DOUBLE_EQ(road.distance_to_lane_center(1.5), 0.0);
    EXPECT_DOUBLE_EQ(road.distance_to_lane_center(1.2), 0.3);
    EXPECT_DOUBLE_EQ(road.distance_to_edge(0.25), 0.25);
    EXPECT_DOUBLE_EQ(road.distance_to_edge(2.5), 0.5);
    EXPECT_TRUE(road.in_rightmost_lane(0.0));
    EXPECT_FALSE(road.in_rightmost_lane(1.0));
    EXPECT_FALSE(road.contains_lateral(-0.1));
}
