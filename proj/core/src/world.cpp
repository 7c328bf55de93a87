#include "richpref/world.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "richpref/error.hpp"
#include "richpref/features.hpp"
#include "richpref/random.hpp"

namespace richpref {

double RoadGeometry::distance_to_lane_center(double y) const {
    const int lane = std::clamp(static_cast<int>(std::floor(y / lane_width)), 0, lane_count - 1);
    return std::abs(y - lane_center(lane));
}

double RoadGeometry::distance_to_edge(double y) const {
    return std::min(std::abs(y), std::abs(width() - y));
}

double wrap_angle(double angle) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double a = std::fmod(angle + std::numbers::pi, two_pi);
    if (a < 0.0) a += two_pi;
    a -= std::numbers::pi;
    // fmod can land exactly on +pi after the shift back
    if (a >= std::numbers::pi) a -= two_pi;
    return a;
}

bool clamp_control(Control& control, const DynamicsConfig& dynamics) {
    const Control original = control;
    control.steer = std::clamp(control.steer, -dynamics.steer_max, dynamics.steer_max);
    control.accel = std::clamp(control.accel, -dynamics.accel_max, dynamics.accel_max);
    return !(control == original);
}

StepResult step(const CarState& state, const Control& control, const DynamicsConfig& dynamics) {
    Control u = control;
    const bool clamped = clamp_control(u, dynamics);

    CarState next;
    next.heading = wrap_angle(state.heading +
                              state.speed * std::tan(u.steer) / dynamics.wheelbase * dynamics.dt);
    next.speed = std::clamp(state.speed + u.accel, -dynamics.speed_max, dynamics.speed_max);
    next.x = state.x + next.speed * std::cos(next.heading) * dynamics.dt;
    next.y = state.y + next.speed * std::sin(next.heading) * dynamics.dt;
    return {next, clamped};
}

Trajectory rollout(const Environment& env, std::span<const Control> controls,
                   const WorldConfig& config) {
    if (controls.size() != config.horizon) {
        throw Error(ErrorCode::HorizonMismatch,
                    "expected " + std::to_string(config.horizon) + " controls, got " +
                        std::to_string(controls.size()));
    }
    if (env.other_trajectory.size() < config.horizon + 1) {
        throw Error(ErrorCode::HorizonMismatch,
                    "environment " + env.id + " has a shorter other-car trajectory than the horizon");
    }

    Trajectory traj;
    traj.controls.assign(controls.begin(), controls.end());
    traj.states.reserve(controls.size() + 1);
    traj.states.push_back(env.ego_init);
    for (std::size_t t = 0; t < controls.size(); ++t) {
        const StepResult r = step(traj.states.back(), controls[t], config.dynamics);
        traj.clamped = traj.clamped || r.clamped;
        traj.states.push_back(r.state);
    }
    traj.phi = cumulative_features(env, traj, config.features);
    return traj;
}

std::vector<Environment> generate_environments(std::size_t count, std::uint64_t seed,
                                               const WorldConfig& config,
                                               const std::string& id_prefix) {
    std::vector<Environment> envs;
    envs.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng = make_rng(seed, i);
        Environment env;
        env.id = id_prefix + "-" + std::to_string(i);

        const int ego_lane = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(env.road.lane_count)));
        env.ego_init.x = 0.0;
        env.ego_init.y = env.road.lane_center(ego_lane);
        env.ego_init.heading = 0.0;
        env.ego_init.speed = uniform(rng, 0.6, 1.2);

        // The other car starts ahead, in the ego lane or a neighbour.
        int other_lane = ego_lane + static_cast<int>(uniform_index(rng, 3)) - 1;
        other_lane = std::clamp(other_lane, 0, env.road.lane_count - 1);
        CarState other;
        other.x = uniform(rng, 0.5, 2.5);
        other.y = env.road.lane_center(other_lane);
        other.heading = 0.0;
        other.speed = uniform(rng, 0.3, 1.0);

        // Roughly a third of the environments contain a lane change of the other car.
        const bool lane_change = uniform01(rng) < 0.35;
        double change_dir = 0.0;
        if (lane_change) {
            if (other_lane == 0) change_dir = 1.0;
            else if (other_lane == env.road.lane_count - 1) change_dir = -1.0;
            else change_dir = uniform01(rng) < 0.5 ? -1.0 : 1.0;
        }
        const std::size_t turn_len = std::max<std::size_t>(1, config.horizon / 4);

        env.other_trajectory.reserve(config.horizon + 1);
        env.other_trajectory.push_back(other);
        for (std::size_t t = 0; t < config.horizon; ++t) {
            Control u;
            if (lane_change) {
                if (t < turn_len) u.steer = 0.6 * config.dynamics.steer_max * change_dir;
                else if (t < 2 * turn_len) u.steer = -0.6 * config.dynamics.steer_max * change_dir;
            }
            env.other_trajectory.push_back(step(env.other_trajectory.back(), u, config.dynamics).state);
        }
        envs.push_back(std::move(env));
    }
    return envs;
}

}  // namespace richpref
