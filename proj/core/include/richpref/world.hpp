#ifndef RICHPREF_WORLD_HPP
#define RICHPREF_WORLD_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "richpref/common.hpp"
#include "richpref/config.hpp"

namespace richpref {

struct CarState {
    double x = 0.0;        // longitudinal
    double y = 0.0;        // lateral, 0 at the right road edge
    double heading = 0.0;  // radians in [-pi, pi), 0 along the road
    double speed = 0.0;    // negative when reversing

    bool operator==(const CarState&) const = default;
};

struct Control {
    double steer = 0.0;
    double accel = 0.0;

    bool operator==(const Control&) const = default;
};

/// Straight road along +x. Lane 0 is the rightmost lane, occupying y in [0, lane_width).
struct RoadGeometry {
    int lane_count = 3;
    double lane_width = 1.0;
    double road_length = 100.0;

    double width() const { return lane_count * lane_width; }
    bool contains_lateral(double y) const { return y >= 0.0 && y <= width(); }
    double lane_center(int lane) const { return (lane + 0.5) * lane_width; }
    double distance_to_lane_center(double y) const;
    double distance_to_edge(double y) const;
    bool in_rightmost_lane(double y) const { return y >= 0.0 && y < lane_width; }

    bool operator==(const RoadGeometry&) const = default;
};

struct Environment {
    std::string id;
    RoadGeometry road;
    CarState ego_init;
    std::vector<CarState> other_trajectory;  // horizon + 1 states

    bool operator==(const Environment&) const = default;
};

struct Trajectory {
    std::vector<Control> controls;
    std::vector<CarState> states;
    FeatureVector phi{};   // cumulative, raw units
    bool clamped = false;  // some control was outside the bounds

    std::size_t horizon() const { return controls.size(); }
    bool operator==(const Trajectory&) const = default;
};

struct StepResult {
    CarState state;
    bool clamped = false;
};

/// Wraps an angle into [-pi, pi).
double wrap_angle(double angle);

/// Clamps a control into the configured bounds; returns true when it had to.
bool clamp_control(Control& control, const DynamicsConfig& dynamics);

/// One kinematic bicycle step. Out-of-bound controls are clamped and flagged.
StepResult step(const CarState& state, const Control& control, const DynamicsConfig& dynamics);

/// Throws HorizonMismatch unless controls.size() == config.horizon.
Trajectory rollout(const Environment& env, std::span<const Control> controls,
                   const WorldConfig& config);

/// Seeded environment set: three lanes, ego car in a random lane, another car
/// ahead moving at constant speed and sometimes changing lanes.
std::vector<Environment> generate_environments(std::size_t count, std::uint64_t seed,
                                               const WorldConfig& config,
                                               const std::string& id_prefix = "env");

void save_environments(const std::filesystem::path& path, const std::vector<Environment>& envs);
std::vector<Environment> load_environments(const std::filesystem::path& path);

}  // namespace richpref

#endif  // RICHPREF_WORLD_HPP
