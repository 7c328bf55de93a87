#include "richpref/features.hpp"

#include <algorithm>
#include <cmath>

#include "richpref/error.hpp"

namespace richpref {

const std::array<std::string_view, kFeatureCount>& feature_labels() {
    static constexpr std::array<std::string_view, kFeatureCount> labels{
        "lane-center", "road-edge", "heading-alignment", "car-distance",
        "speed",       "right-lane", "reverse"};
    return labels;
}

const std::array<std::string_view, kFeatureCount>& feature_descriptions() {
    static constexpr std::array<std::string_view, kFeatureCount> descriptions{
        "Staying close to the center of the lane",
        "Driving close to the edge of the road",
        "Keeping the car pointed along the road",
        "Getting close to the other car",
        "Driving fast",
        "Being in the right lane",
        "Driving in reverse",
    };
    return descriptions;
}

RewardWeights::RewardWeights(const FeatureVector& values) : values_(values) {
    const double n = norm(values);
    if (!std::isfinite(n) || std::abs(n - 1.0) > kNormTolerance) {
        throw Error(ErrorCode::InvalidArgument, "reward weights must have unit norm");
    }
}

RewardWeights RewardWeights::normalized(const FeatureVector& direction) {
    const double n = norm(direction);
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw Error(ErrorCode::InvalidArgument, "cannot normalize a zero or non-finite direction");
    }
    return RewardWeights((1.0 / n) * direction);
}

RewardWeights RewardWeights::random(Rng& rng) {
    FeatureVector v{};
    double n = 0.0;
    do {
        for (double& x : v) x = standard_normal(rng);
        n = norm(v);
    } while (n < 1e-12);
    return normalized(v);
}

RewardWeights RewardWeights::basis(Feature feature) {
    FeatureVector v{};
    v[static_cast<std::size_t>(feature)] = 1.0;
    return RewardWeights(v);
}

FeatureVector per_step_features(const Environment& env, const CarState& state,
                                const Control& /*control*/, std::size_t t,
                                const FeatureParams& params) {
    const RoadGeometry& road = env.road;
    const double d_center = road.distance_to_lane_center(state.y);
    const double d_edge = road.distance_to_edge(state.y);

    const CarState& other = env.other_trajectory.at(t);
    const double dx = state.x - other.x;
    const double dy = state.y - other.y;

    FeatureVector f{};
    f[0] = std::exp(-params.k_center * d_center * d_center);
    f[1] = std::exp(-params.k_edge * d_edge * d_edge);
    f[2] = std::cos(state.heading);
    f[3] = std::exp(-params.k_car * (dx * dx + params.lateral_weight * dy * dy));
    f[4] = state.speed;
    f[5] = road.in_rightmost_lane(state.y) ? 1.0 : 0.0;
    f[6] = std::min(state.speed, 0.0);
    return f;
}

FeatureVector cumulative_features(const Environment& env, std::span<const CarState> states,
                                  std::span<const Control> controls, const FeatureParams& params,
                                  std::size_t first, std::size_t last) {
    if (states.size() != controls.size() + 1 || first > last || last > controls.size()) {
        throw Error(ErrorCode::InvalidArgument, "inconsistent trajectory segment");
    }
    FeatureVector phi{};
    for (std::size_t t = first; t < last; ++t) {
        phi += per_step_features(env, states[t + 1], controls[t], t + 1, params);
    }
    return phi;
}

FeatureVector cumulative_features(const Environment& env, const Trajectory& traj,
                                  const FeatureParams& params) {
    return cumulative_features(env, traj.states, traj.controls, params, 0, traj.controls.size());
}

}  // namespace richpref
