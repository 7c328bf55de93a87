#ifndef RICHPREF_FEATURES_HPP
#define RICHPREF_FEATURES_HPP

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include "richpref/common.hpp"
#include "richpref/config.hpp"
#include "richpref/random.hpp"
#include "richpref/world.hpp"

namespace richpref {

enum class Feature : std::size_t {
    LaneCenter = 0,
    RoadEdge,
    HeadingAlignment,
    CarDistance,
    Speed,
    RightLane,
    Reverse,
};

const std::array<std::string_view, kFeatureCount>& feature_labels();
const std::array<std::string_view, kFeatureCount>& feature_descriptions();

/// Unit-norm weight vector over the seven features.
class RewardWeights {
public:
    static constexpr double kNormTolerance = 1e-9;

    /// Throws InvalidArgument unless values already have unit norm.
    explicit RewardWeights(const FeatureVector& values);

    /// Scales a nonzero direction to unit norm.
    static RewardWeights normalized(const FeatureVector& direction);

    /// Uniform on the unit 6-sphere.
    static RewardWeights random(Rng& rng);

    static RewardWeights basis(Feature feature);

    const FeatureVector& values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double dot(const RewardWeights& other) const { return richpref::dot(values_, other.values_); }

    bool operator==(const RewardWeights&) const = default;

private:
    FeatureVector values_;
};

/// Features of one transition, evaluated at the car state it produced.
/// `t` indexes the other car's trajectory.
FeatureVector per_step_features(const Environment& env, const CarState& state,
                                const Control& control, std::size_t t,
                                const FeatureParams& params);

/// Sum of per-step features over transitions [first, last).
FeatureVector cumulative_features(const Environment& env, std::span<const CarState> states,
                                  std::span<const Control> controls, const FeatureParams& params,
                                  std::size_t first, std::size_t last);

/// Sum over every transition of the trajectory.
FeatureVector cumulative_features(const Environment& env, const Trajectory& traj,
                                  const FeatureParams& params);

inline double reward(const FeatureVector& theta, const FeatureVector& phi) {
    return dot(theta, phi);
}

inline double reward(const RewardWeights& theta, const FeatureVector& phi) {
    return dot(theta.values(), phi);
}

/// Per-feature positive divisors applied before the feature-answer model.
struct FeatureScales {
    FeatureVector values{1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0};

    FeatureVector standardize(const FeatureVector& phi) const {
        FeatureVector out{};
        for (std::size_t i = 0; i < kFeatureCount; ++i) out[i] = phi[i] / values[i];
        return out;
    }

    bool operator==(const FeatureScales&) const = default;
};

}  // namespace richpref

#endif  // RICHPREF_FEATURES_HPP
