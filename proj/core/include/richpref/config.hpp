#ifndef RICHPREF_CONFIG_HPP
#define RICHPREF_CONFIG_HPP

#include <cstddef>

namespace richpref {

/// Kinematic bicycle constants. Distances are in lane widths.
struct DynamicsConfig {
    double dt = 0.5;
    double wheelbase = 1.0;
    double steer_max = 0.5;
    double accel_max = 0.25;
    double speed_max = 2.0;
};

/// Length scales of the exponential features.
struct FeatureParams {
    double k_center = 4.0;        // f1
    double k_edge = 4.0;          // f2
    double k_car = 1.0;           // f4
    double lateral_weight = 4.0;  // f4, weight on the lateral gap
};

struct WorldConfig {
    DynamicsConfig dynamics;
    FeatureParams features;
    std::size_t horizon = 10;
};

}  // namespace richpref

#endif  // RICHPREF_CONFIG_HPP
