#ifndef RICHPREF_COMMON_HPP
#define RICHPREF_COMMON_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

namespace richpref {

inline constexpr std::size_t kFeatureCount = 7;

/// One real per driving feature, indexed f1..f7 as 0..6.
using FeatureVector = std::array<double, kFeatureCount>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

inline FeatureVector operator+(const FeatureVector& a, const FeatureVector& b) {
    FeatureVector out{};
    for (std::size_t i = 0; i < kFeatureCount; ++i) out[i] = a[i] + b[i];
    return out;
}

inline FeatureVector operator-(const FeatureVector& a, const FeatureVector& b) {
    FeatureVector out{};
    for (std::size_t i = 0; i < kFeatureCount; ++i) out[i] = a[i] - b[i];
    return out;
}

inline FeatureVector& operator+=(FeatureVector& a, const FeatureVector& b) {
    for (std::size_t i = 0; i < kFeatureCount; ++i) a[i] += b[i];
    return a;
}

inline FeatureVector operator*(double s, const FeatureVector& a) {
    FeatureVector out{};
    for (std::size_t i = 0; i < kFeatureCount; ++i) out[i] = s * a[i];
    return out;
}

inline double dot(const FeatureVector& a, const FeatureVector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < kFeatureCount; ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const FeatureVector& a) { return std::sqrt(dot(a, a)); }

inline double max_abs(const FeatureVector& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace richpref

#endif  // RICHPREF_COMMON_HPP
