#ifndef RICHPREF_LOGMATH_HPP
#define RICHPREF_LOGMATH_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace richpref {

/// log(sum(exp(x))). Returns -inf for an empty span or when every entry is -inf.
inline double log_sum_exp(std::span<const double> x) {
    const double ninf = -std::numeric_limits<double>::infinity();
    if (x.empty()) return ninf;
    const double m = *std::max_element(x.begin(), x.end());
    if (m == ninf) return ninf;
    if (std::isinf(m)) return m;
    double s = 0.0;
    for (double v : x) s += std::exp(v - m);
    return m + std::log(s);
}

/// log(1 / (1 + exp(-x))) without overflow in either tail.
inline double log_sigmoid(double x) {
    if (x >= 0.0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace richpref

#endif  // RICHPREF_LOGMATH_HPP
