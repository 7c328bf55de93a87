#include "richpref/observation.hpp"

#include <algorithm>
#include <cmath>

#include "richpref/error.hpp"
#include "richpref/logmath.hpp"

namespace richpref {

namespace {

constexpr double kUniformFeatureProb = 1.0 / static_cast<double>(kFeatureCount);

FeatureVector salience(const FeatureVector& theta, const Contrast& q) {
    FeatureVector s{};
    for (std::size_t f = 0; f < kFeatureCount; ++f) s[f] = std::abs(theta[f] * q.scaled_delta[f]);
    return s;
}

bool valid_beta(double beta) { return beta >= 0.0 && !std::isnan(beta); }

}  // namespace

void RationalityParams::validate() const {
    if (!valid_beta(beta_c) || !valid_beta(beta_f)) {
        throw Error(ErrorCode::InvalidArgument, "rationality coefficients must be nonnegative");
    }
    if (!(epsilon >= 0.0 && epsilon <= kUniformFeatureProb)) {
        throw Error(ErrorCode::InvalidArgument, "skip half-width must lie in [0, 1/7]");
    }
}

void validate_query(const Query& q) {
    if (q.a.horizon() != q.b.horizon()) {
        throw Error(ErrorCode::InvalidArgument, "query trajectories have different horizons");
    }
    if (max_abs(q.a.phi - q.b.phi) <= kDistinctPhiTolerance) {
        throw Error(ErrorCode::InvalidArgument, "query trajectories have identical features");
    }
}

Contrast Contrast::swapped() const {
    Contrast c;
    c.delta = -1.0 * delta;
    c.scaled_delta = -1.0 * scaled_delta;
    return c;
}

Contrast make_contrast(const FeatureVector& phi_a, const FeatureVector& phi_b,
                       const FeatureScales& scales) {
    Contrast c;
    c.delta = phi_a - phi_b;
    c.scaled_delta = scales.standardize(c.delta);
    return c;
}

Contrast make_contrast(const Query& q, const FeatureScales& scales) {
    return make_contrast(q.a.phi, q.b.phi, scales);
}

double p_comparison(const FeatureVector& theta, const Contrast& q, double beta_c) {
    const double diff = dot(theta, q.delta);
    if (beta_c == 0.0 || diff == 0.0) return 0.5;
    if (std::isinf(beta_c)) return diff > 0.0 ? 1.0 : 0.0;
    return sigmoid(beta_c * diff);
}

double log_p_comparison(const FeatureVector& theta, const Contrast& q, double beta_c, Choice c) {
    double diff = dot(theta, q.delta);
    if (c == Choice::B) diff = -diff;
    if (beta_c == 0.0 || diff == 0.0) return -std::log(2.0);
    if (std::isinf(beta_c)) return diff > 0.0 ? 0.0 : -kInfinity;
    return log_sigmoid(beta_c * diff);
}

std::vector<std::size_t> feature_argmax(const FeatureVector& theta, const Contrast& q) {
    const FeatureVector s = salience(theta, q);
    const double best = *std::max_element(s.begin(), s.end());
    std::vector<std::size_t> idx;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        if (s[f] == best) idx.push_back(f);
    }
    return idx;
}

FeatureVector log_p_feature(const FeatureVector& theta, const Contrast& q, double beta_f) {
    FeatureVector out{};
    if (std::isinf(beta_f)) {
        const auto top = feature_argmax(theta, q);
        out.fill(-kInfinity);
        const double lp = -std::log(static_cast<double>(top.size()));
        for (std::size_t f : top) out[f] = lp;
        return out;
    }
    const FeatureVector s = salience(theta, q);
    FeatureVector logits{};
    for (std::size_t f = 0; f < kFeatureCount; ++f) logits[f] = beta_f * s[f];
    const double lse = log_sum_exp(logits);
    for (std::size_t f = 0; f < kFeatureCount; ++f) out[f] = logits[f] - lse;
    return out;
}

FeatureVector p_feature(const FeatureVector& theta, const Contrast& q, double beta_f) {
    FeatureVector out{};
    if (std::isinf(beta_f)) {
        const auto top = feature_argmax(theta, q);
        const double p = 1.0 / static_cast<double>(top.size());
        for (std::size_t f : top) out[f] = p;
        return out;
    }
    const FeatureVector s = salience(theta, q);
    double m = -kInfinity;
    for (std::size_t f = 0; f < kFeatureCount; ++f) m = std::max(m, beta_f * s[f]);
    double total = 0.0;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        out[f] = std::exp(beta_f * s[f] - m);
        total += out[f];
    }
    for (double& p : out) p /= total;
    return out;
}

double p_answer(const FeatureVector& theta, const Contrast& q, const RationalityParams& params,
                const Answer& a) {
    if (a.skipped()) {
        throw Error(ErrorCode::InvalidArgument, "p_answer needs an answer with a feature");
    }
    const double pa = p_comparison(theta, q, params.beta_c);
    const double pc = a.comparison == Choice::A ? pa : 1.0 - pa;
    return pc * p_feature(theta, q, params.beta_f)[*a.feature];
}

bool p_skip(const FeatureVector& feature_probs, double epsilon) {
    return std::all_of(feature_probs.begin(), feature_probs.end(), [&](double p) {
        return kUniformFeatureProb - epsilon <= p && p <= kUniformFeatureProb + epsilon;
    });
}

bool p_skip(const FeatureVector& theta, const Contrast& q, const RationalityParams& params) {
    return p_skip(p_feature(theta, q, params.beta_f), params.epsilon);
}

double log_likelihood(const FeatureVector& theta, const Contrast& q,
                      const RationalityParams& params, const Answer& a) {
    double ll = log_p_comparison(theta, q, params.beta_c, a.comparison);
    if (!a.skipped()) {
        if (*a.feature >= kFeatureCount) {
            throw Error(ErrorCode::InvalidArgument, "feature index out of range");
        }
        ll += log_p_feature(theta, q, params.beta_f)[*a.feature];
    }
    return ll;
}

}  // namespace richpref
