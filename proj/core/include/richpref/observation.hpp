#ifndef RICHPREF_OBSERVATION_HPP
#define RICHPREF_OBSERVATION_HPP

#include <cstddef>
#include <cstdint>
#include <optional>

#include "richpref/common.hpp"
#include "richpref/features.hpp"
#include "richpref/random.hpp"
#include "richpref/world.hpp"

namespace richpref {

enum class Choice : std::uint8_t { A = 0, B = 1 };

inline Choice other(Choice c) { return c == Choice::A ? Choice::B : Choice::A; }

/// Comparison plus an optional "which feature mattered most" index (0-based).
/// An absent feature is a skip ("I don't know"), or a comparison-only answer.
struct Answer {
    Choice comparison = Choice::A;
    std::optional<std::size_t> feature;

    bool skipped() const { return !feature.has_value(); }
    bool operator==(const Answer&) const = default;
};

/// Model or simulation noise. Infinity means argmax behaviour.
struct RationalityParams {
    double beta_c = kInfinity;
    double beta_f = kInfinity;
    double epsilon = 0.0;  // skip half-width around 1/7

    void validate() const;
};

/// Two trajectories in the same environment. `env` indexes the owning pool.
struct Query {
    std::size_t id = 0;
    std::size_t env = 0;
    Trajectory a;
    Trajectory b;

    bool operator==(const Query&) const = default;
};

inline constexpr double kDistinctPhiTolerance = 1e-9;

/// Throws InvalidArgument when the trajectories differ in horizon or have
/// cumulative features equal to within kDistinctPhiTolerance.
void validate_query(const Query& q);

/// Everything the answer model needs to know about a query.
struct Contrast {
    FeatureVector delta{};         // phi_A - phi_B, raw units (comparison model)
    FeatureVector scaled_delta{};  // delta / feature scales (feature model)

    Contrast swapped() const;
};

Contrast make_contrast(const FeatureVector& phi_a, const FeatureVector& phi_b,
                       const FeatureScales& scales);
Contrast make_contrast(const Query& q, const FeatureScales& scales);

/// P(c = A | theta, q).
double p_comparison(const FeatureVector& theta, const Contrast& q, double beta_c);
double log_p_comparison(const FeatureVector& theta, const Contrast& q, double beta_c, Choice c);

/// Softmax over beta_f * |theta_f * scaled_delta_f|; point mass on the argmax
/// (ties shared equally) when beta_f is infinite.
FeatureVector p_feature(const FeatureVector& theta, const Contrast& q, double beta_f);
FeatureVector log_p_feature(const FeatureVector& theta, const Contrast& q, double beta_f);

/// Indices achieving the maximal feature logit.
std::vector<std::size_t> feature_argmax(const FeatureVector& theta, const Contrast& q);

/// P(c, f | theta, q); the answer must carry a feature.
double p_answer(const FeatureVector& theta, const Contrast& q, const RationalityParams& params,
                const Answer& a);

/// True when every feature probability lies within epsilon of 1/7.
bool p_skip(const FeatureVector& theta, const Contrast& q, const RationalityParams& params);
bool p_skip(const FeatureVector& feature_probs, double epsilon);

/// log P(a | theta, q): comparison only for skipped answers.
double log_likelihood(const FeatureVector& theta, const Contrast& q,
                      const RationalityParams& params, const Answer& a);

}  // namespace richpref

#endif  // RICHPREF_OBSERVATION_HPP
