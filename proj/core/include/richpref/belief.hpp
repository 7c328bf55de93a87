#ifndef RICHPREF_BELIEF_HPP
#define RICHPREF_BELIEF_HPP

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "richpref/features.hpp"
#include "richpref/observation.hpp"

namespace richpref {

/// Fixed finite set of unit-norm reward hypotheses.
///
/// Sampled uniformly on the unit 6-sphere from a seed. A ground truth can be
/// injected at a seeded position so that its posterior probability is defined.
/// `tie_order` is a seeded permutation used to break exact ties in argmax.
class HypothesisSet {
public:
    static HypothesisSet sample(std::size_t count, std::uint64_t seed);

    /// Replaces one sampled hypothesis by `ground_truth`.
    static HypothesisSet sample_with_ground_truth(std::size_t count, std::uint64_t seed,
                                                  const RewardWeights& ground_truth);

    /// Explicit set; mostly for tests and deserialization.
    HypothesisSet(std::vector<RewardWeights> thetas, std::uint64_t seed,
                  std::optional<std::size_t> injected_gt = std::nullopt);

    std::size_t size() const { return thetas_.size(); }
    const RewardWeights& operator[](std::size_t i) const { return thetas_[i]; }
    const std::vector<RewardWeights>& thetas() const { return thetas_; }
    std::uint64_t seed() const { return seed_; }
    std::optional<std::size_t> injected_gt() const { return injected_gt_; }
    const std::vector<std::size_t>& tie_order() const { return tie_order_; }

    /// True when the thetas are reproducible from (size, seed, injected ground truth).
    bool sampled() const { return sampled_; }

private:
    std::vector<RewardWeights> thetas_;
    std::uint64_t seed_ = 0;
    bool sampled_ = false;
    std::optional<std::size_t> injected_gt_;
    std::vector<std::size_t> tie_order_;
};

/// Normalized discrete distribution over a hypothesis set, in log space.
/// Values are immutable snapshots; updates return new beliefs.
class Belief {
public:
    static constexpr double kNormalizationTolerance = 1e-9;

    static Belief uniform(std::shared_ptr<const HypothesisSet> hypotheses);

    /// Normalizes the given log weights. Throws DegenerateUpdate when all are -inf.
    Belief(std::shared_ptr<const HypothesisSet> hypotheses, std::vector<double> log_weights);

    const HypothesisSet& hypotheses() const { return *hypotheses_; }
    const std::shared_ptr<const HypothesisSet>& hypotheses_ptr() const { return hypotheses_; }
    std::size_t size() const { return log_weights_.size(); }

    std::span<const double> log_weights() const { return log_weights_; }
    double probability(std::size_t i) const;
    std::vector<double> probabilities() const;

    double entropy() const;

    /// Highest-probability hypothesis; exact ties resolved by the set's tie order.
    std::size_t map_index() const;

    /// Indices sorted by decreasing probability, tie order within equal values.
    std::vector<std::size_t> top(std::size_t k) const;

private:
    std::shared_ptr<const HypothesisSet> hypotheses_;
    std::vector<double> log_weights_;
};

/// b'(theta) proportional to b(theta) P(a | theta, q). Skipped answers update
/// on the comparison only. Throws DegenerateUpdate if no hypothesis can have
/// produced the answer; the input belief is never modified.
Belief update(const Belief& belief, const Contrast& q, const Answer& a,
              const RationalityParams& params);

/// Adds precomputed per-hypothesis log-likelihoods and renormalizes.
Belief update_with_log_likelihoods(const Belief& belief, std::span<const double> log_likelihoods);

inline constexpr double kCloseThreshold = 0.9;

struct BeliefSummary {
    std::size_t map_index = 0;
    FeatureVector map_theta{};
    std::optional<double> p_gt;
    std::optional<double> close_mass;
    std::optional<double> map_dot_gt;
    double entropy = 0.0;
};

/// MAP, entropy and, given a ground truth, its probability and the mass of
/// hypotheses with dot product above `close_threshold`. Throws
/// MissingGroundTruth if a ground truth is passed but none was injected.
BeliefSummary summarize(const Belief& belief, const std::optional<RewardWeights>& theta_gt,
                        double close_threshold = kCloseThreshold);

std::string belief_to_json(const Belief& belief);
Belief belief_from_json(const std::string& text);

}  // namespace richpref

#endif  // RICHPREF_BELIEF_HPP
