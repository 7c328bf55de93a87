#ifndef RICHPREF_ACTIVE_HPP
#define RICHPREF_ACTIVE_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "richpref/belief.hpp"
#include "richpref/observation.hpp"
#include "richpref/querygen.hpp"

namespace richpref {

enum class SelectionMode {
    Rich,
    ComparisonOnly,
    RichWithSkip,
    InformationGain,  // reserved; rejected by parse_mode
};

/// Accepts "rich", "comparison_only", "rich_with_skip". Throws InvalidArgument
/// for anything else, including the reserved "information_gain".
SelectionMode parse_mode(std::string_view name);
std::string_view to_string(SelectionMode mode);

/// Whether answers in this mode include a feature part.
inline bool asks_feature(SelectionMode mode) { return mode != SelectionMode::ComparisonOnly; }

/// Per-hypothesis answer probabilities for one query.
struct QueryLikelihoods {
    std::vector<double> p_a;            // P(c = A | theta_i)
    std::vector<FeatureVector> p_f;     // P(f | theta_i)
    std::vector<std::uint8_t> skip;     // P(skip | theta_i) in {0, 1}

    std::size_t size() const { return p_a.size(); }
};

QueryLikelihoods compute_likelihoods(const HypothesisSet& hypotheses, const Contrast& q,
                                     const RationalityParams& params);

/// E_theta[1 - P(a | theta, q)] for a full (c, f) answer.
double volume_removed(const Belief& b, const QueryLikelihoods& lk, const Answer& a);

/// E_theta sum_a P(a | theta, q) V(q, a) over the 14 (c, f) answers.
double expected_volume(const Belief& b, const QueryLikelihoods& lk);

/// Mixture of the comparison-only volume on skipping hypotheses and the rich
/// volume elsewhere.
double expected_volume_with_skip(const Belief& b, const QueryLikelihoods& lk);

/// E_theta sum_c P(c | theta, q) V^skip(q, c) over the two comparison answers.
double expected_volume_comparison(const Belief& b, const QueryLikelihoods& lk);

double selection_score(SelectionMode mode, const Belief& b, const QueryLikelihoods& lk);

// Convenience forms that compute the likelihoods on the fly.
double volume_removed(const Belief& b, const Contrast& q, const Answer& a,
                      const RationalityParams& params);
double expected_volume(const Belief& b, const Contrast& q, const RationalityParams& params);
double expected_volume_with_skip(const Belief& b, const Contrast& q, const RationalityParams& params);

/// Likelihoods for every (pool query, hypothesis) cell. Independent of the
/// belief, so one table serves a whole learning session.
class LikelihoodTable {
public:
    LikelihoodTable(const HypothesisSet& hypotheses, const QueryPool& pool,
                    const RationalityParams& params, std::size_t threads = 1);

    std::size_t size() const { return rows_.size(); }
    const QueryLikelihoods& operator[](std::size_t query) const { return rows_.at(query); }

    /// Log-likelihood of an answer under every hypothesis (comparison only when skipped).
    std::vector<double> log_likelihoods(std::size_t query, const Answer& a) const;

    const Contrast& contrast(std::size_t query) const { return contrasts_.at(query); }
    const RationalityParams& params() const { return params_; }

private:
    std::vector<RewardWeights> hypotheses_;
    RationalityParams params_;
    std::vector<Contrast> contrasts_;
    std::vector<QueryLikelihoods> rows_;
};

/// Argmax of the mode's criterion over queries not yet asked; exact ties go to
/// the lowest id. Throws PoolExhausted when every query has been asked.
std::size_t select_query(const Belief& b, const LikelihoodTable& table, SelectionMode mode,
                         const std::vector<bool>& asked);

/// Same selection without a precomputed table.
std::size_t select_query(const Belief& b, const QueryPool& pool, SelectionMode mode,
                         const RationalityParams& params, const std::vector<bool>& asked);

}  // namespace richpref

#endif  // RICHPREF_ACTIVE_HPP
