#ifndef RICHPREF_SIMUSER_HPP
#define RICHPREF_SIMUSER_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "richpref/features.hpp"
#include "richpref/observation.hpp"
#include "richpref/random.hpp"

namespace richpref {

struct SimUserConfig {
    RewardWeights theta_gt = RewardWeights::basis(Feature::LaneCenter);
    double beta_c = kInfinity;
    double beta_f = kInfinity;
    /// Skip half-width; nullopt means the user never skips.
    std::optional<double> epsilon;
    std::uint64_t seed = 0;
};

/// Answers queries by sampling the observation model under the ground truth.
/// Infinite rationality answers by argmax, breaking exact ties with the
/// user's own random stream.
class SimulatedUser {
public:
    explicit SimulatedUser(SimUserConfig config);

    /// With ask_feature false the answer only carries the comparison.
    Answer answer(const Contrast& q, bool ask_feature = true);

    const SimUserConfig& config() const { return config_; }

private:
    SimUserConfig config_;
    Rng rng_;
};

struct AnswerLogEntry {
    std::size_t query_id = 0;
    Answer answer;
    FeatureVector phi_a{};
    FeatureVector phi_b{};

    bool operator==(const AnswerLogEntry&) const = default;
};

/// Append-only record of answered queries; the service writes the same format.
struct AnswerLog {
    FeatureScales feature_scales;
    std::vector<AnswerLogEntry> entries;

    void append(AnswerLogEntry entry) { entries.push_back(std::move(entry)); }
    bool operator==(const AnswerLog&) const = default;
};

std::string answer_log_to_json(const AnswerLog& log);
AnswerLog answer_log_from_json(const std::string& text);
void save_answer_log(const std::filesystem::path& path, const AnswerLog& log);
AnswerLog load_answer_log(const std::filesystem::path& path);

/// Log-spaced search grid for the rationality coefficient.
struct BetaGrid {
    double lo = 1e-3;
    double hi = 1e3;
    std::size_t points = 4000;

    std::vector<double> values() const;
};

struct BetaEstimate {
    double beta = 0.0;
    double log_likelihood = 0.0;
    /// Likelihood still increasing at the top of the grid (separable data).
    bool degenerate = false;
};

/// Grid maximum-likelihood estimate of the comparison rationality.
/// Throws EmptyLog.
BetaEstimate estimate_beta_c(const AnswerLog& log, const FeatureVector& theta_star,
                             const BetaGrid& grid = {});

/// Feature rationality with beta_c held fixed. Throws NoFeatureAnswers.
BetaEstimate estimate_beta_f(const AnswerLog& log, const FeatureVector& theta_star,
                             double beta_c_star, const BetaGrid& grid = {});

}  // namespace richpref

#endif  // RICHPREF_SIMUSER_HPP
