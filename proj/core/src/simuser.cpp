#include "richpref/simuser.hpp"

#include <cmath>

#include "richpref/error.hpp"
#include "richpref/logmath.hpp"

namespace richpref {

SimulatedUser::SimulatedUser(SimUserConfig config)
    : config_(std::move(config)), rng_(make_rng(config_.seed, 0x5eed)) {
    if (!(config_.beta_c >= 0.0) || !(config_.beta_f >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "simulated rationality must be nonnegative");
    }
}

Answer SimulatedUser::answer(const Contrast& q, bool ask_feature) {
    const FeatureVector& theta = config_.theta_gt.values();
    Answer a;
    // Exact ties under infinite rationality give 0.5 and are decided by the coin.
    a.comparison = uniform01(rng_) < p_comparison(theta, q, config_.beta_c) ? Choice::A : Choice::B;
    if (!ask_feature) return a;

    const FeatureVector pf = p_feature(theta, q, config_.beta_f);
    if (config_.epsilon && p_skip(pf, *config_.epsilon)) return a;

    const double u = uniform01(rng_);
    double cumulative = 0.0;
    std::size_t pick = kFeatureCount;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        if (pf[f] <= 0.0) continue;
        cumulative += pf[f];
        pick = f;
        if (u < cumulative) break;
    }
    a.feature = pick;
    return a;
}

std::vector<double> BetaGrid::values() const {
    if (points < 2 || !(lo > 0.0) || !(hi > lo)) {
        throw Error(ErrorCode::InvalidArgument, "beta grid needs 0 < lo < hi and at least two points");
    }
    std::vector<double> v(points);
    const double log_lo = std::log(lo);
    const double log_span = std::log(hi) - log_lo;
    for (std::size_t k = 0; k < points; ++k) {
        v[k] = std::exp(log_lo + log_span * static_cast<double>(k) / static_cast<double>(points - 1));
    }
    v.front() = lo;
    v.back() = hi;
    return v;
}

namespace {

// I_i * theta^T (phi_A - phi_B) for each entry.
std::vector<double> comparison_margins(const AnswerLog& log, const FeatureVector& theta) {
    std::vector<double> margins;
    margins.reserve(log.entries.size());
    for (const auto& e : log.entries) {
        const double z = dot(theta, e.phi_a - e.phi_b);
        margins.push_back(e.answer.comparison == Choice::A ? z : -z);
    }
    return margins;
}

// Improvements below this relative size count as ties, so flat likelihoods
// resolve to the smallest beta.
bool improves(double candidate, double incumbent) {
    if (incumbent == -kInfinity) return candidate > incumbent;
    return candidate > incumbent + 1e-12 * (1.0 + std::abs(incumbent));
}

double comparison_log_likelihood(const std::vector<double>& margins, double beta) {
    double ll = 0.0;
    for (double z : margins) {
        if (z == 0.0) ll -= std::log(2.0);
        else if (std::isinf(beta)) ll += z > 0.0 ? 0.0 : -kInfinity;
        else ll += log_sigmoid(beta * z);
    }
    return ll;
}

}  // namespace

BetaEstimate estimate_beta_c(const AnswerLog& log, const FeatureVector& theta_star,
                             const BetaGrid& grid) {
    if (log.entries.empty()) throw Error(ErrorCode::EmptyLog, "answer log is empty");
    const auto margins = comparison_margins(log, theta_star);

    BetaEstimate best;
    best.log_likelihood = -kInfinity;
    for (double beta : grid.values()) {
        const double ll = comparison_log_likelihood(margins, beta);
        if (improves(ll, best.log_likelihood)) {
            best.log_likelihood = ll;
            best.beta = beta;
        }
    }
    bool separable = true;
    for (double z : margins) separable = separable && z > 0.0;
    best.degenerate = separable;
    return best;
}

BetaEstimate estimate_beta_f(const AnswerLog& log, const FeatureVector& theta_star,
                             double beta_c_star, const BetaGrid& grid) {
    struct FeatureTerm {
        FeatureVector salience;
        std::size_t chosen;
    };
    std::vector<FeatureTerm> terms;
    for (const auto& e : log.entries) {
        if (e.answer.skipped()) continue;
        const FeatureVector scaled = log.feature_scales.standardize(e.phi_a - e.phi_b);
        FeatureTerm t{};
        for (std::size_t f = 0; f < kFeatureCount; ++f) t.salience[f] = std::abs(theta_star[f] * scaled[f]);
        t.chosen = *e.answer.feature;
        terms.push_back(t);
    }
    if (terms.empty()) throw Error(ErrorCode::NoFeatureAnswers, "no answered feature queries in the log");

    // The comparison factor does not depend on beta_f; it only shifts the reported value.
    const double comparison_term = comparison_log_likelihood(comparison_margins(log, theta_star), beta_c_star);

    BetaEstimate best;
    best.log_likelihood = -kInfinity;
    for (double beta : grid.values()) {
        double ll = 0.0;
        for (const auto& t : terms) {
            FeatureVector logits{};
            for (std::size_t f = 0; f < kFeatureCount; ++f) logits[f] = beta * t.salience[f];
            ll += logits[t.chosen] - log_sum_exp(logits);
        }
        if (improves(ll, best.log_likelihood)) {
            best.log_likelihood = ll;
            best.beta = beta;
        }
    }
    best.degenerate = best.beta == grid.hi;
    best.log_likelihood += comparison_term;
    return best;
}

}  // namespace richpref
