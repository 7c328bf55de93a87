#include "richpref/belief.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "richpref/error.hpp"
#include "richpref/logmath.hpp"
#include "richpref/random.hpp"

namespace richpref {

namespace {

std::vector<std::size_t> make_tie_order(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = make_rng(seed, 1);
    shuffle(order.begin(), order.end(), rng);
    return order;
}

std::vector<RewardWeights> sample_thetas(std::size_t count, std::uint64_t seed) {
    Rng rng = make_rng(seed, 0);
    std::vector<RewardWeights> thetas;
    thetas.reserve(count);
    for (std::size_t i = 0; i < count; ++i) thetas.push_back(RewardWeights::random(rng));
    return thetas;
}

}  // namespace

HypothesisSet::HypothesisSet(std::vector<RewardWeights> thetas, std::uint64_t seed,
                             std::optional<std::size_t> injected_gt)
    : thetas_(std::move(thetas)), seed_(seed), injected_gt_(injected_gt) {
    if (thetas_.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "a hypothesis set needs at least two members");
    }
    if (injected_gt_ && *injected_gt_ >= thetas_.size()) {
        throw Error(ErrorCode::InvalidArgument, "injected ground-truth index out of range");
    }
    for (std::size_t i = 0; i < thetas_.size(); ++i) {
        for (std::size_t j = i + 1; j < thetas_.size(); ++j) {
            if (thetas_[i] == thetas_[j]) {
                throw Error(ErrorCode::InvalidArgument, "hypotheses must be pairwise distinct");
            }
        }
    }
    tie_order_ = make_tie_order(thetas_.size(), seed_);
}

HypothesisSet HypothesisSet::sample(std::size_t count, std::uint64_t seed) {
    HypothesisSet hs(sample_thetas(count, seed), seed);
    hs.sampled_ = true;
    return hs;
}

HypothesisSet HypothesisSet::sample_with_ground_truth(std::size_t count, std::uint64_t seed,
                                                      const RewardWeights& ground_truth) {
    if (count < 2) {
        throw Error(ErrorCode::InvalidArgument, "a hypothesis set needs at least two members");
    }
    auto thetas = sample_thetas(count, seed);
    Rng rng = make_rng(seed, 2);
    const auto slot = static_cast<std::size_t>(uniform_index(rng, count));
    thetas[slot] = ground_truth;
    HypothesisSet hs(std::move(thetas), seed, slot);
    hs.sampled_ = true;
    return hs;
}

Belief::Belief(std::shared_ptr<const HypothesisSet> hypotheses, std::vector<double> log_weights)
    : hypotheses_(std::move(hypotheses)), log_weights_(std::move(log_weights)) {
    if (!hypotheses_ || hypotheses_->size() != log_weights_.size()) {
        throw Error(ErrorCode::InvalidArgument, "belief size does not match its hypothesis set");
    }
    for (double w : log_weights_) {
        if (std::isnan(w) || w == kInfinity) {
            throw Error(ErrorCode::InvalidArgument, "belief log weights must be finite or -inf");
        }
    }
    const double lse = log_sum_exp(log_weights_);
    if (lse == -kInfinity) {
        throw Error(ErrorCode::DegenerateUpdate, "every hypothesis has zero probability");
    }
    for (double& w : log_weights_) w -= lse;
}

Belief Belief::uniform(std::shared_ptr<const HypothesisSet> hypotheses) {
    const std::size_t n = hypotheses->size();
    return Belief(std::move(hypotheses),
                  std::vector<double>(n, -std::log(static_cast<double>(n))));
}

double Belief::probability(std::size_t i) const { return std::exp(log_weights_.at(i)); }

std::vector<double> Belief::probabilities() const {
    std::vector<double> p(log_weights_.size());
    std::transform(log_weights_.begin(), log_weights_.end(), p.begin(),
                   [](double w) { return std::exp(w); });
    return p;
}

double Belief::entropy() const {
    double h = 0.0;
    for (double w : log_weights_) {
        if (w == -kInfinity) continue;
        h -= std::exp(w) * w;
    }
    return std::max(h, 0.0);
}

std::size_t Belief::map_index() const {
    const double best = *std::max_element(log_weights_.begin(), log_weights_.end());
    for (std::size_t i : hypotheses_->tie_order()) {
        if (log_weights_[i] == best) return i;
    }
    return hypotheses_->tie_order().front();  // unreachable
}

std::vector<std::size_t> Belief::top(std::size_t k) const {
    std::vector<std::size_t> order = hypotheses_->tie_order();
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return log_weights_[a] > log_weights_[b];
    });
    order.resize(std::min(k, order.size()));
    return order;
}

Belief update_with_log_likelihoods(const Belief& belief, std::span<const double> log_likelihoods) {
    if (log_likelihoods.size() != belief.size()) {
        throw Error(ErrorCode::InvalidArgument, "likelihood count does not match the belief");
    }
    std::vector<double> lw(belief.log_weights().begin(), belief.log_weights().end());
    for (std::size_t i = 0; i < lw.size(); ++i) lw[i] += log_likelihoods[i];
    return Belief(belief.hypotheses_ptr(), std::move(lw));
}

Belief update(const Belief& belief, const Contrast& q, const Answer& a,
              const RationalityParams& params) {
    const HypothesisSet& hs = belief.hypotheses();
    std::vector<double> ll(hs.size());
    for (std::size_t i = 0; i < hs.size(); ++i) {
        ll[i] = log_likelihood(hs[i].values(), q, params, a);
    }
    return update_with_log_likelihoods(belief, ll);
}

BeliefSummary summarize(const Belief& belief, const std::optional<RewardWeights>& theta_gt,
                        double close_threshold) {
    BeliefSummary s;
    s.map_index = belief.map_index();
    s.map_theta = belief.hypotheses()[s.map_index].values();
    s.entropy = belief.entropy();
    if (theta_gt) {
        const auto gt_index = belief.hypotheses().injected_gt();
        if (!gt_index) {
            throw Error(ErrorCode::MissingGroundTruth,
                        "ground-truth probability needs an injected ground truth");
        }
        s.p_gt = belief.probability(*gt_index);
        double close = 0.0;
        const HypothesisSet& hs = belief.hypotheses();
        for (std::size_t i = 0; i < hs.size(); ++i) {
            if (hs[i].dot(*theta_gt) > close_threshold) close += belief.probability(i);
        }
        s.close_mass = close;
        s.map_dot_gt = dot(s.map_theta, theta_gt->values());
    }
    return s;
}

}  // namespace richpref
