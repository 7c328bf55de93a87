#include "richpref/active.hpp"

#include <array>

#include "richpref/error.hpp"
#include "richpref/parallel.hpp"

namespace richpref {

namespace {

constexpr std::size_t kAnswerCount = 2 * kFeatureCount;

// Rich-answer marginal m(c, f) = sum_i w_i P(c | i) P(f | i); A answers first.
std::array<double, kAnswerCount> rich_marginal(std::span<const double> w, const QueryLikelihoods& lk) {
    std::array<double, kAnswerCount> m{};
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] == 0.0) continue;
        const double wa = w[i] * lk.p_a[i];
        const double wb = w[i] * (1.0 - lk.p_a[i]);
        const FeatureVector& pf = lk.p_f[i];
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            m[f] += wa * pf[f];
            m[kFeatureCount + f] += wb * pf[f];
        }
    }
    return m;
}

double comparison_marginal_a(std::span<const double> w, const QueryLikelihoods& lk) {
    double m = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) m += w[i] * lk.p_a[i];
    return m;
}

double ev_rich(std::span<const double> w, const QueryLikelihoods& lk) {
    const auto m = rich_marginal(w, lk);
    double ev = 0.0;
    for (double ma : m) ev += ma * (1.0 - ma);
    return ev;
}

double ev_comparison(std::span<const double> w, const QueryLikelihoods& lk) {
    const double ma = comparison_marginal_a(w, lk);
    const double mb = 1.0 - ma;
    return ma * (1.0 - ma) + mb * (1.0 - mb);
}

double ev_skip(std::span<const double> w, const QueryLikelihoods& lk) {
    const auto m = rich_marginal(w, lk);
    const double mc_a = comparison_marginal_a(w, lk);
    const double mc_b = 1.0 - mc_a;

    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] == 0.0) continue;
        const double pa = lk.p_a[i];
        if (lk.skip[i]) {
            total += w[i] * (pa * (1.0 - mc_a) + (1.0 - pa) * (1.0 - mc_b));
        } else {
            const FeatureVector& pf = lk.p_f[i];
            double inner = 0.0;
            for (std::size_t f = 0; f < kFeatureCount; ++f) {
                inner += pa * pf[f] * (1.0 - m[f]) + (1.0 - pa) * pf[f] * (1.0 - m[kFeatureCount + f]);
            }
            total += w[i] * inner;
        }
    }
    return total;
}

double score(SelectionMode mode, std::span<const double> w, const QueryLikelihoods& lk) {
    switch (mode) {
        case SelectionMode::Rich: return ev_rich(w, lk);
        case SelectionMode::ComparisonOnly: return ev_comparison(w, lk);
        case SelectionMode::RichWithSkip: return ev_skip(w, lk);
        case SelectionMode::InformationGain: break;
    }
    throw Error(ErrorCode::InvalidArgument, "information-gain selection is not implemented");
}

void check_size(const Belief& b, const QueryLikelihoods& lk) {
    if (b.size() != lk.size()) {
        throw Error(ErrorCode::InvalidArgument, "likelihoods do not match the belief size");
    }
}

}  // namespace

SelectionMode parse_mode(std::string_view name) {
    if (name == "rich") return SelectionMode::Rich;
    if (name == "comparison_only") return SelectionMode::ComparisonOnly;
    if (name == "rich_with_skip") return SelectionMode::RichWithSkip;
    if (name == "information_gain") {
        throw Error(ErrorCode::InvalidArgument, "information_gain selection is reserved and not implemented");
    }
    throw Error(ErrorCode::InvalidArgument, "unknown selection mode '" + std::string(name) + "'");
}

std::string_view to_string(SelectionMode mode) {
    switch (mode) {
        case SelectionMode::Rich: return "rich";
        case SelectionMode::ComparisonOnly: return "comparison_only";
        case SelectionMode::RichWithSkip: return "rich_with_skip";
        case SelectionMode::InformationGain: return "information_gain";
    }
    return "unknown";
}

QueryLikelihoods compute_likelihoods(const HypothesisSet& hypotheses, const Contrast& q,
                                     const RationalityParams& params) {
    QueryLikelihoods lk;
    const std::size_t n = hypotheses.size();
    lk.p_a.resize(n);
    lk.p_f.resize(n);
    lk.skip.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const FeatureVector& theta = hypotheses[i].values();
        lk.p_a[i] = p_comparison(theta, q, params.beta_c);
        lk.p_f[i] = p_feature(theta, q, params.beta_f);
        lk.skip[i] = p_skip(lk.p_f[i], params.epsilon) ? 1 : 0;
    }
    return lk;
}

double volume_removed(const Belief& b, const QueryLikelihoods& lk, const Answer& a) {
    check_size(b, lk);
    if (a.skipped()) throw Error(ErrorCode::InvalidArgument, "volume_removed needs a full answer");
    const auto w = b.probabilities();
    double removed = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double pc = a.comparison == Choice::A ? lk.p_a[i] : 1.0 - lk.p_a[i];
        removed += w[i] * (1.0 - pc * lk.p_f[i][*a.feature]);
    }
    return removed;
}

double expected_volume(const Belief& b, const QueryLikelihoods& lk) {
    check_size(b, lk);
    return ev_rich(b.probabilities(), lk);
}

double expected_volume_with_skip(const Belief& b, const QueryLikelihoods& lk) {
    check_size(b, lk);
    return ev_skip(b.probabilities(), lk);
}

double expected_volume_comparison(const Belief& b, const QueryLikelihoods& lk) {
    check_size(b, lk);
    return ev_comparison(b.probabilities(), lk);
}

double selection_score(SelectionMode mode, const Belief& b, const QueryLikelihoods& lk) {
    check_size(b, lk);
    return score(mode, b.probabilities(), lk);
}

double volume_removed(const Belief& b, const Contrast& q, const Answer& a,
                      const RationalityParams& params) {
    return volume_removed(b, compute_likelihoods(b.hypotheses(), q, params), a);
}

double expected_volume(const Belief& b, const Contrast& q, const RationalityParams& params) {
    return expected_volume(b, compute_likelihoods(b.hypotheses(), q, params));
}

double expected_volume_with_skip(const Belief& b, const Contrast& q, const RationalityParams& params) {
    return expected_volume_with_skip(b, compute_likelihoods(b.hypotheses(), q, params));
}

LikelihoodTable::LikelihoodTable(const HypothesisSet& hypotheses, const QueryPool& pool,
                                 const RationalityParams& params, std::size_t threads)
    : hypotheses_(hypotheses.thetas()), params_(params) {
    params.validate();
    contrasts_.reserve(pool.queries.size());
    for (std::size_t q = 0; q < pool.queries.size(); ++q) contrasts_.push_back(pool.contrast(q));
    rows_.resize(pool.queries.size());
    parallel_for(rows_.size(), threads, [&](std::size_t q) {
        rows_[q] = compute_likelihoods(hypotheses, contrasts_[q], params);
    });
}

std::vector<double> LikelihoodTable::log_likelihoods(std::size_t query, const Answer& a) const {
    const Contrast& q = contrasts_.at(query);
    std::vector<double> ll(hypotheses_.size());
    for (std::size_t i = 0; i < hypotheses_.size(); ++i) {
        ll[i] = log_likelihood(hypotheses_[i].values(), q, params_, a);
    }
    return ll;
}

std::size_t select_query(const Belief& b, const LikelihoodTable& table, SelectionMode mode,
                         const std::vector<bool>& asked) {
    const auto w = b.probabilities();
    bool found = false;
    std::size_t best = 0;
    double best_score = -kInfinity;
    for (std::size_t q = 0; q < table.size(); ++q) {
        if (q < asked.size() && asked[q]) continue;
        check_size(b, table[q]);
        const double s = score(mode, w, table[q]);
        if (!found || s > best_score) {
            found = true;
            best = q;
            best_score = s;
        }
    }
    if (!found) throw Error(ErrorCode::PoolExhausted, "every pool query has been asked");
    return best;
}

std::size_t select_query(const Belief& b, const QueryPool& pool, SelectionMode mode,
                         const RationalityParams& params, const std::vector<bool>& asked) {
    const auto w = b.probabilities();
    bool found = false;
    std::size_t best = 0;
    double best_score = -kInfinity;
    for (std::size_t q = 0; q < pool.queries.size(); ++q) {
        if (q < asked.size() && asked[q]) continue;
        const auto lk = compute_likelihoods(b.hypotheses(), pool.contrast(q), params);
        const double s = score(mode, w, lk);
        if (!found || s > best_score) {
            found = true;
            best = q;
            best_score = s;
        }
    }
    if (!found) throw Error(ErrorCode::PoolExhausted, "every pool query has been asked");
    return best;
}

}  // namespace richpref
