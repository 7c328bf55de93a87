#include "richpref/querygen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <tuple>

#include "richpref/error.hpp"
#include "richpref/parallel.hpp"
#include "richpref/random.hpp"

namespace richpref {

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

class ControlSpace {
public:
    ControlSpace(const DynamicsConfig& dynamics, std::size_t levels)
        : dynamics_(dynamics), levels_(levels) {}

    bool discrete() const { return levels_ > 0; }

    double steer_level(std::size_t i) const { return level(i, dynamics_.steer_max); }
    double accel_level(std::size_t i) const { return level(i, dynamics_.accel_max); }

    Control random(Rng& rng) const {
        if (discrete()) {
            return {steer_level(uniform_index(rng, levels_)), accel_level(uniform_index(rng, levels_))};
        }
        return {uniform(rng, -dynamics_.steer_max, dynamics_.steer_max),
                uniform(rng, -dynamics_.accel_max, dynamics_.accel_max)};
    }

    /// Number of distinct sequences, saturating at `cap + 1`.
    std::size_t sequence_count(std::size_t horizon, std::size_t cap) const {
        std::size_t total = 1;
        for (std::size_t i = 0; i < 2 * horizon; ++i) {
            total *= levels_;
            if (total > cap) return cap + 1;
        }
        return total;
    }

    /// The `index`-th sequence in lexicographic order over (steer, accel) per step.
    std::vector<Control> enumerate(std::size_t index, std::size_t horizon) const {
        std::vector<Control> controls(horizon);
        for (std::size_t t = horizon; t-- > 0;) {
            controls[t].accel = accel_level(index % levels_);
            index /= levels_;
            controls[t].steer = steer_level(index % levels_);
            index /= levels_;
        }
        return controls;
    }

    /// Position of a value on the discrete grid.
    std::size_t index_of(double value, double bound) const {
        if (levels_ == 1) return 0;
        const double r = (value + bound) / (2.0 * bound) * static_cast<double>(levels_ - 1);
        return static_cast<std::size_t>(std::llround(r));
    }

    const DynamicsConfig& dynamics() const { return dynamics_; }
    std::size_t levels() const { return levels_; }

private:
    double level(std::size_t i, double bound) const {
        if (levels_ == 1) return 0.0;
        return -bound + 2.0 * bound * static_cast<double>(i) / static_cast<double>(levels_ - 1);
    }

    DynamicsConfig dynamics_;
    std::size_t levels_;
};

}  // namespace

Trajectory optimize_trajectory(const Environment& env, const FeatureVector& theta,
                               const WorldConfig& world, const OptimizerConfig& optimizer) {
    const std::size_t horizon = world.horizon;
    const ControlSpace space(world.dynamics, optimizer.discrete_levels);

    std::vector<Control> best;
    double best_value = -kInfinity;
    auto consider = [&](const std::vector<Control>& controls) {
        const double value = reward(theta, rollout(env, controls, world).phi);
        if (value > best_value) {
            best_value = value;
            best = controls;
            return true;
        }
        return false;
    };

    if (space.discrete() &&
        space.sequence_count(horizon, optimizer.candidates) <= optimizer.candidates) {
        // The whole grid fits in the candidate budget.
        const std::size_t n = space.sequence_count(horizon, optimizer.candidates);
        for (std::size_t i = 0; i < n; ++i) consider(space.enumerate(i, horizon));
        return rollout(env, best, world);
    }

    Rng rng = make_rng(optimizer.seed, fnv1a(env.id));
    for (std::size_t m = 0; m < std::max<std::size_t>(1, optimizer.candidates); ++m) {
        std::vector<Control> controls(horizon);
        for (auto& u : controls) u = space.random(rng);
        consider(controls);
    }

    const DynamicsConfig& dyn = world.dynamics;
    for (std::size_t pass = 0; pass < optimizer.passes; ++pass) {
        const double shrink = std::ldexp(1.0, -static_cast<int>(pass));
        for (std::size_t t = 0; t < horizon; ++t) {
            for (int component = 0; component < 2; ++component) {
                const double bound = component == 0 ? dyn.steer_max : dyn.accel_max;
                double step = optimizer.initial_step * bound * shrink;
                if (space.discrete()) {
                    const std::size_t span = std::max<std::size_t>(1, ((space.levels() - 1) / 2) >> pass);
                    step = 2.0 * bound / static_cast<double>(std::max<std::size_t>(1, space.levels() - 1)) *
                           static_cast<double>(span);
                }
                const std::vector<Control> base = best;
                for (double sign : {1.0, -1.0}) {
                    std::vector<Control> trial = base;
                    double& v = component == 0 ? trial[t].steer : trial[t].accel;
                    v = std::clamp(v + sign * step, -bound, bound);
                    if (space.discrete()) {
                        const std::size_t idx = space.index_of(v, bound);
                        v = component == 0 ? space.steer_level(idx) : space.accel_level(idx);
                    }
                    if (trial == base) continue;
                    consider(trial);
                }
            }
        }
    }
    return rollout(env, best, world);
}

bool is_plausible(const Trajectory& traj, const Environment& env, const PlausibilityConfig& config) {
    if (traj.states.empty() || !env.road.contains_lateral(traj.states.back().y)) return false;
    for (std::size_t t = 0; t < traj.states.size() && t < env.other_trajectory.size(); ++t) {
        const double dx = traj.states[t].x - env.other_trajectory[t].x;
        const double dy = traj.states[t].y - env.other_trajectory[t].y;
        if (std::hypot(dx, dy) < config.collision_distance) return false;
    }
    return true;
}

std::vector<RewardWeights> sample_plausible_rewards(std::size_t count, std::uint64_t seed,
                                                    const Environment& probe,
                                                    const WorldConfig& world,
                                                    const OptimizerConfig& optimizer,
                                                    const PlausibilityConfig& plausibility) {
    if (count == 0) throw Error(ErrorCode::InvalidArgument, "count must be at least 1");
    Rng rng = make_rng(seed, 0);
    std::vector<RewardWeights> accepted;
    std::size_t draws = 0;
    while (accepted.size() < count) {
        if (draws >= plausibility.max_draws) {
            throw Error(ErrorCode::RejectionBudgetExceeded,
                        "accepted " + std::to_string(accepted.size()) + " of " +
                            std::to_string(count) + " after " + std::to_string(draws) + " draws");
        }
        ++draws;
        const RewardWeights theta = RewardWeights::random(rng);
        const Trajectory traj = optimize_trajectory(probe, theta.values(), world, optimizer);
        if (is_plausible(traj, probe, plausibility)) accepted.push_back(theta);
    }
    return accepted;
}

std::size_t distinct_pair_bound(std::size_t environments, std::size_t rewards) {
    return environments * (rewards * (rewards - 1) / 2);
}

QueryPool build_pool(const std::vector<Environment>& envs, const std::vector<RewardWeights>& thetas,
                     const PoolConfig& config) {
    if (thetas.size() < 2) throw Error(ErrorCode::InvalidArgument, "a pool needs at least two rewards");
    if (envs.empty()) throw Error(ErrorCode::InvalidArgument, "a pool needs an environment");

    const std::size_t n_rewards = thetas.size();
    std::vector<Trajectory> cells(envs.size() * n_rewards);
    parallel_for(cells.size(), config.threads, [&](std::size_t cell) {
        const std::size_t e = cell / n_rewards;
        const std::size_t r = cell % n_rewards;
        cells[cell] = optimize_trajectory(envs[e], thetas[r].values(), config.world, config.optimizer);
    });

    struct Pair {
        std::size_t env, first, second;
    };
    std::vector<Pair> pairs;
    for (std::size_t e = 0; e < envs.size(); ++e) {
        for (std::size_t i = 0; i < n_rewards; ++i) {
            for (std::size_t j = i + 1; j < n_rewards; ++j) {
                const Trajectory& a = cells[e * n_rewards + i];
                const Trajectory& b = cells[e * n_rewards + j];
                if (max_abs(a.phi - b.phi) > kDistinctPhiTolerance) pairs.push_back({e, i, j});
            }
        }
    }
    if (pairs.empty()) {
        throw Error(ErrorCode::InvalidArgument, "every reward produced the same trajectory");
    }

    Rng rng = make_rng(config.seed, 0);
    std::vector<Pair> chosen;
    if (config.pool_size <= pairs.size()) {
        std::vector<std::size_t> idx(pairs.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        shuffle(idx.begin(), idx.end(), rng);
        idx.resize(config.pool_size);
        std::sort(idx.begin(), idx.end());
        for (std::size_t i : idx) chosen.push_back(pairs[i]);
    } else {
        // Larger pools also use the B/A presentation of each pair.
        chosen = pairs;
        std::vector<Pair> swapped;
        for (const Pair& p : pairs) swapped.push_back({p.env, p.second, p.first});
        shuffle(swapped.begin(), swapped.end(), rng);
        const std::size_t extra = std::min(config.pool_size - pairs.size(), swapped.size());
        chosen.insert(chosen.end(), swapped.begin(), swapped.begin() + static_cast<std::ptrdiff_t>(extra));
    }

    QueryPool pool;
    pool.environments = envs;
    pool.plausible_thetas = thetas;
    pool.world = config.world;
    pool.optimizer = config.optimizer;
    pool.seed = config.seed;
    pool.queries.reserve(chosen.size());
    const bool only_originals = config.pool_size <= pairs.size();
    for (std::size_t k = 0; k < chosen.size(); ++k) {
        Pair p = chosen[k];
        // Randomize which trajectory is shown as A when each pair appears once.
        if (only_originals && uniform01(rng) < 0.5) std::swap(p.first, p.second);
        Query q;
        q.id = k;
        q.env = p.env;
        q.a = cells[p.env * n_rewards + p.first];
        q.b = cells[p.env * n_rewards + p.second];
        pool.queries.push_back(std::move(q));
    }

    FeatureVector mean_abs{};
    for (const Query& q : pool.queries) {
        for (std::size_t f = 0; f < kFeatureCount; ++f) mean_abs[f] += std::abs(q.a.phi[f] - q.b.phi[f]);
    }
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        const double m = mean_abs[f] / static_cast<double>(pool.queries.size());
        pool.feature_scales.values[f] = m > 1e-12 ? m : 1.0;
    }

    pool.provenance.pool_seed = config.seed;
    pool.provenance.config_hash = config_hash(config.world, config.optimizer, config.pool_size);
    return pool;
}

std::string config_hash(const WorldConfig& world, const OptimizerConfig& optimizer,
                        std::size_t pool_size) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%zu|%zu|%zu|%.17g|%zu|%llu|%zu",
                  world.dynamics.dt, world.dynamics.wheelbase, world.dynamics.steer_max,
                  world.dynamics.accel_max, world.dynamics.speed_max, world.features.k_center,
                  world.features.k_edge, world.features.k_car, world.features.lateral_weight,
                  world.horizon, optimizer.candidates, optimizer.passes, optimizer.initial_step,
                  optimizer.discrete_levels, static_cast<unsigned long long>(optimizer.seed), pool_size);
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(fnv1a(buf)));
    return out;
}

}  // namespace richpref
