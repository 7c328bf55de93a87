#include "richpref/service.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>

#include "json_convert.hpp"
#include "richpref/error.hpp"
#include "richpref/random.hpp"

namespace richpref {

using json_io::json;

std::string_view to_string(Phase phase) {
    switch (phase) {
        case Phase::Training: return "training";
        case Phase::Validation: return "validation";
        case Phase::Done: return "done";
    }
    return "unknown";
}

struct SessionStore::PoolState {
    std::string name;
    std::shared_ptr<const QueryPool> pool;
    std::unique_ptr<LikelihoodTable> table;
};

struct SessionStore::Session {
    SessionInfo meta;
    std::shared_ptr<PoolState> pool;
    std::optional<Belief> belief;
    std::vector<bool> asked;
    std::optional<std::size_t> pending;
    AnswerLog log;
    std::vector<ValidationItem> validation;
    mutable std::mutex mutex;

    // Read by the partner session without taking `mutex`.
    mutable std::mutex snapshot_mutex;
    Phase snapshot_phase = Phase::Training;
    FeatureVector snapshot_map{};

    void publish() {
        std::lock_guard lock(snapshot_mutex);
        snapshot_phase = meta.phase;
        snapshot_map = belief->hypotheses()[belief->map_index()].values();
    }
};

namespace {

constexpr std::size_t kTopHypotheses = 5;

std::string new_session_token() {
    std::random_device rd;
    const std::uint64_t v = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t token_seed(const std::string& token) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : token) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return mix_seed(h, 0x5e55);
}

bool valid_token(const std::string& id) {
    if (id.empty() || id.size() > 64) return false;
    for (char c : id) {
        const bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        c == '-' || c == '_';
        if (!ok) return false;
    }
    return true;
}

const char* choice_str(Choice c) { return c == Choice::A ? "A" : "B"; }

Choice parse_choice(const json& j) {
    const auto s = j.get<std::string>();
    if (s == "A") return Choice::A;
    if (s == "B") return Choice::B;
    throw Error(ErrorCode::Format, "choice must be \"A\" or \"B\"");
}

Phase phase_of(const SessionInfo& meta, const std::vector<ValidationItem>& validation) {
    if (meta.iteration < meta.budget) return Phase::Training;
    if (validation.empty()) return Phase::Validation;
    for (const auto& item : validation) {
        if (!item.vote) return Phase::Validation;
    }
    return Phase::Done;
}

}  // namespace

SessionStore::SessionStore(ServiceConfig config,
                           std::map<std::string, std::shared_ptr<const QueryPool>> pools)
    : config_(std::move(config)) {
    config_.model.validate();
    if (pools.empty()) throw Error(ErrorCode::UnknownPool, "the service needs at least one pool");
    if (config_.default_budget == 0) throw Error(ErrorCode::InvalidArgument, "budget must be positive");
    hypotheses_ = std::make_shared<const HypothesisSet>(
        HypothesisSet::sample(config_.hypothesis_count, config_.hypothesis_seed));
    for (auto& [name, pool] : pools) {
        if (!pool || pool->queries.empty()) throw Error(ErrorCode::UnknownPool, "pool '" + name + "' is empty");
        auto state = std::make_shared<PoolState>();
        state->name = name;
        state->pool = pool;
        state->table = std::make_unique<LikelihoodTable>(*hypotheses_, *pool, config_.model, config_.threads);
        pools_.emplace(name, std::move(state));
    }
    const auto& world = pools_.begin()->second->pool->world;
    validation_envs_ = generate_environments(config_.validation_environments, config_.validation_seed,
                                             world, "validation");
    std::filesystem::create_directories(config_.state_dir);
    load_existing();
}

SessionStore::~SessionStore() = default;

std::filesystem::path SessionStore::dir_of(const std::string& id) const { return config_.state_dir / id; }

const std::shared_ptr<const QueryPool>& SessionStore::pool(const std::string& name) const {
    auto it = pools_.find(name);
    if (it == pools_.end()) throw Error(ErrorCode::UnknownPool, "unknown pool '" + name + "'");
    return it->second->pool;
}

std::shared_ptr<SessionStore::Session> SessionStore::find(const std::string& id) const {
    std::shared_lock lock(sessions_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "unknown session '" + id + "'");
    return it->second;
}

std::vector<std::string> SessionStore::session_ids() const {
    std::shared_lock lock(sessions_mutex_);
    std::vector<std::string> ids;
    for (const auto& [id, s] : sessions_) ids.push_back(id);
    return ids;
}

void SessionStore::persist_meta(const Session& s) const {
    const SessionInfo& m = s.meta;
    json j{{"schema", "richpref.session.v1"},
           {"id", m.id},
           {"mode", std::string(to_string(m.mode))},
           {"pool", m.pool},
           {"participant", m.participant},
           {"partner", m.partner ? json(*m.partner) : json(nullptr)},
           {"budget", m.budget},
           {"seed", m.seed}};
    json_io::write_file(dir_of(m.id) / "session.json", j.dump(1) + "\n");
}

void SessionStore::append_log(const Session& s, const std::string& line) const {
    const auto path = dir_of(s.meta.id) / "log.jsonl";
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw Error(ErrorCode::Io, "cannot append to " + path.string());
    out << line << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

SessionInfo SessionStore::create_session(const SessionOptions& options) {
    auto pit = pools_.find(options.pool);
    if (pit == pools_.end()) throw Error(ErrorCode::UnknownPool, "unknown pool '" + options.pool + "'");
    if (options.mode == SelectionMode::InformationGain) {
        throw Error(ErrorCode::InvalidArgument, "information_gain selection is not implemented");
    }
    const std::size_t budget = options.budget.value_or(config_.default_budget);
    if (budget == 0 || budget > pit->second->pool->queries.size()) {
        throw Error(ErrorCode::InvalidArgument, "budget must be in [1, pool size]");
    }

    auto s = std::make_shared<Session>();
    s->meta.id = new_session_token();
    s->meta.mode = options.mode;
    s->meta.pool = options.pool;
    s->meta.participant = options.participant;
    s->meta.budget = budget;
    s->meta.seed = token_seed(s->meta.id);
    s->pool = pit->second;
    s->belief = Belief::uniform(hypotheses_);
    s->asked.assign(s->pool->pool->queries.size(), false);
    s->log.feature_scales = s->pool->pool->feature_scales;

    if (options.partner) {
        auto partner = find(*options.partner);
        std::lock_guard lock(partner->mutex);
        if (partner->meta.partner) {
            throw Error(ErrorCode::InvalidArgument, "session '" + *options.partner + "' already has a partner");
        }
        if (partner->meta.mode == options.mode) {
            throw Error(ErrorCode::InvalidArgument, "paired sessions must use different modes");
        }
        if (partner->meta.pool != options.pool) {
            throw Error(ErrorCode::InvalidArgument, "paired sessions must share a pool");
        }
        s->meta.partner = partner->meta.id;
        partner->meta.partner = s->meta.id;
        std::filesystem::create_directories(dir_of(s->meta.id));
        persist_meta(*s);
        persist_meta(*partner);
    } else {
        std::filesystem::create_directories(dir_of(s->meta.id));
        persist_meta(*s);
    }
    json_io::write_file(dir_of(s->meta.id) / "belief.json", belief_to_json(*s->belief));
    s->publish();

    std::unique_lock lock(sessions_mutex_);
    sessions_.emplace(s->meta.id, s);
    return s->meta;
}

SessionInfo SessionStore::info(const std::string& id) const {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    return s->meta;
}

QueryView SessionStore::next_query(const std::string& id) {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    if (s->meta.phase != Phase::Training) throw Error(ErrorCode::WrongPhase, "training is over");
    if (!s->pending) {
        s->pending = select_query(*s->belief, *s->pool->table, s->meta.mode, s->asked);
    }
    const QueryPool& pool = *s->pool->pool;
    const Query& q = pool.queries.at(*s->pending);
    QueryView v;
    v.iteration = s->meta.iteration;
    v.budget = s->meta.budget;
    v.query_id = q.id;
    v.environment = pool.environment_of(q);
    v.a = q.a;
    v.b = q.b;
    v.feature_asked = asks_feature(s->meta.mode);
    v.skip_allowed = v.feature_asked;
    return v;
}

BeliefView SessionStore::belief_view(const Session& s) const {
    BeliefView v;
    v.iteration = s.meta.iteration;
    v.phase = s.meta.phase;
    v.entropy = s.belief->entropy();
    v.map_index = s.belief->map_index();
    v.map_theta = hypotheses_->operator[](v.map_index).values();
    for (std::size_t i : s.belief->top(kTopHypotheses)) {
        v.top.push_back({i, s.belief->probability(i), (*hypotheses_)[i].values()});
    }
    return v;
}

BeliefView SessionStore::submit_answer(const std::string& id, std::size_t query_id, const Answer& answer) {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    if (s->meta.phase != Phase::Training) throw Error(ErrorCode::WrongPhase, "training is over");
    if (!s->pending || *s->pending != query_id) {
        throw Error(ErrorCode::StaleAnswer, "query " + std::to_string(query_id) + " is not pending");
    }
    if (!asks_feature(s->meta.mode) && answer.feature) {
        throw Error(ErrorCode::InvalidArgument, "this session does not ask for a feature");
    }
    if (answer.feature && *answer.feature >= kFeatureCount) {
        throw Error(ErrorCode::InvalidArgument, "feature index out of range");
    }
    Belief next = update_with_log_likelihoods(*s->belief, s->pool->table->log_likelihoods(query_id, answer));

    json line = json_io::to_json(answer);
    line["type"] = "answer";
    line["iteration"] = s->meta.iteration + 1;
    line["query_id"] = query_id;
    append_log(*s, line.dump());

    const Query& q = s->pool->pool->queries.at(query_id);
    s->log.append({query_id, answer, q.a.phi, q.b.phi});
    s->asked[query_id] = true;
    s->pending.reset();
    s->belief = std::move(next);
    s->meta.iteration += 1;
    s->meta.phase = phase_of(s->meta, s->validation);
    json_io::write_file(dir_of(id) / "belief.json", belief_to_json(*s->belief));
    s->publish();
    return belief_view(*s);
}

BeliefView SessionStore::belief(const std::string& id) const {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    return belief_view(*s);
}

void SessionStore::ensure_validation(Session& s) {
    if (!s.validation.empty()) return;
    FeatureVector other{};
    std::string other_label;
    if (s.meta.partner) {
        auto partner = find(*s.meta.partner);
        std::lock_guard lock(partner->snapshot_mutex);
        if (partner->snapshot_phase == Phase::Training) {
            throw Error(ErrorCode::ValidationNotReady, "partner session " + *s.meta.partner + " is still training");
        }
        other = partner->snapshot_map;
        other_label = std::string(to_string(partner->meta.mode));
    } else {
        const Belief prior = Belief::uniform(hypotheses_);
        other = (*hypotheses_)[prior.map_index()].values();
        other_label = "prior";
    }
    const FeatureVector mine = (*hypotheses_)[s.belief->map_index()].values();
    const std::string mine_label(to_string(s.meta.mode));
    const QueryPool& pool = *s.pool->pool;

    Rng rng = make_rng(s.meta.seed, 3);
    std::vector<ValidationItem> items;
    json stored = json::array();
    for (std::size_t e = 0; e < validation_envs_.size(); ++e) {
        ValidationItem item;
        item.env_index = e;
        item.environment = validation_envs_[e];
        item.a = optimize_trajectory(item.environment, mine, pool.world, pool.optimizer);
        item.b = optimize_trajectory(item.environment, other, pool.world, pool.optimizer);
        item.source_a = mine_label;
        item.source_b = other_label;
        if (uniform01(rng) < 0.5) {
            std::swap(item.a, item.b);
            std::swap(item.source_a, item.source_b);
        }
        stored.push_back(json{{"env_index", e},
                              {"environment", json_io::to_json(item.environment)},
                              {"a", json_io::to_json(item.a)},
                              {"b", json_io::to_json(item.b)},
                              {"source_a", item.source_a},
                              {"source_b", item.source_b}});
        items.push_back(std::move(item));
    }
    json_io::write_file(dir_of(s.meta.id) / "validation.json",
                        json{{"schema", "richpref.validation.v1"}, {"items", stored}}.dump(1) + "\n");
    s.validation = std::move(items);
}

ValidationView SessionStore::validation_view(const Session& s) const {
    ValidationView v;
    v.phase = s.meta.phase;
    v.items = s.validation;
    if (s.meta.phase == Phase::Done) {
        ValidationReport r;
        for (const auto& item : s.validation) {
            r.votes.try_emplace(item.source_a, 0);
            r.votes.try_emplace(item.source_b, 0);
        }
        for (const auto& item : s.validation) {
            r.votes[*item.vote == Choice::A ? item.source_a : item.source_b] += 1;
            r.total += 1;
        }
        for (const auto& [label, n] : r.votes) {
            r.shares[label] = static_cast<double>(n) / static_cast<double>(r.total);
        }
        v.report = std::move(r);
    }
    return v;
}

ValidationView SessionStore::validation(const std::string& id) {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    if (s->meta.phase == Phase::Training) throw Error(ErrorCode::WrongPhase, "session is still training");
    ensure_validation(*s);
    return validation_view(*s);
}

ValidationView SessionStore::vote(const std::string& id, std::size_t env_index, Choice choice) {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    if (s->meta.phase != Phase::Validation) {
        throw Error(ErrorCode::WrongPhase, std::string("session is in phase ") + std::string(to_string(s->meta.phase)));
    }
    ensure_validation(*s);
    if (env_index >= s->validation.size()) {
        throw Error(ErrorCode::InvalidArgument, "validation index out of range");
    }
    ValidationItem& item = s->validation[env_index];
    if (item.vote) throw Error(ErrorCode::DuplicateVote, "environment " + std::to_string(env_index) + " already has a vote");
    append_log(*s, json{{"type", "vote"}, {"env_index", env_index}, {"choice", choice_str(choice)}}.dump());
    item.vote = choice;
    s->meta.phase = phase_of(s->meta, s->validation);
    s->publish();
    return validation_view(*s);
}

AnswerLog SessionStore::export_log(const std::string& id) const {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    return s->log;
}

Belief SessionStore::replay(const std::string& id) const {
    auto s = find(id);
    AnswerLog log;
    std::shared_ptr<PoolState> pool;
    {
        std::lock_guard lock(s->mutex);
        log = s->log;
        pool = s->pool;
    }
    Belief b = Belief::uniform(hypotheses_);
    for (const auto& e : log.entries) {
        b = update(b, pool->table->contrast(e.query_id), e.answer, config_.model);
    }
    return b;
}

Belief SessionStore::stored_belief(const std::string& id) const {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    Belief b = belief_from_json(json_io::read_file(dir_of(id) / "belief.json"));
    return b;
}

void SessionStore::load_existing() {
    namespace fs = std::filesystem;
    std::vector<std::shared_ptr<Session>> loaded;
    for (const auto& entry : fs::directory_iterator(config_.state_dir)) {
        if (!entry.is_directory() || !fs::exists(entry.path() / "session.json")) continue;
        try {
            const json meta = json_io::parse(json_io::read_file(entry.path() / "session.json"));
            json_io::expect_schema(meta, "richpref.session.v1");
            auto s = std::make_shared<Session>();
            s->meta.id = meta.at("id").get<std::string>();
            if (!valid_token(s->meta.id) || entry.path().filename() != s->meta.id) {
                throw Error(ErrorCode::Format, "session id does not match its directory");
            }
            s->meta.mode = parse_mode(meta.at("mode").get<std::string>());
            s->meta.pool = meta.at("pool").get<std::string>();
            s->meta.participant = meta.value("participant", std::string());
            if (!meta.at("partner").is_null()) s->meta.partner = meta["partner"].get<std::string>();
            s->meta.budget = meta.at("budget").get<std::size_t>();
            s->meta.seed = meta.at("seed").get<std::uint64_t>();
            auto pit = pools_.find(s->meta.pool);
            if (pit == pools_.end()) throw Error(ErrorCode::UnknownPool, "unknown pool '" + s->meta.pool + "'");
            s->pool = pit->second;
            const QueryPool& pool = *s->pool->pool;
            s->belief = Belief::uniform(hypotheses_);
            s->asked.assign(pool.queries.size(), false);
            s->log.feature_scales = pool.feature_scales;

            if (fs::exists(entry.path() / "validation.json")) {
                const json v = json_io::parse(json_io::read_file(entry.path() / "validation.json"));
                json_io::expect_schema(v, "richpref.validation.v1");
                for (const auto& it : v.at("items")) {
                    ValidationItem item;
                    item.env_index = it.at("env_index").get<std::size_t>();
                    item.environment = json_io::environment_from(it.at("environment"));
                    item.a = json_io::trajectory_from(it.at("a"));
                    item.b = json_io::trajectory_from(it.at("b"));
                    item.source_a = it.at("source_a").get<std::string>();
                    item.source_b = it.at("source_b").get<std::string>();
                    s->validation.push_back(std::move(item));
                }
            }

            std::ifstream in(entry.path() / "log.jsonl");
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                const json rec = json_io::parse(line);
                const auto type = rec.at("type").get<std::string>();
                if (type == "answer") {
                    const auto q = rec.at("query_id").get<std::size_t>();
                    if (q >= pool.queries.size()) throw Error(ErrorCode::Format, "logged query id out of range");
                    const Answer a = json_io::answer_from(rec);
                    s->belief = update_with_log_likelihoods(*s->belief, s->pool->table->log_likelihoods(q, a));
                    s->asked[q] = true;
                    s->log.append({q, a, pool.queries[q].a.phi, pool.queries[q].b.phi});
                    s->meta.iteration += 1;
                } else if (type == "vote") {
                    const auto e = rec.at("env_index").get<std::size_t>();
                    if (e >= s->validation.size()) throw Error(ErrorCode::Format, "vote without validation pair");
                    s->validation[e].vote = parse_choice(rec.at("choice"));
                } else {
                    throw Error(ErrorCode::Format, "unknown log record '" + type + "'");
                }
            }
            s->meta.phase = phase_of(s->meta, s->validation);
            s->publish();
            loaded.push_back(std::move(s));
        } catch (const std::exception& e) {
            std::cerr << "skipping session " << entry.path().filename().string() << ": " << e.what() << "\n";
        }
    }
    std::unique_lock lock(sessions_mutex_);
    for (auto& s : loaded) sessions_.emplace(s->meta.id, std::move(s));
}

}  // namespace richpref
