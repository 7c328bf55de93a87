#ifndef RICHPREF_SERVICE_HPP
#define RICHPREF_SERVICE_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "richpref/active.hpp"
#include "richpref/belief.hpp"
#include "richpref/querygen.hpp"
#include "richpref/simuser.hpp"

namespace richpref {

inline constexpr const char* kServiceSchema = "richpref.v1";

enum class Phase { Training, Validation, Done };
std::string_view to_string(Phase phase);

struct ServiceConfig {
    std::filesystem::path state_dir = "sessions";
    std::size_t default_budget = 20;
    std::size_t hypothesis_count = 500;
    std::uint64_t hypothesis_seed = 1;
    RationalityParams model{2.0, 2.5, 0.0};  // answerer model used for updates and selection
    std::size_t validation_environments = 10;
    std::uint64_t validation_seed = 4;
    std::size_t threads = 1;
};

struct SessionOptions {
    SelectionMode mode = SelectionMode::Rich;
    std::optional<std::size_t> budget;
    std::string pool = "default";
    std::string participant;
    /// Existing session trained by the same participant with the other method.
    std::optional<std::string> partner;
};

struct SessionInfo {
    std::string id;
    SelectionMode mode = SelectionMode::Rich;
    std::string pool;
    std::string participant;
    std::optional<std::string> partner;
    std::size_t budget = 0;
    std::uint64_t seed = 0;
    Phase phase = Phase::Training;
    std::size_t iteration = 0;  // answers received
};

struct QueryView {
    std::size_t iteration = 0;
    std::size_t budget = 0;
    std::size_t query_id = 0;
    Environment environment;
    Trajectory a;
    Trajectory b;
    bool feature_asked = true;
    bool skip_allowed = true;
};

struct RankedHypothesis {
    std::size_t index = 0;
    double probability = 0.0;
    FeatureVector theta{};
};

struct BeliefView {
    std::size_t iteration = 0;
    Phase phase = Phase::Training;
    double entropy = 0.0;
    std::size_t map_index = 0;
    FeatureVector map_theta{};
    std::vector<RankedHypothesis> top;
};

/// One validation environment. Which method produced A and B stays on the
/// server; clients only see the blinded pair.
struct ValidationItem {
    std::size_t env_index = 0;
    Environment environment;
    Trajectory a;
    Trajectory b;
    std::string source_a;  // method label of trajectory A
    std::string source_b;
    std::optional<Choice> vote;
};

struct ValidationReport {
    std::size_t total = 0;
    std::map<std::string, std::size_t> votes;   // per method label
    std::map<std::string, double> shares;
};

struct ValidationView {
    Phase phase = Phase::Validation;
    std::vector<ValidationItem> items;
    std::optional<ValidationReport> report;  // once every item has a vote
};

/// Sessions, their beliefs and on-disk state. Each session directory holds
/// session.json (fixed metadata), log.jsonl (append-only answers and votes,
/// the source of truth), belief.json (snapshot after each answer) and
/// validation.json once pairs exist. Existing sessions are reloaded by
/// replaying their logs.
///
/// Mutations of one session are serialized; different sessions proceed in
/// parallel.
class SessionStore {
public:
    SessionStore(ServiceConfig config, std::map<std::string, std::shared_ptr<const QueryPool>> pools);
    ~SessionStore();

    SessionStore(const SessionStore&) = delete;
    SessionStore& operator=(const SessionStore&) = delete;

    SessionInfo create_session(const SessionOptions& options);
    SessionInfo info(const std::string& id) const;
    std::vector<std::string> session_ids() const;

    /// Pending query; stable until an answer arrives.
    QueryView next_query(const std::string& id);

    BeliefView submit_answer(const std::string& id, std::size_t query_id, const Answer& answer);
    BeliefView belief(const std::string& id) const;

    /// Generates the pairs on first use. Throws ValidationNotReady while a
    /// partner session is still training.
    ValidationView validation(const std::string& id);
    ValidationView vote(const std::string& id, std::size_t env_index, Choice choice);

    AnswerLog export_log(const std::string& id) const;

    /// Replays the session's log onto a uniform belief.
    Belief replay(const std::string& id) const;
    /// The belief snapshot as stored on disk.
    Belief stored_belief(const std::string& id) const;

    const std::shared_ptr<const QueryPool>& pool(const std::string& name) const;
    const ServiceConfig& config() const { return config_; }

private:
    struct Session;
    struct PoolState;

    std::shared_ptr<Session> find(const std::string& id) const;
    void load_existing();
    void ensure_validation(Session& s);
    BeliefView belief_view(const Session& s) const;
    ValidationView validation_view(const Session& s) const;
    void persist_meta(const Session& s) const;
    void append_log(const Session& s, const std::string& line) const;
    std::filesystem::path dir_of(const std::string& id) const;

    ServiceConfig config_;
    std::shared_ptr<const HypothesisSet> hypotheses_;
    std::map<std::string, std::shared_ptr<PoolState>> pools_;
    std::vector<Environment> validation_envs_;
    mutable std::shared_mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
};

/// HTTP front end. Routes (all bodies JSON, tagged with "schema"):
///   GET  /v1/features
///   POST /v1/sessions                       {mode, budget?, pool?, participant?, partner?}
///   GET  /v1/sessions/{id}
///   GET  /v1/sessions/{id}/query
///   POST /v1/sessions/{id}/answer           {query_id, comparison: "A"|"B", feature: 0-6|null}
///   GET  /v1/sessions/{id}/belief
///   GET  /v1/sessions/{id}/validation
///   POST /v1/sessions/{id}/validation       {env_index, choice: "A"|"B"}
///   GET  /v1/sessions/{id}/log
class HttpService {
public:
    explicit HttpService(SessionStore& store);
    ~HttpService();

    /// Binds; port 0 picks a free port. Returns the bound port.
    int bind(const std::string& host, int port);
    /// Serves until stop(); call after bind().
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace richpref

#endif  // RICHPREF_SERVICE_HPP
