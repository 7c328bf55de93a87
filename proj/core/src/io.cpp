#include <cmath>
#include <fstream>
#include <sstream>

#include "json_convert.hpp"
#include "richpref/error.hpp"

namespace richpref {

namespace json_io {

json encode_real(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) throw Error(ErrorCode::Format, "cannot serialize NaN");
    return v;
}

double decode_real(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return kInfinity;
        if (s == "-inf") return -kInfinity;
        throw Error(ErrorCode::Format, "bad real '" + s + "'");
    }
    if (!j.is_number()) throw Error(ErrorCode::Format, "expected a number");
    return j.get<double>();
}

json to_json(const CarState& s) { return json::array({s.x, s.y, s.heading, s.speed}); }

CarState car_state_from(const json& j) {
    if (!j.is_array() || j.size() != 4) throw Error(ErrorCode::Format, "a car state has 4 numbers");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

json to_json(const Control& u) { return json::array({u.steer, u.accel}); }

Control control_from(const json& j) {
    if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::Format, "a control has 2 numbers");
    return {j[0].get<double>(), j[1].get<double>()};
}

namespace {

json flat_states(const std::vector<CarState>& states) {
    json flat = json::array();
    for (const auto& s : states) {
        flat.push_back(s.x);
        flat.push_back(s.y);
        flat.push_back(s.heading);
        flat.push_back(s.speed);
    }
    return flat;
}

std::vector<CarState> states_from_flat(const json& j) {
    if (!j.is_array() || j.size() % 4 != 0) {
        throw Error(ErrorCode::Format, "state lists are flat groups of 4 numbers");
    }
    std::vector<CarState> states;
    for (std::size_t i = 0; i < j.size(); i += 4) {
        states.push_back({j[i].get<double>(), j[i + 1].get<double>(), j[i + 2].get<double>(),
                          j[i + 3].get<double>()});
    }
    return states;
}

}  // namespace

json to_json(const Environment& env) {
    return json{{"id", env.id},
                {"road",
                 {{"lane_count", env.road.lane_count},
                  {"lane_width", env.road.lane_width},
                  {"road_length", env.road.road_length}}},
                {"ego_init", to_json(env.ego_init)},
                {"other_trajectory", flat_states(env.other_trajectory)}};
}

Environment environment_from(const json& j) {
    Environment env;
    env.id = j.at("id").get<std::string>();
    const json& road = j.at("road");
    env.road.lane_count = road.at("lane_count").get<int>();
    env.road.lane_width = road.at("lane_width").get<double>();
    env.road.road_length = road.at("road_length").get<double>();
    if (env.road.lane_count < 1 || !(env.road.lane_width > 0.0)) {
        throw Error(ErrorCode::Format, "road geometry must have a positive lane count and width");
    }
    env.ego_init = car_state_from(j.at("ego_init"));
    env.other_trajectory = states_from_flat(j.at("other_trajectory"));
    return env;
}

json to_json(const FeatureVector& v) {
    json a = json::array();
    for (double x : v) a.push_back(encode_real(x));
    return a;
}

FeatureVector feature_vector_from(const json& j) {
    if (!j.is_array() || j.size() != kFeatureCount) {
        throw Error(ErrorCode::Format, "feature vectors have 7 entries");
    }
    FeatureVector v{};
    for (std::size_t i = 0; i < kFeatureCount; ++i) v[i] = decode_real(j[i]);
    return v;
}

json to_json(const Trajectory& traj) {
    json controls = json::array();
    for (const auto& u : traj.controls) {
        controls.push_back(u.steer);
        controls.push_back(u.accel);
    }
    return json{{"controls", controls},
                {"states", flat_states(traj.states)},
                {"phi", to_json(traj.phi)},
                {"clamped", traj.clamped}};
}

Trajectory trajectory_from(const json& j) {
    Trajectory traj;
    const json& controls = j.at("controls");
    if (!controls.is_array() || controls.size() % 2 != 0) {
        throw Error(ErrorCode::Format, "control lists are flat pairs");
    }
    for (std::size_t i = 0; i < controls.size(); i += 2) {
        traj.controls.push_back({controls[i].get<double>(), controls[i + 1].get<double>()});
    }
    traj.states = states_from_flat(j.at("states"));
    if (traj.states.size() != traj.controls.size() + 1) {
        throw Error(ErrorCode::Format, "a trajectory has one more state than controls");
    }
    traj.phi = feature_vector_from(j.at("phi"));
    traj.clamped = j.value("clamped", false);
    return traj;
}

json to_json(const WorldConfig& w) {
    return json{{"horizon", w.horizon},
                {"dynamics",
                 {{"dt", w.dynamics.dt},
                  {"wheelbase", w.dynamics.wheelbase},
                  {"steer_max", w.dynamics.steer_max},
                  {"accel_max", w.dynamics.accel_max},
                  {"speed_max", w.dynamics.speed_max}}},
                {"features",
                 {{"k_center", w.features.k_center},
                  {"k_edge", w.features.k_edge},
                  {"k_car", w.features.k_car},
                  {"lateral_weight", w.features.lateral_weight}}}};
}

WorldConfig world_config_from(const json& j) {
    WorldConfig w;
    w.horizon = j.value("horizon", w.horizon);
    if (j.contains("dynamics")) {
        const json& d = j["dynamics"];
        w.dynamics.dt = d.value("dt", w.dynamics.dt);
        w.dynamics.wheelbase = d.value("wheelbase", w.dynamics.wheelbase);
        w.dynamics.steer_max = d.value("steer_max", w.dynamics.steer_max);
        w.dynamics.accel_max = d.value("accel_max", w.dynamics.accel_max);
        w.dynamics.speed_max = d.value("speed_max", w.dynamics.speed_max);
    }
    if (j.contains("features")) {
        const json& f = j["features"];
        w.features.k_center = f.value("k_center", w.features.k_center);
        w.features.k_edge = f.value("k_edge", w.features.k_edge);
        w.features.k_car = f.value("k_car", w.features.k_car);
        w.features.lateral_weight = f.value("lateral_weight", w.features.lateral_weight);
    }
    return w;
}

json to_json(const OptimizerConfig& o) {
    return json{{"candidates", o.candidates},
                {"passes", o.passes},
                {"initial_step", o.initial_step},
                {"discrete_levels", o.discrete_levels},
                {"seed", o.seed}};
}

OptimizerConfig optimizer_config_from(const json& j) {
    OptimizerConfig o;
    o.candidates = j.value("candidates", o.candidates);
    o.passes = j.value("passes", o.passes);
    o.initial_step = j.value("initial_step", o.initial_step);
    o.discrete_levels = j.value("discrete_levels", o.discrete_levels);
    o.seed = j.value("seed", o.seed);
    return o;
}

json to_json(const Answer& a) {
    json j{{"comparison", a.comparison == Choice::A ? "A" : "B"}};
    j["feature"] = a.feature ? json(*a.feature) : json(nullptr);
    return j;
}

Answer answer_from(const json& j) {
    Answer a;
    const auto c = j.at("comparison").get<std::string>();
    if (c == "A") a.comparison = Choice::A;
    else if (c == "B") a.comparison = Choice::B;
    else throw Error(ErrorCode::Format, "comparison must be \"A\" or \"B\"");
    if (j.contains("feature") && !j["feature"].is_null()) {
        const auto f = j["feature"].get<long long>();
        if (f < 0 || f >= static_cast<long long>(kFeatureCount)) {
            throw Error(ErrorCode::Format, "feature index must be in [0, 6]");
        }
        a.feature = static_cast<std::size_t>(f);
    }
    return a;
}

json to_json(const RationalityParams& p) {
    return json{{"beta_c", encode_real(p.beta_c)},
                {"beta_f", encode_real(p.beta_f)},
                {"epsilon", p.epsilon}};
}

RationalityParams rationality_from(const json& j) {
    RationalityParams p;
    if (j.contains("beta_c")) p.beta_c = decode_real(j["beta_c"]);
    if (j.contains("beta_f")) p.beta_f = decode_real(j["beta_f"]);
    if (j.contains("epsilon")) p.epsilon = j["epsilon"].get<double>();
    p.validate();
    return p;
}

json to_json(const AnswerLog& log) {
    json labels = json::array();
    for (auto l : feature_labels()) labels.push_back(std::string(l));
    json entries = json::array();
    for (const auto& e : log.entries) {
        json a = to_json(e.answer);
        entries.push_back(json{{"query_id", e.query_id},
                               {"comparison", a["comparison"]},
                               {"feature", a["feature"]},
                               {"phi_a", to_json(e.phi_a)},
                               {"phi_b", to_json(e.phi_b)}});
    }
    return json{{"schema", "richpref.answer_log.v1"},
                {"feature_labels", labels},
                {"feature_scales", to_json(log.feature_scales.values)},
                {"entries", entries}};
}

AnswerLog answer_log_from(const json& j) {
    expect_schema(j, "richpref.answer_log.v1");
    AnswerLog log;
    log.feature_scales.values = feature_vector_from(j.at("feature_scales"));
    for (const auto& e : j.at("entries")) {
        AnswerLogEntry entry;
        entry.query_id = e.at("query_id").get<std::size_t>();
        entry.answer = answer_from(e);
        entry.phi_a = feature_vector_from(e.at("phi_a"));
        entry.phi_b = feature_vector_from(e.at("phi_b"));
        log.entries.push_back(entry);
    }
    return log;
}

json to_json(const Belief& b) {
    const HypothesisSet& hs = b.hypotheses();
    json hyp{{"count", hs.size()}, {"seed", hs.seed()}, {"sampled", hs.sampled()}};
    if (hs.injected_gt()) {
        hyp["injected_gt"] = *hs.injected_gt();
        hyp["ground_truth"] = to_json(hs[*hs.injected_gt()].values());
    } else {
        hyp["injected_gt"] = nullptr;
    }
    if (!hs.sampled()) {
        json thetas = json::array();
        for (const auto& t : hs.thetas()) thetas.push_back(to_json(t.values()));
        hyp["thetas"] = thetas;
    }
    json lw = json::array();
    for (double w : b.log_weights()) lw.push_back(encode_real(w));
    return json{{"schema", "richpref.belief.v1"}, {"hypotheses", hyp}, {"log_weights", lw}};
}

Belief belief_from(const json& j) {
    expect_schema(j, "richpref.belief.v1");
    const json& hyp = j.at("hypotheses");
    const auto count = hyp.at("count").get<std::size_t>();
    const auto seed = hyp.at("seed").get<std::uint64_t>();
    std::shared_ptr<const HypothesisSet> hs;
    if (hyp.value("sampled", true)) {
        if (!hyp.at("injected_gt").is_null()) {
            const RewardWeights gt(feature_vector_from(hyp.at("ground_truth")));
            auto set = HypothesisSet::sample_with_ground_truth(count, seed, gt);
            if (set.injected_gt() != hyp["injected_gt"].get<std::size_t>()) {
                throw Error(ErrorCode::Format, "ground-truth slot does not match the seed");
            }
            hs = std::make_shared<const HypothesisSet>(std::move(set));
        } else {
            hs = std::make_shared<const HypothesisSet>(HypothesisSet::sample(count, seed));
        }
    } else {
        std::vector<RewardWeights> thetas;
        for (const auto& t : hyp.at("thetas")) thetas.emplace_back(feature_vector_from(t));
        std::optional<std::size_t> gt;
        if (!hyp.at("injected_gt").is_null()) gt = hyp["injected_gt"].get<std::size_t>();
        hs = std::make_shared<const HypothesisSet>(std::move(thetas), seed, gt);
    }
    std::vector<double> lw;
    for (const auto& w : j.at("log_weights")) lw.push_back(decode_real(w));
    if (lw.size() != hs->size()) throw Error(ErrorCode::Format, "log-weight count mismatch");
    return Belief(hs, std::move(lw));
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp);
        out << text;
        if (!out) throw Error(ErrorCode::Io, "short write to " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

json parse(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Format, e.what());
    }
}

void expect_schema(const json& j, const char* expected) {
    if (!j.is_object() || j.value("schema", std::string()) != expected) {
        throw Error(ErrorCode::Format, std::string("expected schema ") + expected);
    }
}

}  // namespace json_io

using namespace json_io;

namespace {

template <class Fn>
auto guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Format, e.what());
    }
}

}  // namespace

void save_environments(const std::filesystem::path& path, const std::vector<Environment>& envs) {
    json arr = json::array();
    for (const auto& e : envs) arr.push_back(to_json(e));
    write_file(path, json{{"schema", "richpref.environments.v1"}, {"environments", arr}}.dump(1) + "\n");
}

std::vector<Environment> load_environments(const std::filesystem::path& path) {
    return guarded([&] {
        const json j = parse(read_file(path));
        expect_schema(j, "richpref.environments.v1");
        std::vector<Environment> envs;
        for (const auto& e : j.at("environments")) envs.push_back(environment_from(e));
        return envs;
    });
}

std::string pool_to_json(const QueryPool& pool) {
    json labels = json::array();
    for (auto l : feature_labels()) labels.push_back(std::string(l));
    json thetas = json::array();
    for (const auto& t : pool.plausible_thetas) thetas.push_back(to_json(t.values()));
    json envs = json::array();
    for (const auto& e : pool.environments) envs.push_back(to_json(e));
    json queries = json::array();
    for (const auto& q : pool.queries) {
        queries.push_back(json{{"id", q.id}, {"env", q.env}, {"a", to_json(q.a)}, {"b", to_json(q.b)}});
    }
    json j{{"schema", "richpref.pool.v1"},
           {"seed", pool.seed},
           {"provenance",
            {{"pool_seed", pool.provenance.pool_seed},
             {"environment_seed", pool.provenance.environment_seed},
             {"reward_seed", pool.provenance.reward_seed},
             {"config_hash", pool.provenance.config_hash}}},
           {"world", to_json(pool.world)},
           {"optimizer", to_json(pool.optimizer)},
           {"feature_labels", labels},
           {"feature_scales", to_json(pool.feature_scales.values)},
           {"plausible_thetas", thetas},
           {"environments", envs},
           {"queries", queries}};
    return j.dump(1) + "\n";
}

QueryPool pool_from_json(const std::string& text) {
    return guarded([&] {
        const json j = parse(text);
        expect_schema(j, "richpref.pool.v1");
        QueryPool pool;
        pool.seed = j.at("seed").get<std::uint64_t>();
        const json& prov = j.at("provenance");
        pool.provenance.pool_seed = prov.value("pool_seed", std::uint64_t{0});
        pool.provenance.environment_seed = prov.value("environment_seed", std::uint64_t{0});
        pool.provenance.reward_seed = prov.value("reward_seed", std::uint64_t{0});
        pool.provenance.config_hash = prov.value("config_hash", std::string());
        pool.world = world_config_from(j.at("world"));
        pool.optimizer = optimizer_config_from(j.at("optimizer"));
        pool.feature_scales.values = feature_vector_from(j.at("feature_scales"));
        for (double s : pool.feature_scales.values) {
            if (!(s > 0.0)) throw Error(ErrorCode::Format, "feature scales must be positive");
        }
        for (const auto& t : j.at("plausible_thetas")) {
            pool.plausible_thetas.emplace_back(feature_vector_from(t));
        }
        for (const auto& e : j.at("environments")) pool.environments.push_back(environment_from(e));
        for (const auto& qj : j.at("queries")) {
            Query q;
            q.id = qj.at("id").get<std::size_t>();
            q.env = qj.at("env").get<std::size_t>();
            q.a = trajectory_from(qj.at("a"));
            q.b = trajectory_from(qj.at("b"));
            if (q.env >= pool.environments.size()) {
                throw Error(ErrorCode::Format, "query references an unknown environment");
            }
            if (q.id != pool.queries.size()) throw Error(ErrorCode::Format, "query ids must be 0..n-1 in order");
            pool.queries.push_back(std::move(q));
        }
        return pool;
    });
}

void save_pool(const std::filesystem::path& path, const QueryPool& pool) {
    write_file(path, pool_to_json(pool));
}

QueryPool load_pool(const std::filesystem::path& path) { return pool_from_json(read_file(path)); }

std::string answer_log_to_json(const AnswerLog& log) { return to_json(log).dump(1) + "\n"; }

AnswerLog answer_log_from_json(const std::string& text) {
    return guarded([&] { return answer_log_from(parse(text)); });
}

void save_answer_log(const std::filesystem::path& path, const AnswerLog& log) {
    write_file(path, answer_log_to_json(log));
}

AnswerLog load_answer_log(const std::filesystem::path& path) {
    return answer_log_from_json(read_file(path));
}

std::string belief_to_json(const Belief& belief) { return to_json(belief).dump() + "\n"; }

Belief belief_from_json(const std::string& text) {
    return guarded([&] { return belief_from(parse(text)); });
}

}  // namespace richpref
