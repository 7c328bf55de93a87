#include <httplib.h>

#include "json_convert.hpp"
#include "richpref/error.hpp"
#include "richpref/service.hpp"

namespace richpref {

using json_io::json;

namespace {

int status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnknownSession:
        case ErrorCode::UnknownPool:
            return 404;
        case ErrorCode::WrongPhase:
        case ErrorCode::StaleAnswer:
        case ErrorCode::DuplicateVote:
        case ErrorCode::ValidationNotReady:
        case ErrorCode::PoolExhausted:
            return 409;
        case ErrorCode::InvalidArgument:
        case ErrorCode::Format:
            return 400;
        default:
            return 500;
    }
}

json envelope(json body) {
    body["schema"] = kServiceSchema;
    return body;
}

void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(envelope(body).dump(), "application/json");
}

void reply_error(httplib::Response& res, ErrorCode code, const std::string& message) {
    reply(res, status_for(code),
          json{{"error", {{"code", std::string(to_string(code))}, {"message", message}}}});
}

json labels_json() {
    json arr = json::array();
    const auto labels = feature_labels();
    const auto descriptions = feature_descriptions();
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        arr.push_back(json{{"index", i}, {"label", std::string(labels[i])},
                           {"description", std::string(descriptions[i])}});
    }
    return arr;
}

json info_json(const SessionInfo& info) {
    return json{{"id", info.id},
                {"mode", std::string(to_string(info.mode))},
                {"pool", info.pool},
                {"participant", info.participant},
                {"partner", info.partner ? json(*info.partner) : json(nullptr)},
                {"budget", info.budget},
                {"phase", std::string(to_string(info.phase))},
                {"iteration", info.iteration}};
}

json query_json(const QueryView& v) {
    return json{{"iteration", v.iteration},
                {"budget", v.budget},
                {"query_id", v.query_id},
                {"environment", json_io::to_json(v.environment)},
                {"a", json_io::to_json(v.a)},
                {"b", json_io::to_json(v.b)},
                {"feature_asked", v.feature_asked},
                {"skip_allowed", v.skip_allowed},
                {"features", labels_json()}};
}

json belief_json(const BeliefView& v) {
    json top = json::array();
    for (const auto& h : v.top) {
        top.push_back(json{{"index", h.index}, {"probability", h.probability}, {"theta", json_io::to_json(h.theta)}});
    }
    return json{{"iteration", v.iteration},
                {"phase", std::string(to_string(v.phase))},
                {"entropy", v.entropy},
                {"map_index", v.map_index},
                {"map_theta", json_io::to_json(v.map_theta)},
                {"top", top}};
}

json validation_json(const ValidationView& v) {
    json items = json::array();
    for (const auto& item : v.items) {
        items.push_back(json{{"env_index", item.env_index},
                             {"environment", json_io::to_json(item.environment)},
                             {"a", json_io::to_json(item.a)},
                             {"b", json_io::to_json(item.b)},
                             {"vote", item.vote ? json(*item.vote == Choice::A ? "A" : "B") : json(nullptr)}});
    }
    json j{{"phase", std::string(to_string(v.phase))}, {"items", items}};
    if (v.report) {
        j["report"] = json{{"total", v.report->total}, {"votes", v.report->votes}, {"shares", v.report->shares}};
    } else {
        j["report"] = nullptr;
    }
    return j;
}

template <class Fn>
void guarded(httplib::Response& res, Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        reply_error(res, e.code(), e.what());
    } catch (const json::exception& e) {
        reply_error(res, ErrorCode::Format, e.what());
    } catch (const std::exception& e) {
        reply(res, 500, json{{"error", {{"code", "Internal"}, {"message", e.what()}}}});
    }
}

json body_of(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    json j = json_io::parse(req.body);
    if (!j.is_object()) throw Error(ErrorCode::Format, "request body must be a JSON object");
    return j;
}

}  // namespace

struct HttpService::Impl {
    SessionStore& store;
    httplib::Server server;

    explicit Impl(SessionStore& s) : store(s) { routes(); }

    void routes() {
        server.Get("/v1/features", [](const httplib::Request&, httplib::Response& res) {
            reply(res, 200, json{{"features", labels_json()}});
        });

        server.Post("/v1/sessions", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const json body = body_of(req);
                SessionOptions opt;
                if (body.contains("mode")) opt.mode = parse_mode(body["mode"].get<std::string>());
                if (body.contains("budget") && !body["budget"].is_null()) {
                    const auto b = body["budget"].get<long long>();
                    if (b <= 0) throw Error(ErrorCode::InvalidArgument, "budget must be positive");
                    opt.budget = static_cast<std::size_t>(b);
                }
                opt.pool = body.value("pool", opt.pool);
                opt.participant = body.value("participant", std::string());
                if (body.contains("partner") && !body["partner"].is_null()) {
                    opt.partner = body["partner"].get<std::string>();
                }
                reply(res, 201, info_json(store.create_session(opt)));
            });
        });

        server.Get(R"(/v1/sessions/([A-Za-z0-9_-]+))", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { reply(res, 200, info_json(store.info(req.matches[1]))); });
        });

        server.Get(R"(/v1/sessions/([A-Za-z0-9_-]+)/query)",
                   [this](const httplib::Request& req, httplib::Response& res) {
                       guarded(res, [&] { reply(res, 200, query_json(store.next_query(req.matches[1]))); });
                   });

        server.Post(R"(/v1/sessions/([A-Za-z0-9_-]+)/answer)",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        guarded(res, [&] {
                            const json body = body_of(req);
                            const auto q = body.at("query_id").get<long long>();
                            if (q < 0) throw Error(ErrorCode::InvalidArgument, "query_id must be nonnegative");
                            const Answer a = json_io::answer_from(body);
                            reply(res, 200,
                                  belief_json(store.submit_answer(req.matches[1], static_cast<std::size_t>(q), a)));
                        });
                    });

        server.Get(R"(/v1/sessions/([A-Za-z0-9_-]+)/belief)",
                   [this](const httplib::Request& req, httplib::Response& res) {
                       guarded(res, [&] { reply(res, 200, belief_json(store.belief(req.matches[1]))); });
                   });

        server.Get(R"(/v1/sessions/([A-Za-z0-9_-]+)/validation)",
                   [this](const httplib::Request& req, httplib::Response& res) {
                       guarded(res, [&] { reply(res, 200, validation_json(store.validation(req.matches[1]))); });
                   });

        server.Post(R"(/v1/sessions/([A-Za-z0-9_-]+)/validation)",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        guarded(res, [&] {
                            const json body = body_of(req);
                            const auto e = body.at("env_index").get<long long>();
                            if (e < 0) throw Error(ErrorCode::InvalidArgument, "env_index must be nonnegative");
                            const auto c = body.at("choice").get<std::string>();
                            if (c != "A" && c != "B") throw Error(ErrorCode::Format, "choice must be \"A\" or \"B\"");
                            reply(res, 200,
                                  validation_json(store.vote(req.matches[1], static_cast<std::size_t>(e),
                                                             c == "A" ? Choice::A : Choice::B)));
                        });
                    });

        server.Get(R"(/v1/sessions/([A-Za-z0-9_-]+)/log)",
                   [this](const httplib::Request& req, httplib::Response& res) {
                       guarded(res, [&] {
                           res.status = 200;
                           res.set_content(answer_log_to_json(store.export_log(req.matches[1])), "application/json");
                       });
                   });
    }
};

HttpService::HttpService(SessionStore& store) : impl_(std::make_unique<Impl>(store)) {}

HttpService::~HttpService() { stop(); }

int HttpService::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = impl_->server.bind_to_any_port(host);
        if (bound < 0) throw Error(ErrorCode::Io, "cannot bind " + host);
        return bound;
    }
    if (!impl_->server.bind_to_port(host, port)) {
        throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
    }
    return port;
}

void HttpService::listen() { impl_->server.listen_after_bind(); }

void HttpService::stop() {
    if (impl_) impl_->server.stop();
}

}  // namespace richpref
