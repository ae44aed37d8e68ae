#pragma once

// JSON-over-HTTP routes for a Service:
//
//   POST /api/query      {text}               -> {query_id, answers, program, warnings}
//   POST /api/explain    {query_id, answer}   -> {text, tree}
//   GET  /api/complete?prefix=...             -> {tokens}
//   GET  /api/vocabulary                      -> {types, verbs}
//   GET  /api/stats                           -> {total, per_predicate, per_source}
//   GET  /healthz                             -> {status: "ok"}
//
// Errors are {"error": {code, message, ...details}} with status 400 for
// query-language and request errors, 404 for unknown ids and answers, and
// 500 otherwise.

#include <exception>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "error.hpp"
#include "service.hpp"

namespace bioquery::http {

inline int status_for(const std::string& code) {
    if (code == "empty_input" || code == "unknown_word" || code == "grammar_error" || code == "type_mismatch" ||
        code == "bad_request")
        return 400;
    if (code == "unknown_query_id" || code == "answer_not_found") return 404;
    return 500;
}

inline nlohmann::json error_body(const Error& e) {
    nlohmann::json body = e.details();
    body["code"] = e.code();
    body["message"] = e.what();
    return {{"error", body}};
}

namespace detail {

inline void send(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

template <typename Handler>
void guarded(httplib::Response& res, Handler&& handler) {
    try {
        send(res, 200, handler());
    } catch (const Error& e) {
        send(res, status_for(e.code()), error_body(e));
    } catch (const nlohmann::json::exception& e) {
        send(res, 400, error_body(Error("bad_request", std::string("malformed request: ") + e.what())));
    } catch (const std::exception& e) {
        send(res, 500, error_body(Error("internal_error", e.what())));
    }
}

inline nlohmann::json parse_body(const httplib::Request& req) {
    auto body = nlohmann::json::parse(req.body);
    if (!body.is_object()) throw Error("bad_request", "request body must be a JSON object");
    return body;
}

} // namespace detail

/// Registers the API on `server`. `service` must outlive it.
inline void mount(httplib::Server& server, Service& service) {
    server.Post("/api/query", [&service](const httplib::Request& req, httplib::Response& res) {
        detail::guarded(res, [&] {
            const auto body = detail::parse_body(req);
            if (!body.contains("text") || !body["text"].is_string())
                throw Error("bad_request", "field 'text' (string) is required");
            return service.handle_query(body["text"].get<std::string>()).to_json();
        });
    });
    server.Post("/api/explain", [&service](const httplib::Request& req, httplib::Response& res) {
        detail::guarded(res, [&] {
            const auto body = detail::parse_body(req);
            if (!body.contains("query_id") || !body["query_id"].is_string())
                throw Error("bad_request", "field 'query_id' (string) is required");
            if (!body.contains("answer") || !body["answer"].is_array())
                throw Error("bad_request", "field 'answer' (array of strings) is required");
            return service
                .handle_explain(body["query_id"].get<std::string>(), body["answer"].get<std::vector<std::string>>())
                .to_json();
        });
    });
    server.Get("/api/complete", [&service](const httplib::Request& req, httplib::Response& res) {
        detail::guarded(res, [&] {
            const auto prefix = req.has_param("prefix") ? req.get_param_value("prefix") : std::string();
            return nlohmann::json{{"tokens", service.handle_complete(prefix)}};
        });
    });
    server.Get("/api/vocabulary", [&service](const httplib::Request&, httplib::Response& res) {
        detail::guarded(res, [&] { return service.vocabulary(); });
    });
    server.Get("/api/stats", [&service](const httplib::Request&, httplib::Response& res) {
        detail::guarded(res, [&] { return service.stats_json(); });
    });
    server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
        detail::send(res, 200, {{"status", "ok"}});
    });
}

} // namespace bioquery::http
