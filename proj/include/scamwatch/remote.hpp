#pragma once
// HTTP hooks for external models: a remote screen analyzer (entity and
// summary extraction) and a remote risk assessor. Both speak small
// JSON POST contracts and fail over deterministically.

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "scamwatch/assessor.hpp"
#include "scamwatch/context.hpp"
#include "scamwatch/core.hpp"
#include "scamwatch/io.hpp"

namespace scamwatch {

struct EndpointConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string path = "/assess";
    int timeout_ms = 2000;
    int retries = 2;
};

class RemoteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::optional<json> post_json(const EndpointConfig& ep, const json& body) {
    httplib::Client client(ep.host, ep.port);
    client.set_connection_timeout(std::chrono::milliseconds(ep.timeout_ms));
    client.set_read_timeout(std::chrono::milliseconds(ep.timeout_ms));
    for (int attempt = 0; attempt <= ep.retries; ++attempt) {
        auto res = client.Post(ep.path, body.dump(), "application/json");
        if (res && res->status == 200) {
            try {
                return json::parse(res->body);
            } catch (const json::parse_error&) {
                throw RemoteError("remote-bad-response");
            }
        }
    }
    return std::nullopt;
}

}  // namespace detail

// POST {order, app_category, app_name, content_summary} ->
// {entities:[string], summary:string}. Remote entities are unioned
// with the event's own; on failure the analyzer falls back to
// pass-through and counts a warning.
class RemoteScreenAnalyzer final : public ScreenAnalyzer {
public:
    explicit RemoteScreenAnalyzer(EndpointConfig ep) : ep_(std::move(ep)) {}

    ScreenParse analyze(const AppEvent& event) override {
        ScreenParse parse;
        parse.entities.insert(event.entities.begin(), event.entities.end());
        parse.summary = event.content_summary;

        json body{{"order", event.order},
                  {"app_category", std::string(to_string(event.app_category))},
                  {"app_name", event.app_name ? json(*event.app_name) : json(nullptr)},
                  {"content_summary", event.content_summary}};
        std::optional<json> res;
        try {
            res = detail::post_json(ep_, body);
        } catch (const RemoteError&) {
            res = std::nullopt;
        }
        if (!res) {
            ++fallback_count_;
            return parse;
        }
        if (res->contains("entities"))
            for (const auto& e : res->at("entities"))
                parse.entities.insert(e.get<std::string>());
        if (res->contains("summary") && !res->at("summary").is_null()) {
            const auto s = res->at("summary").get<std::string>();
            if (!s.empty()) parse.summary = s;
        }
        return parse;
    }

    std::int64_t fallback_count() const { return fallback_count_; }

private:
    EndpointConfig ep_;
    std::int64_t fallback_count_ = 0;
};

// POST {context: string} -> {reason, fraud: bool|label string,
// probability}. A malformed or missing probability is coerced from the
// label (Scam 0.9, Risky 0.6, Normal 0.1).
inline Assessment assess_remote(const std::string& rendered_context,
                                const EndpointConfig& ep) {
    auto res = detail::post_json(ep, json{{"context", rendered_context}});
    if (!res) throw RemoteError("remote-unavailable");
    const json& r = *res;

    Assessment a;
    a.rationale = r.value("reason", std::string{});

    std::optional<Label> label;
    if (r.contains("fraud")) {
        const auto& f = r.at("fraud");
        if (f.is_boolean()) {
            label = f.get<bool>() ? Label::Scam : Label::Normal;
        } else if (f.is_string()) {
            label = label_from_string(f.get<std::string>());
            if (!label) throw RemoteError("remote-bad-response");
        } else {
            throw RemoteError("remote-bad-response");
        }
    }

    std::optional<double> prob;
    if (r.contains("probability") && r.at("probability").is_number()) {
        const double p = r.at("probability").get<double>();
        if (p >= 0.0 && p <= 1.0) prob = p;
    }
    if (!prob) {
        if (!label) throw RemoteError("remote-bad-response");
        switch (*label) {
            case Label::Scam: prob = 0.9; break;
            case Label::Risky: prob = 0.6; break;
            case Label::Normal: prob = 0.1; break;
        }
    }
    a.probability = *prob;
    a.label = label ? *label : label_from_probability(a.probability);
    return a;
}

}  // namespace scamwatch
