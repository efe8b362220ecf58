#include "selfscore/gateway.hpp"

#include "selfscore/error.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace selfscore {

using json = nlohmann::ordered_json;

std::string_view to_string(Role role) noexcept {
    switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
    }
    return "user";
}

Role role_from_string(std::string_view s) {
    if (s == "system") return Role::system;
    if (s == "user") return Role::user;
    if (s == "assistant") return Role::assistant;
    throw ConfigError("unknown chat role '" + std::string(s) + "'");
}

Sleeper default_sleeper() {
    return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

void GatewayConfig::validate() const {
    if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
    if (parallelism_bound < 1) throw ConfigError("parallelism_bound must be >= 1");
    if (timeout.count() <= 0) throw ConfigError("timeout must be positive");
}

ChatResponse Gateway::complete(std::span<const ChatMessage> messages) {
    if (messages.empty()) throw PreconditionError("complete: message list is empty");
    const Role last = messages.back().role;
    if (last != Role::user && last != Role::system) {
        throw PreconditionError("complete: last message must have role user or system");
    }
    for (const auto& m : messages) {
        if (m.role != Role::system && m.content.empty()) {
            throw PreconditionError("complete: user/assistant message with empty content");
        }
    }
    return do_complete(messages);
}

Semaphore::Semaphore(int permits) : permits_(permits) {}

void Semaphore::acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [this] { return permits_ > 0; });
    --permits_;
}

void Semaphore::release() {
    {
        std::lock_guard lock(mu_);
        ++permits_;
    }
    cv_.notify_one();
}

std::chrono::milliseconds BackoffPolicy::ceiling(int retry) const {
    const double raw = static_cast<double>(base.count()) * std::pow(multiplier, retry);
    return std::chrono::milliseconds(static_cast<std::int64_t>(std::min(raw, static_cast<double>(cap.count()))));
}

std::chrono::milliseconds BackoffPolicy::delay(int retry, std::mt19937_64& rng) const {
    const auto top = ceiling(retry).count();
    std::uniform_int_distribution<std::int64_t> dist(top / 2, top);
    return std::chrono::milliseconds(dist(rng));
}

std::string encode_chat_request(const GatewayConfig& config, std::span<const ChatMessage> messages) {
    json body;
    body["model"] = config.model_id;
    json msgs = json::array();
    for (const auto& m : messages) {
        msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    }
    body["messages"] = std::move(msgs);
    body["temperature"] = config.temperature;
    return body.dump();
}

ChatResponse decode_chat_response(std::string_view body, std::string_view fallback_model) {
    json doc = json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw GatewayError("response body is not a JSON object", 1);
    const auto choices = doc.find("choices");
    if (choices == doc.end() || !choices->is_array() || choices->empty()) {
        throw GatewayError("response has no choices", 1);
    }
    const json& message = (*choices)[0].value("message", json::object());
    ChatResponse out;
    if (auto content = message.find("content"); content != message.end() && content->is_string()) {
        out.text = content->get<std::string>();
    }
    if (auto usage = doc.find("usage"); usage != doc.end() && usage->is_object()) {
        out.input_tokens = usage->value("prompt_tokens", std::int64_t{0});
        out.output_tokens = usage->value("completion_tokens", std::int64_t{0});
    }
    out.model_id = doc.value("model", std::string(fallback_model));
    return out;
}

HttpTransport default_http_transport() {
    return [](const HttpRequest& req, std::chrono::milliseconds timeout) -> HttpReply {
        // Split "scheme://host[:port]" from the path.
        const auto scheme_end = req.url.find("://");
        if (scheme_end == std::string::npos) return {0, {}, "endpoint URL lacks a scheme: " + req.url};
        const auto path_start = req.url.find('/', scheme_end + 3);
        const std::string origin = req.url.substr(0, path_start);
        const std::string path = path_start == std::string::npos ? "/" : req.url.substr(path_start);

        httplib::Client client(origin);
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
        const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
        client.set_connection_timeout(secs.count(), usecs.count());
        client.set_read_timeout(secs.count(), usecs.count());
        client.set_write_timeout(secs.count(), usecs.count());

        httplib::Headers headers;
        for (const auto& [k, v] : req.headers) headers.emplace(k, v);
        auto res = client.Post(path, headers, req.body, "application/json");
        if (!res) return {0, {}, httplib::to_string(res.error())};
        return {res->status, res->body, {}};
    };
}

HttpGateway::HttpGateway(GatewayConfig config, HttpTransport transport, Sleeper sleep, std::uint64_t jitter_seed)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      sleep_(std::move(sleep)),
      in_flight_(config_.parallelism_bound),
      rng_(jitter_seed) {
    config_.validate();
    if (config_.endpoint_url.empty()) throw ConfigError("gateway endpoint_url is empty");
    if (!config_.api_key_env.empty()) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (key == nullptr || *key == '\0') {
            throw ConfigError("environment variable " + config_.api_key_env + " is not set");
        }
        api_key_ = key;
    }
}

std::chrono::milliseconds HttpGateway::next_delay(int retry) {
    std::lock_guard lock(rng_mu_);
    return backoff_.delay(retry, rng_);
}

ChatResponse HttpGateway::do_complete(std::span<const ChatMessage> messages) {
    HttpRequest request;
    request.url = config_.endpoint_url;
    if (!api_key_.empty()) request.headers.emplace_back("Authorization", "Bearer " + api_key_);
    request.body = encode_chat_request(config_, messages);

    const int attempts_allowed = config_.max_retries + 1;
    std::string last_error;
    int last_status = 0;
    for (int attempt = 1; attempt <= attempts_allowed; ++attempt) {
        HttpReply reply;
        {
            Semaphore::Guard slot(in_flight_);
            reply = transport_(request, config_.timeout);
        }
        if (reply.status >= 200 && reply.status < 300) {
            return decode_chat_response(reply.body, config_.model_id);
        }
        last_status = reply.status;
        last_error = reply.status == 0 ? "transport failure: " + reply.error
                                       : "HTTP status " + std::to_string(reply.status);
        if (attempt < attempts_allowed) sleep_(next_delay(attempt - 1));
    }
    throw GatewayError(config_.model_id + ": giving up after " + std::to_string(attempts_allowed) +
                           " attempts (" + last_error + ")",
                       attempts_allowed, last_status);
}

std::string render_history(std::span<const ChatMessage> history) {
    std::string out;
    for (const auto& m : history) {
        if (m.role == Role::system) continue;
        out += m.role == Role::user ? "User: " : "Agent: ";
        out += m.content;
        out += '\n';
    }
    if (out.empty()) return "(no previous messages)";
    out.pop_back();
    return out;
}

} // namespace selfscore
