#pragma once

#include "selfscore/ingest.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace selfscore {

enum class Role { system, user, assistant };

std::string_view to_string(Role role) noexcept;
Role role_from_string(std::string_view s);

struct ChatMessage {
    Role role = Role::user;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

struct ChatResponse {
    std::string text;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    std::string model_id;
};

inline constexpr double kJudgeTemperature = 0.0;
inline constexpr double kActorTemperature = 0.7;

struct GatewayConfig {
    std::string endpoint_url;
    std::string model_id;
    std::string api_key_env; // name of the environment variable holding the key
    double temperature = kActorTemperature;
    std::chrono::milliseconds timeout{60'000};
    int max_retries = 3;
    int parallelism_bound = 4;

    void validate() const;
};

/// Chat-completion backend. Implementations must be safe to share between
/// threads.
class Gateway {
public:
    virtual ~Gateway() = default;

    /// Checks the request preconditions, then forwards to the backend.
    ChatResponse complete(std::span<const ChatMessage> messages);

    virtual std::string model_id() const = 0;

protected:
    virtual ChatResponse do_complete(std::span<const ChatMessage> messages) = 0;
};

/// Counting semaphore with a runtime bound.
class Semaphore {
public:
    explicit Semaphore(int permits);

    void acquire();
    void release();

    class Guard {
    public:
        explicit Guard(Semaphore& s) : s_(s) { s_.acquire(); }
        ~Guard() { s_.release(); }
        Guard(const Guard&) = delete;
        Guard& operator=(const Guard&) = delete;

    private:
        Semaphore& s_;
    };

private:
    std::mutex mu_;
    std::condition_variable cv_;
    int permits_;
};

/// Exponential backoff with jitter. Retry `n` (0-based) waits a uniformly
/// jittered value in [d/2, d], d = min(cap, base * multiplier^n).
struct BackoffPolicy {
    std::chrono::milliseconds base{500};
    std::chrono::milliseconds cap{30'000};
    double multiplier = 2.0;

    std::chrono::milliseconds ceiling(int retry) const;
    std::chrono::milliseconds delay(int retry, std::mt19937_64& rng) const;
};

struct HttpRequest {
    std::string url;
    std::vector<std::pair<std::string, std::string>> headers;
    std::string body;
};

struct HttpReply {
    int status = 0;          // 0 when the transport itself failed
    std::string body;
    std::string error;       // transport failure description
};

using HttpTransport = std::function<HttpReply(const HttpRequest&, std::chrono::milliseconds timeout)>;

/// cpp-httplib backed transport; supports http:// and https:// URLs.
HttpTransport default_http_transport();

/// Serializes the chat-completions request body.
std::string encode_chat_request(const GatewayConfig& config, std::span<const ChatMessage> messages);

/// Parses a chat-completions response body. Throws GatewayError on a body
/// that does not follow the schema.
ChatResponse decode_chat_response(std::string_view body, std::string_view fallback_model);

/// Live chat-completions endpoint with bounded in-flight requests and
/// retry-with-backoff. Every retry re-sends the identical request bytes.
class HttpGateway final : public Gateway {
public:
    explicit HttpGateway(GatewayConfig config, HttpTransport transport = default_http_transport(),
                         Sleeper sleep = default_sleeper(), std::uint64_t jitter_seed = std::random_device{}());

    std::string model_id() const override { return config_.model_id; }
    const GatewayConfig& config() const noexcept { return config_; }

protected:
    ChatResponse do_complete(std::span<const ChatMessage> messages) override;

private:
    std::chrono::milliseconds next_delay(int retry);

    GatewayConfig config_;
    HttpTransport transport_;
    Sleeper sleep_;
    BackoffPolicy backoff_;
    Semaphore in_flight_;
    std::mutex rng_mu_;
    std::mt19937_64 rng_;
    std::string api_key_;
};

/// Plain-text transcript: one "User: ..." / "Agent: ..." line per message,
/// system messages omitted. An empty history renders as "(no previous messages)".
std::string render_history(std::span<const ChatMessage> history);

} // namespace selfscore
