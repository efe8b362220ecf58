#pragma once

#include "selfscore/gateway.hpp"

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace selfscore {

/// One scripted reply. `contains` is matched as a substring against every
/// message of the request; an absent matcher matches anything.
struct MockRule {
    std::optional<std::string> contains;
    std::string reply;
    bool echo = false;   // reply with the last message's content instead
    bool repeat = false; // never consumed
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
};

/// Deterministic scripted gateway. Each call consumes the first matching
/// rule; consumption is linearized across threads.
class MockGateway final : public Gateway {
public:
    explicit MockGateway(std::vector<MockRule> script, std::string model_id = "mock");

    std::string model_id() const override { return model_id_; }

    /// Every request received so far, in arrival order.
    std::vector<std::vector<ChatMessage>> captured() const;
    std::size_t remaining() const;

protected:
    ChatResponse do_complete(std::span<const ChatMessage> messages) override;

private:
    mutable std::mutex mu_;
    std::vector<MockRule> script_;
    std::vector<bool> consumed_;
    std::vector<std::vector<ChatMessage>> captured_;
    std::string model_id_;
};

/// Throws PreconditionError on an empty script.
std::unique_ptr<MockGateway> make_mock(std::vector<MockRule> script, std::string model_id = "mock");

/// Script from JSON: an array of {"match", "reply", "echo", "repeat",
/// "input_tokens", "output_tokens"} objects.
std::vector<MockRule> parse_mock_script(std::string_view json_text);

} // namespace selfscore
