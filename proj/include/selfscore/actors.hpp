#pragma once

#include "selfscore/gateway.hpp"
#include "selfscore/ingest.hpp"
#include "selfscore/rag_index.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace selfscore {

inline constexpr std::string_view kAgentSystemPrompt =
    "A user is having a problem. Respond with simple and helpful instructions most likely to guide the user to a "
    "solution. Only provide one solution at a time. Never give instructions to contact external or professional "
    "services. Never suggest contacting external or professional services.";

/// Reply the dataset-replay user gives once the replayed answer has been shown.
inline constexpr std::string_view kReplayAcknowledgment = "Thank you, that answers my question.";

/// Set of allowed Unicode code points, as inclusive ranges.
class CharClass {
public:
    explicit CharClass(std::vector<std::pair<char32_t, char32_t>> ranges) : ranges_(std::move(ranges)) {}

    static CharClass ascii_printable() { return CharClass({{0x20, 0x7E}}); }

    bool contains(char32_t cp) const noexcept;

private:
    std::vector<std::pair<char32_t, char32_t>> ranges_;
};

/// Drops code points outside `allowed`, maps whitespace to single spaces and
/// trims both ends. Idempotent.
std::string sanitize_output(std::string_view text, const CharClass& allowed = CharClass::ascii_printable());

/// Persona prompt for the simulated user and the wrapper for RAG passages.
struct ActorTemplates {
    std::string persona;
    std::string rag_context;

    static ActorTemplates defaults();
    /// Files `persona.txt` / `rag_context.txt` in `dir` override the defaults.
    static ActorTemplates load(const std::filesystem::path& dir);
};

struct AgentConfig {
    GatewayConfig gateway;
    bool use_rag = false;
    int rag_top_k = 3;
    std::string system_prompt{kAgentSystemPrompt}; // only sent without RAG
    std::optional<CharClass> sanitize = CharClass::ascii_printable();

    void validate() const;
};

struct AgentReply {
    std::string text;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
};

/// Outbound request agent_respond sends. Without RAG: system prompt, history,
/// user input. With RAG: one context message carrying the top-k passages,
/// history, user input, and no system prompt.
std::vector<ChatMessage> agent_messages(const AgentConfig& config, const RagIndex* index,
                                        std::span<const ChatMessage> history, std::string_view user_input,
                                        const ActorTemplates& templates = ActorTemplates::defaults());

/// Stateless: the caller owns and supplies the interaction history.
AgentReply agent_respond(const AgentConfig& config, Gateway& gateway, const RagIndex* index,
                         std::span<const ChatMessage> history, std::string_view user_input,
                         const ActorTemplates& templates = ActorTemplates::defaults());

enum class UserProxyMode { llm_simulated, dataset_replay };

std::string_view to_string(UserProxyMode mode) noexcept;
UserProxyMode user_proxy_mode_from_string(std::string_view s);

/// The summarized question; throws PreconditionError for unextracted entries.
std::string user_initial_question(const BenchmarkEntry& entry);

/// The user's next message. `history` must end with an agent message.
/// `gateway` is required for llm_simulated and ignored for dataset_replay.
std::string user_follow_up(UserProxyMode mode, Gateway* gateway, const BenchmarkEntry& entry,
                           std::span<const ChatMessage> history,
                           const ActorTemplates& templates = ActorTemplates::defaults());

} // namespace selfscore
