#pragma once

#include "selfscore/gateway.hpp"
#include "selfscore/types.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace selfscore {

/// Judge prompt templates. Placeholders: {{question}}, {{history}},
/// {{problem}}, {{message}}.
struct TemplateSet {
    std::string complexity;
    std::string user_help_first;
    std::string user_help;
    std::string agent_help;
    std::string solved;

    static TemplateSet defaults();
    /// Files named complexity, user_help_first, user_help, agent_help and
    /// solved (optionally with .txt) in `dir` override the defaults.
    static TemplateSet load(const std::filesystem::path& dir);
};

struct JudgeConfig {
    GatewayConfig gateway{.endpoint_url = {}, .model_id = {}, .api_key_env = {}, .temperature = kJudgeTemperature};
    int parse_retries = 2;
    TemplateSet templates = TemplateSet::defaults();

    void validate() const;
};

/// Rendered prompts, exposed so callers can check what a judge will see.
std::string complexity_prompt(const TemplateSet& t, std::string_view question_summary);
std::string user_help_prompt(const TemplateSet& t, std::span<const ChatMessage> history,
                             std::string_view user_message, bool is_first_turn);
std::string agent_help_prompt(const TemplateSet& t, std::span<const ChatMessage> history,
                              std::string_view agent_message);
std::string solved_prompt(const TemplateSet& t, std::string_view underlying_problem,
                          std::span<const ChatMessage> history, std::string_view latest_agent_message);

ComplexityAssessment assess_complexity(const JudgeConfig& judge, Gateway& gateway, std::string_view question_summary);

/// For later turns `history` ends with the agent message the user is
/// responding to.
HelpfulnessScore assess_user_helpfulness(const JudgeConfig& judge, Gateway& gateway,
                                         std::span<const ChatMessage> history, std::string_view user_message,
                                         bool is_first_turn, int turn_index = 1);

/// `history` includes the user message the agent is answering.
HelpfulnessScore assess_agent_helpfulness(const JudgeConfig& judge, Gateway& gateway,
                                          std::span<const ChatMessage> history, std::string_view agent_message,
                                          int turn_index = 1);

bool check_solved(const JudgeConfig& judge, Gateway& gateway, std::string_view underlying_problem,
                  std::span<const ChatMessage> history, std::string_view latest_agent_message);

} // namespace selfscore
