#include "selfscore/assessor.hpp"

#include "selfscore/error.hpp"
#include "selfscore/templates.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

namespace selfscore {
namespace {

constexpr std::string_view kScaleSentence =
    "on a 10-point scale, where a 10 represents a perfectly helpful contribution to the ongoing interaction and 1 "
    "the least helpful.";

constexpr std::string_view kScoreFormat =
    "Respond with only a JSON object of the form {\"score\": <integer from 1 to 10>} and no other text.";

constexpr std::string_view kComplexityTemplate =
    "You are assessing the complexity of an IT help desk problem. Grade it relative to the easiest and hardest "
    "problems in the computer and IT domain on three independent criteria, each an integer from 1 (lowest) to 10 "
    "(highest):\n"
    "\n"
    "Critical Thinking: How much critical thinking does this problem require to solve.\n"
    "Error Handling: How likely is an error to occur while solving this problem, and, should an error occur, how "
    "significant will the impact of the error be and how difficult will it be to recover from it.\n"
    "Topic Knowledge: How much topic knowledge is required to solve the problem.\n"
    "\n"
    "Problem:\n"
    "{{question}}\n"
    "\n"
    "Respond with only a JSON object of the form {\"critical_thinking\": <1-10>, \"error_handling\": <1-10>, "
    "\"topic_knowledge\": <1-10>} and no other text.";

constexpr std::string_view kFormatReminder =
    "\n\nYour previous reply could not be used. Respond with only the JSON object described above and no other text.";
constexpr std::string_view kYesNoReminder =
    "\n\nYour previous reply could not be used. Answer with exactly one word: yes or no.";

std::string user_help_first_template() {
    return "You are rating the helpfulness of a user's opening question to an IT help desk agent " +
           std::string(kScaleSentence) +
           "\nConsider how helpful this initial question is based on how much potentially helpful information it "
           "contains, relevant to solving the problem.\n"
           "\n"
           "Initial question:\n"
           "{{message}}\n"
           "\n" +
           std::string(kScoreFormat);
}

std::string user_help_template() {
    return "You are rating the helpfulness of the user's latest message in an IT help desk conversation " +
           std::string(kScaleSentence) +
           "\nConsider whether the user response in this turn demonstrates their ability to follow the previous "
           "turn's instructions and communicate relevant new information clearly and concisely.\n"
           "\n"
           "Conversation so far:\n"
           "{{history}}\n"
           "\n"
           "User's latest message:\n"
           "{{message}}\n"
           "\n" +
           std::string(kScoreFormat);
}

std::string agent_help_template() {
    return "You are rating the helpfulness of the help desk agent's latest response " + std::string(kScaleSentence) +
           "\nConsider whether the agent can provide solutions relevant to the current problem, considering the "
           "information provided by the user. A helpful response is understandable, applicable, and constructive in "
           "addressing the user's underlying problem.\n"
           "\n"
           "Conversation so far:\n"
           "{{history}}\n"
           "\n"
           "Agent's latest response:\n"
           "{{message}}\n"
           "\n" +
           std::string(kScoreFormat);
}

constexpr std::string_view kSolvedTemplate =
    "You are checking whether an IT help desk agent has solved the user's problem.\n"
    "\n"
    "The user's underlying problem:\n"
    "{{problem}}\n"
    "\n"
    "Conversation so far:\n"
    "{{history}}\n"
    "\n"
    "Agent's latest response:\n"
    "{{message}}\n"
    "\n"
    "Considering the turn history and the latest response, is the user's problem in fact solved? Answer with "
    "exactly one word: yes or no.";

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

// Accepts a bare JSON object, optionally wrapped in one markdown code fence.
std::optional<nlohmann::json> parse_object(std::string_view reply) {
    std::string text = trim(reply);
    if (text.starts_with("```")) {
        const auto nl = text.find('\n');
        if (nl == std::string::npos || !text.ends_with("```")) return std::nullopt;
        text = trim(std::string_view(text).substr(nl + 1, text.size() - nl - 4));
    }
    auto doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
    return doc;
}

struct ParseFailure {
    AssessmentError::Kind kind;
    std::string what;
};

template <typename T>
using ParseResult = std::variant<T, ParseFailure>;

// Sends `prompt`; on an unusable reply re-sends it with `reminder` appended,
// at most `retries` times. The last failure becomes the thrown error.
template <typename T>
T ask_judge(const JudgeConfig& judge, Gateway& gateway, const std::string& prompt, std::string_view reminder,
            const std::function<ParseResult<T>(const std::string&)>& parse, std::string_view what) {
    ParseFailure last{AssessmentError::Kind::unparseable, ""};
    for (int attempt = 0; attempt <= judge.parse_retries; ++attempt) {
        const std::vector<ChatMessage> request{
            {Role::user, attempt == 0 ? prompt : prompt + std::string(reminder)}};
        const ChatResponse r = gateway.complete(request);
        auto parsed = parse(r.text);
        if (auto* ok = std::get_if<T>(&parsed)) return *ok;
        last = std::get<ParseFailure>(parsed);
    }
    throw AssessmentError(last.kind, std::string(what) + ": " + last.what + " after " +
                                         std::to_string(judge.parse_retries + 1) + " attempt(s)");
}

ParseResult<int> read_rating(const nlohmann::json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end()) return ParseFailure{AssessmentError::Kind::unparseable, std::string("missing \"") + key + "\""};
    if (!it->is_number_integer()) {
        return ParseFailure{AssessmentError::Kind::unparseable, std::string("\"") + key + "\" is not an integer"};
    }
    const auto v = it->get<std::int64_t>();
    if (v < kMinRating || v > kMaxRating) {
        return ParseFailure{AssessmentError::Kind::out_of_range,
                            std::string("\"") + key + "\" = " + std::to_string(v) + " outside 1..10"};
    }
    return static_cast<int>(v);
}

ParseResult<int> parse_score(const std::string& reply) {
    auto doc = parse_object(reply);
    if (!doc) return ParseFailure{AssessmentError::Kind::unparseable, "reply is not a JSON object"};
    return read_rating(*doc, "score");
}

ParseResult<ComplexityAssessment> parse_complexity(const std::string& reply) {
    auto doc = parse_object(reply);
    if (!doc) return ParseFailure{AssessmentError::Kind::unparseable, "reply is not a JSON object"};
    ComplexityAssessment c;
    for (auto [key, slot] : {std::pair{"critical_thinking", &c.critical_thinking},
                             std::pair{"error_handling", &c.error_handling},
                             std::pair{"topic_knowledge", &c.topic_knowledge}}) {
        auto v = read_rating(*doc, key);
        if (auto* f = std::get_if<ParseFailure>(&v)) return *f;
        *slot = std::get<int>(v);
    }
    return c;
}

ParseResult<bool> parse_yes_no(const std::string& reply) {
    std::string t = trim(reply);
    if (!t.empty() && t.back() == '.') t.pop_back();
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (t == "yes") return true;
    if (t == "no") return false;
    return ParseFailure{AssessmentError::Kind::unparseable, "expected yes or no"};
}

} // namespace

TemplateSet TemplateSet::defaults() {
    return TemplateSet{std::string(kComplexityTemplate), user_help_first_template(), user_help_template(),
                       agent_help_template(), std::string(kSolvedTemplate)};
}

TemplateSet TemplateSet::load(const std::filesystem::path& dir) {
    TemplateSet t = defaults();
    for (auto [name, slot] : {std::pair{"complexity", &t.complexity}, std::pair{"user_help_first", &t.user_help_first},
                              std::pair{"user_help", &t.user_help}, std::pair{"agent_help", &t.agent_help},
                              std::pair{"solved", &t.solved}}) {
        if (auto s = read_template_file(dir, name)) *slot = std::move(*s);
    }
    return t;
}

void JudgeConfig::validate() const {
    gateway.validate();
    if (parse_retries < 0) throw ConfigError("parse_retries must be >= 0");
}

std::string complexity_prompt(const TemplateSet& t, std::string_view question_summary) {
    return render_template(t.complexity, {{"question", std::string(question_summary)}});
}

std::string user_help_prompt(const TemplateSet& t, std::span<const ChatMessage> history,
                             std::string_view user_message, bool is_first_turn) {
    return render_template(is_first_turn ? t.user_help_first : t.user_help,
                           {{"history", render_history(history)}, {"message", std::string(user_message)}});
}

std::string agent_help_prompt(const TemplateSet& t, std::span<const ChatMessage> history,
                              std::string_view agent_message) {
    return render_template(t.agent_help, {{"history", render_history(history)}, {"message", std::string(agent_message)}});
}

std::string solved_prompt(const TemplateSet& t, std::string_view underlying_problem,
                          std::span<const ChatMessage> history, std::string_view latest_agent_message) {
    return render_template(t.solved, {{"problem", std::string(underlying_problem)},
                                      {"history", render_history(history)},
                                      {"message", std::string(latest_agent_message)}});
}

ComplexityAssessment assess_complexity(const JudgeConfig& judge, Gateway& gateway, std::string_view question_summary) {
    if (question_summary.empty()) throw PreconditionError("assess_complexity: empty question summary");
    return ask_judge<ComplexityAssessment>(judge, gateway, complexity_prompt(judge.templates, question_summary),
                                           kFormatReminder, parse_complexity, "complexity assessment");
}

HelpfulnessScore assess_user_helpfulness(const JudgeConfig& judge, Gateway& gateway,
                                         std::span<const ChatMessage> history, std::string_view user_message,
                                         bool is_first_turn, int turn_index) {
    if (user_message.empty()) throw PreconditionError("assess_user_helpfulness: empty user message");
    const int v = ask_judge<int>(judge, gateway, user_help_prompt(judge.templates, history, user_message, is_first_turn),
                                 kFormatReminder, parse_score, "user helpfulness");
    return HelpfulnessScore{v, Subject::user, turn_index};
}

HelpfulnessScore assess_agent_helpfulness(const JudgeConfig& judge, Gateway& gateway,
                                          std::span<const ChatMessage> history, std::string_view agent_message,
                                          int turn_index) {
    if (agent_message.empty()) throw PreconditionError("assess_agent_helpfulness: empty agent message");
    const int v = ask_judge<int>(judge, gateway, agent_help_prompt(judge.templates, history, agent_message),
                                 kFormatReminder, parse_score, "agent helpfulness");
    return HelpfulnessScore{v, Subject::agent, turn_index};
}

bool check_solved(const JudgeConfig& judge, Gateway& gateway, std::string_view underlying_problem,
                  std::span<const ChatMessage> history, std::string_view latest_agent_message) {
    if (underlying_problem.empty()) throw PreconditionError("check_solved: empty underlying problem");
    if (latest_agent_message.empty()) throw PreconditionError("check_solved: empty agent message");
    return ask_judge<bool>(judge, gateway,
                           solved_prompt(judge.templates, underlying_problem, history, latest_agent_message),
                           kYesNoReminder, parse_yes_no, "solved check");
}

} // namespace selfscore
