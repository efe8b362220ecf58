#include "selfscore/actors.hpp"

#include "selfscore/error.hpp"
#include "selfscore/templates.hpp"

namespace selfscore {
namespace {

// Decodes one UTF-8 sequence at `i`, advancing it. Malformed input yields
// U+FFFD and skips one byte.
char32_t next_code_point(std::string_view s, std::size_t& i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    auto cont = [&](std::size_t k) -> int {
        if (i + k >= s.size()) return -1;
        const auto b = static_cast<unsigned char>(s[i + k]);
        return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
    };
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++i;
        return 0xFFFD;
    }
    for (int k = 1; k < len; ++k) {
        const int c = cont(static_cast<std::size_t>(k));
        if (c < 0) {
            ++i;
            return 0xFFFD;
        }
        cp = (cp << 6) | static_cast<char32_t>(c);
    }
    i += static_cast<std::size_t>(len);
    return cp;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_unicode_space(char32_t cp) {
    return cp == ' ' || (cp >= 0x09 && cp <= 0x0D) || cp == 0x85 || cp == 0xA0 || cp == 0x1680 ||
           (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 || cp == 0x2029 || cp == 0x202F || cp == 0x205F ||
           cp == 0x3000;
}

constexpr std::string_view kDefaultPersona =
    "You are role-playing a person who asked an IT help desk for help. You are not an IT expert.\n"
    "The problem you actually have is: {{problem}}\n"
    "You do not know this cause. Never solve the problem yourself, never name the cause outright, and describe only "
    "what you observe.\n"
    "\n"
    "Conversation so far:\n"
    "{{history}}\n"
    "\n"
    "The agent's last instruction was:\n"
    "{{message}}\n"
    "\n"
    "Reply as the user, in the first person and in one to three sentences, reporting what happened when you "
    "followed that instruction.";

constexpr std::string_view kDefaultRagContext =
    "Reference material from previously solved help desk cases. Use it when it is relevant to the user's "
    "problem.\n"
    "\n"
    "{{context}}";

} // namespace

bool CharClass::contains(char32_t cp) const noexcept {
    for (const auto& [lo, hi] : ranges_) {
        if (cp >= lo && cp <= hi) return true;
    }
    return false;
}

std::string sanitize_output(std::string_view text, const CharClass& allowed) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    std::size_t i = 0;
    while (i < text.size()) {
        const char32_t cp = next_code_point(text, i);
        if (is_unicode_space(cp)) {
            pending_space = !out.empty();
            continue;
        }
        if (!allowed.contains(cp)) continue;
        if (pending_space) out.push_back(' ');
        pending_space = false;
        append_utf8(out, cp);
    }
    return out;
}

ActorTemplates ActorTemplates::defaults() {
    return ActorTemplates{std::string(kDefaultPersona), std::string(kDefaultRagContext)};
}

ActorTemplates ActorTemplates::load(const std::filesystem::path& dir) {
    ActorTemplates t = defaults();
    if (auto s = read_template_file(dir, "persona")) t.persona = std::move(*s);
    if (auto s = read_template_file(dir, "rag_context")) t.rag_context = std::move(*s);
    return t;
}

void AgentConfig::validate() const {
    gateway.validate();
    if (use_rag && rag_top_k < 1) throw ConfigError("rag_top_k must be >= 1 when RAG is enabled");
}

std::vector<ChatMessage> agent_messages(const AgentConfig& config, const RagIndex* index,
                                        std::span<const ChatMessage> history, std::string_view user_input,
                                        const ActorTemplates& templates) {
    if (user_input.empty()) throw PreconditionError("agent_respond: empty user input");
    std::vector<ChatMessage> messages;
    if (config.use_rag) {
        if (index == nullptr) throw PreconditionError("agent_respond: RAG enabled but no index supplied");
        // Retrieval keys on the opening question plus the latest input, since
        // follow-ups alone ("that didn't work") carry little lexical signal.
        std::string query;
        for (const auto& m : history) {
            if (m.role == Role::user) {
                query = m.content + "\n";
                break;
            }
        }
        query += user_input;
        const auto hits = index->search(query, static_cast<std::size_t>(config.rag_top_k));
        if (!hits.empty()) {
            std::string passages;
            for (std::size_t i = 0; i < hits.size(); ++i) {
                if (i > 0) passages += "\n\n";
                passages += "[" + std::to_string(i + 1) + "] " + index->document(hits[i].entry_id);
            }
            messages.push_back({Role::user, render_template(templates.rag_context, {{"context", passages}})});
        }
    } else {
        messages.push_back({Role::system, config.system_prompt});
    }
    messages.insert(messages.end(), history.begin(), history.end());
    messages.push_back({Role::user, std::string(user_input)});
    return messages;
}

AgentReply agent_respond(const AgentConfig& config, Gateway& gateway, const RagIndex* index,
                         std::span<const ChatMessage> history, std::string_view user_input,
                         const ActorTemplates& templates) {
    const auto messages = agent_messages(config, index, history, user_input, templates);
    ChatResponse r = gateway.complete(messages);
    AgentReply reply{std::move(r.text), r.input_tokens, r.output_tokens};
    if (config.sanitize) reply.text = sanitize_output(reply.text, *config.sanitize);
    return reply;
}

std::string_view to_string(UserProxyMode mode) noexcept {
    return mode == UserProxyMode::llm_simulated ? "llm_simulated" : "dataset_replay";
}

UserProxyMode user_proxy_mode_from_string(std::string_view s) {
    if (s == "llm_simulated") return UserProxyMode::llm_simulated;
    if (s == "dataset_replay") return UserProxyMode::dataset_replay;
    throw ConfigError("unknown user proxy mode '" + std::string(s) + "'");
}

std::string user_initial_question(const BenchmarkEntry& entry) {
    if (!entry.extracted()) {
        throw PreconditionError("entry " + std::to_string(entry.entry_id) + " has no extracted summary");
    }
    return entry.question_summary;
}

std::string user_follow_up(UserProxyMode mode, Gateway* gateway, const BenchmarkEntry& entry,
                           std::span<const ChatMessage> history, const ActorTemplates& templates) {
    if (history.empty() || history.back().role != Role::assistant) {
        throw PreconditionError("user_follow_up: history must end with an agent message");
    }
    if (mode == UserProxyMode::dataset_replay) return std::string(kReplayAcknowledgment);
    if (gateway == nullptr) throw PreconditionError("user_follow_up: simulated user needs a gateway");
    const std::string prompt = render_template(templates.persona, {{"problem", entry.underlying_problem},
                                                                   {"history", render_history(history)},
                                                                   {"message", history.back().content}});
    const std::vector<ChatMessage> request{{Role::user, prompt}};
    ChatResponse r = gateway->complete(request);
    auto first = r.text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) throw GatewayError("user proxy returned an empty reply", 1);
    auto last = r.text.find_last_not_of(" \t\r\n");
    return r.text.substr(first, last - first + 1);
}

} // namespace selfscore
