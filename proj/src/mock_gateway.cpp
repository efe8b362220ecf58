#include "selfscore/mock_gateway.hpp"

#include "selfscore/error.hpp"

#include <json.hpp>

namespace selfscore {

MockGateway::MockGateway(std::vector<MockRule> script, std::string model_id)
    : script_(std::move(script)), consumed_(script_.size(), false), model_id_(std::move(model_id)) {}

std::vector<std::vector<ChatMessage>> MockGateway::captured() const {
    std::lock_guard lock(mu_);
    return captured_;
}

std::size_t MockGateway::remaining() const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (std::size_t i = 0; i < script_.size(); ++i) n += (!consumed_[i] || script_[i].repeat) ? 1 : 0;
    return n;
}

ChatResponse MockGateway::do_complete(std::span<const ChatMessage> messages) {
    std::lock_guard lock(mu_);
    captured_.emplace_back(messages.begin(), messages.end());
    for (std::size_t i = 0; i < script_.size(); ++i) {
        if (consumed_[i]) continue;
        const MockRule& rule = script_[i];
        if (rule.contains) {
            bool hit = false;
            for (const auto& m : messages) {
                if (m.content.find(*rule.contains) != std::string::npos) {
                    hit = true;
                    break;
                }
            }
            if (!hit) continue;
        }
        if (!rule.repeat) consumed_[i] = true;
        return {rule.echo ? messages.back().content : rule.reply, rule.input_tokens, rule.output_tokens, model_id_};
    }
    std::string excerpt = messages.back().content.substr(0, 120);
    throw MockExhaustedError("mock '" + model_id_ + "': no script entry matches request ending \"" + excerpt + "\"");
}

std::unique_ptr<MockGateway> make_mock(std::vector<MockRule> script, std::string model_id) {
    if (script.empty()) throw PreconditionError("make_mock: script is empty");
    return std::make_unique<MockGateway>(std::move(script), std::move(model_id));
}

std::vector<MockRule> parse_mock_script(std::string_view json_text) {
    auto doc = nlohmann::json::parse(json_text, nullptr, false);
    if (doc.is_discarded() || !doc.is_array()) throw ConfigError("mock script must be a JSON array");
    std::vector<MockRule> rules;
    for (const auto& item : doc) {
        if (!item.is_object()) throw ConfigError("mock script entries must be objects");
        MockRule rule;
        if (auto m = item.find("match"); m != item.end() && !m->is_null()) rule.contains = m->get<std::string>();
        rule.reply = item.value("reply", std::string{});
        rule.echo = item.value("echo", false);
        rule.repeat = item.value("repeat", false);
        rule.input_tokens = item.value("input_tokens", std::int64_t{0});
        rule.output_tokens = item.value("output_tokens", std::int64_t{0});
        if (!rule.echo && rule.reply.empty()) throw ConfigError("mock script entry without reply");
        rules.push_back(std::move(rule));
    }
    return rules;
}

} // namespace selfscore
