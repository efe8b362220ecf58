#include "selfscore/scoring.hpp"

#include "selfscore/error.hpp"

#include <algorithm>
#include <charconv>
#include <type_traits>
#include <cmath>
#include <vector>

namespace selfscore {
namespace {

void require_rating(int v, const char* what) {
    if (!rating_in_range(v)) {
        throw PreconditionError(std::string(what) + " = " + std::to_string(v) + " outside 1..10");
    }
}

double parse_price(std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ConfigError("invalid price '" + std::string(s) + "'");
    }
    return v;
}

} // namespace

void WeightVector::validate() const {
    if (!(critical >= 0.0 && error >= 0.0 && topic >= 0.0)) throw ConfigError("weights must be non-negative");
    if (std::abs(critical + error + topic - 1.0) > 1e-12) throw ConfigError("weights must sum to 1");
}

void CostModel::validate() const {
    const bool ok = std::visit(
        [](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, UniformPrice>) return p.per_token >= 0.0;
            else if constexpr (std::is_same_v<T, SplitPrice>) return p.input >= 0.0 && p.output >= 0.0;
            else return p.flat >= 0.0;
        },
        price);
    if (!ok) throw ConfigError("prices must be non-negative");
}

CostModel parse_cost_model(std::string_view spec) {
    const auto colon = spec.find(':');
    if (colon == std::string_view::npos) throw ConfigError("cost model must look like kind:price");
    const auto kind = spec.substr(0, colon);
    const auto args = spec.substr(colon + 1);
    CostModel m;
    if (kind == "uniform") {
        m.price = UniformPrice{parse_price(args)};
    } else if (kind == "split") {
        const auto comma = args.find(',');
        if (comma == std::string_view::npos) throw ConfigError("split cost model needs input,output prices");
        m.price = SplitPrice{parse_price(args.substr(0, comma)), parse_price(args.substr(comma + 1))};
    } else if (kind == "per_turn") {
        m.price = PerTurnPrice{parse_price(args)};
    } else {
        throw ConfigError("unknown cost model '" + std::string(kind) + "'");
    }
    m.validate();
    return m;
}

double weighted_complexity(const ComplexityAssessment& c, const WeightVector& w) {
    w.validate();
    require_rating(c.critical_thinking, "critical_thinking");
    require_rating(c.error_handling, "error_handling");
    require_rating(c.topic_knowledge, "topic_knowledge");
    return w.critical * c.critical_thinking + w.error * c.error_handling + w.topic * c.topic_knowledge;
}

double average_helpfulness(std::span<const int> scores) {
    if (scores.empty()) throw PreconditionError("average_helpfulness: no scores");
    double sum = 0.0;
    for (int s : scores) {
        require_rating(s, "helpfulness");
        sum += s;
    }
    return sum / static_cast<double>(scores.size());
}

double quality(double avg_llm, double avg_user) {
    if (!(avg_user >= 1.0)) throw PreconditionError("quality: average user helpfulness below 1");
    return avg_llm / avg_user;
}

double turn_quality(int agent_help, int user_help) {
    require_rating(agent_help, "agent helpfulness");
    require_rating(user_help, "user helpfulness");
    return static_cast<double>(agent_help) / static_cast<double>(user_help);
}

double final_score(double wc, double q) {
    if (!(wc >= 1.0 && wc <= 10.0)) throw PreconditionError("final_score: weighted complexity outside [1,10]");
    if (!(q > 0.0)) throw PreconditionError("final_score: quality must be positive");
    return (wc + q) / 2 * 10;
}

double turn_cost(const CostModel& model, std::int64_t input_tokens, std::int64_t output_tokens) {
    if (input_tokens < 0 || output_tokens < 0) throw PreconditionError("turn_cost: negative token count");
    model.validate();
    const auto in = static_cast<double>(input_tokens);
    const auto out = static_cast<double>(output_tokens);
    return std::visit(
        [&](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            // Uniform is evaluated exactly as split(p, p) so the two agree bit for bit.
            if constexpr (std::is_same_v<T, UniformPrice>) return in * p.per_token + out * p.per_token;
            else if constexpr (std::is_same_v<T, SplitPrice>) return in * p.input + out * p.output;
            else return p.flat;
        },
        model.price);
}

InteractionScore score_interaction(const ComplexityAssessment& complexity, std::span<const int> user_help,
                                   std::span<const int> agent_help, std::span<const TokenUsage> tokens,
                                   const ScoringOptions& options) {
    if (user_help.empty()) throw PreconditionError("score_interaction: no turns");
    if (agent_help.size() != user_help.size() || tokens.size() != user_help.size()) {
        throw PreconditionError("score_interaction: per-turn data of unequal length");
    }
    InteractionScore s;
    s.weighted_complexity = weighted_complexity(complexity, options.weights);
    s.avg_user_helpfulness = average_helpfulness(user_help);
    s.avg_llm_helpfulness = average_helpfulness(agent_help);
    s.avg_quality = quality(s.avg_llm_helpfulness, s.avg_user_helpfulness);
    if (options.clamp_quality) s.avg_quality = std::min(s.avg_quality, 10.0);
    s.final_score = final_score(s.weighted_complexity, s.avg_quality);
    if (const auto* m = options.cost_model ? &*options.cost_model : nullptr) {
        if (const auto* flat = std::get_if<PerTurnPrice>(&m->price)) {
            s.total_cost = flat->flat * static_cast<double>(tokens.size());
        } else {
            for (const auto& t : tokens) s.total_cost += turn_cost(*m, t.input_tokens, t.output_tokens);
        }
    }
    return s;
}

} // namespace selfscore
