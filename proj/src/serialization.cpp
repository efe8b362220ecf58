#include "selfscore/serialization.hpp"

#include "selfscore/error.hpp"

namespace selfscore {
namespace {

const Json& field(const Json& j, const char* key) {
    if (!j.is_object()) throw ConfigError(std::string("expected an object holding \"") + key + "\"");
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(std::string("missing field \"") + key + "\"");
    return *it;
}

template <typename T>
T get(const Json& j, const char* key) {
    const Json& v = field(j, key);
    try {
        return v.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("field \"") + key + "\" has the wrong type");
    }
}

int get_rating(const Json& j, const char* key) {
    const Json& v = field(j, key);
    if (!v.is_number_integer()) throw ConfigError(std::string("field \"") + key + "\" must be an integer");
    return v.get<int>();
}

} // namespace

Json to_json(const ComplexityAssessment& c) {
    return Json{{"critical_thinking", c.critical_thinking},
                {"error_handling", c.error_handling},
                {"topic_knowledge", c.topic_knowledge}};
}

ComplexityAssessment complexity_from_json(const Json& j) {
    return {get_rating(j, "critical_thinking"), get_rating(j, "error_handling"), get_rating(j, "topic_knowledge")};
}

Json to_json(const WeightVector& w) {
    return Json{{"critical", w.critical}, {"error", w.error}, {"topic", w.topic}};
}

WeightVector weights_from_json(const Json& j) {
    WeightVector w{get<double>(j, "critical"), get<double>(j, "error"), get<double>(j, "topic")};
    w.validate();
    return w;
}

Json to_json(const CostModel& m) {
    Json j;
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, UniformPrice>) {
                j["kind"] = "uniform";
                j["per_token"] = p.per_token;
            } else if constexpr (std::is_same_v<T, SplitPrice>) {
                j["kind"] = "split";
                j["input"] = p.input;
                j["output"] = p.output;
            } else {
                j["kind"] = "per_turn";
                j["flat"] = p.flat;
            }
        },
        m.price);
    j["currency"] = m.currency;
    return j;
}

CostModel cost_model_from_json(const Json& j) {
    const auto kind = get<std::string>(j, "kind");
    CostModel m;
    if (kind == "uniform") {
        m.price = UniformPrice{get<double>(j, "per_token")};
    } else if (kind == "split") {
        m.price = SplitPrice{get<double>(j, "input"), get<double>(j, "output")};
    } else if (kind == "per_turn") {
        m.price = PerTurnPrice{get<double>(j, "flat")};
    } else {
        throw ConfigError("unknown cost model kind '" + kind + "'");
    }
    if (j.contains("currency")) m.currency = get<std::string>(j, "currency");
    m.validate();
    return m;
}

Json to_json(const InteractionScore& s) {
    return Json{{"weighted_complexity", s.weighted_complexity},
                {"avg_user_helpfulness", s.avg_user_helpfulness},
                {"avg_llm_helpfulness", s.avg_llm_helpfulness},
                {"avg_quality", s.avg_quality},
                {"final_score", s.final_score},
                {"total_cost", s.total_cost}};
}

InteractionScore score_from_json(const Json& j) {
    return {get<double>(j, "weighted_complexity"), get<double>(j, "avg_user_helpfulness"),
            get<double>(j, "avg_llm_helpfulness"),  get<double>(j, "avg_quality"),
            get<double>(j, "final_score"),          get<double>(j, "total_cost")};
}

Json to_json(const ScoringOptions& o) {
    return Json{{"weights", to_json(o.weights)},
                {"cost_model", o.cost_model ? to_json(*o.cost_model) : Json(nullptr)},
                {"clamp_quality", o.clamp_quality}};
}

ScoringOptions scoring_options_from_json(const Json& j) {
    ScoringOptions o;
    o.weights = weights_from_json(field(j, "weights"));
    if (const Json& c = field(j, "cost_model"); !c.is_null()) o.cost_model = cost_model_from_json(c);
    o.clamp_quality = get<bool>(j, "clamp_quality");
    return o;
}

Json to_json(const TurnRecord& t) {
    return Json{{"turn_index", t.turn_index},
                {"user_message", t.user_message},
                {"agent_message", t.agent_message},
                {"user_helpfulness", t.user_helpfulness},
                {"agent_helpfulness", t.agent_helpfulness},
                {"turn_quality", t.turn_quality},
                {"input_tokens", t.input_tokens},
                {"output_tokens", t.output_tokens},
                {"turn_cost", t.turn_cost ? Json(*t.turn_cost) : Json(nullptr)},
                {"solved_after", t.solved_after}};
}

TurnRecord turn_from_json(const Json& j) {
    TurnRecord t;
    t.turn_index = get<int>(j, "turn_index");
    t.user_message = get<std::string>(j, "user_message");
    t.agent_message = get<std::string>(j, "agent_message");
    t.user_helpfulness = get_rating(j, "user_helpfulness");
    t.agent_helpfulness = get_rating(j, "agent_helpfulness");
    t.turn_quality = get<double>(j, "turn_quality");
    t.input_tokens = get<std::int64_t>(j, "input_tokens");
    t.output_tokens = get<std::int64_t>(j, "output_tokens");
    if (const Json& c = field(j, "turn_cost"); !c.is_null()) t.turn_cost = get<double>(j, "turn_cost");
    t.solved_after = get<bool>(j, "solved_after");
    return t;
}

Json to_json(const InteractionResult& r) {
    Json turns = Json::array();
    for (const auto& t : r.turns) turns.push_back(to_json(t));
    Json j{{"run_label", r.run_label},
           {"entry_id", r.entry_id},
           {"terminated_by", to_string(r.terminated_by)},
           {"complexity", r.complexity ? to_json(*r.complexity) : Json(nullptr)},
           {"turns", std::move(turns)},
           {"score", r.score ? to_json(*r.score) : Json(nullptr)},
           {"scoring", to_json(r.scoring)}};
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

InteractionResult result_from_json(const Json& j) {
    InteractionResult r;
    r.run_label = get<std::string>(j, "run_label");
    r.entry_id = get<std::int64_t>(j, "entry_id");
    r.terminated_by = termination_from_string(get<std::string>(j, "terminated_by"));
    if (const Json& c = field(j, "complexity"); !c.is_null()) r.complexity = complexity_from_json(c);
    const Json& turns = field(j, "turns");
    if (!turns.is_array()) throw ConfigError("field \"turns\" must be an array");
    for (const auto& t : turns) r.turns.push_back(turn_from_json(t));
    if (const Json& s = field(j, "score"); !s.is_null()) r.score = score_from_json(s);
    r.scoring = scoring_options_from_json(field(j, "scoring"));
    if (j.contains("error")) r.error = get<std::string>(j, "error");
    return r;
}

} // namespace selfscore
