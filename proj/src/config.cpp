#include "selfscore/config.hpp"

#include "selfscore/error.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

namespace selfscore {
namespace {

void check_keys(const Json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) throw ConfigError(std::string(where) + ": expected a JSON object");
    for (const auto& [key, _] : j.items()) {
        bool known = false;
        for (auto a : allowed) known = known || key == a;
        if (!known) throw ConfigError(std::string(where) + ": unknown key \"" + key + "\"");
    }
}

template <typename T>
T value_or(const Json& j, const char* key, T fallback, std::string_view where) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string(where) + ": \"" + key + "\" has the wrong type");
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::filesystem::path& p) {
    return p.is_absolute() || base.empty() ? p : base / p;
}

Json parse_document(std::string_view text, std::string_view what) {
    auto doc = Json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw ConfigError(std::string(what) + " is not valid JSON");
    return doc;
}

} // namespace

GatewayConfig gateway_config_from_json(const Json& j, std::string_view default_key_env, double default_temperature) {
    check_keys(j, "gateway", {"endpoint_url", "model", "api_key_env", "temperature", "timeout_ms", "max_retries",
                              "parallelism_bound", "parse_retries", "use_rag", "rag_top_k", "system_prompt"});
    GatewayConfig g;
    g.endpoint_url = value_or<std::string>(j, "endpoint_url", "", "gateway");
    g.model_id = value_or<std::string>(j, "model", "", "gateway");
    if (g.model_id.empty()) throw ConfigError("gateway: \"model\" is required");
    g.api_key_env = value_or<std::string>(j, "api_key_env", std::string(default_key_env), "gateway");
    g.temperature = value_or<double>(j, "temperature", default_temperature, "gateway");
    g.timeout = std::chrono::milliseconds(value_or<std::int64_t>(j, "timeout_ms", g.timeout.count(), "gateway"));
    g.max_retries = value_or<int>(j, "max_retries", g.max_retries, "gateway");
    g.parallelism_bound = value_or<int>(j, "parallelism_bound", g.parallelism_bound, "gateway");
    g.validate();
    return g;
}

Json to_json(const GatewayConfig& g) {
    return Json{{"endpoint_url", g.endpoint_url},
                {"model", g.model_id},
                {"api_key_env", g.api_key_env},
                {"temperature", g.temperature},
                {"timeout_ms", g.timeout.count()},
                {"max_retries", g.max_retries},
                {"parallelism_bound", g.parallelism_bound}};
}

RunFile parse_run_file(std::string_view json_text, const std::filesystem::path& base_dir) {
    const Json j = parse_document(json_text, "run config");
    check_keys(j, "run config",
               {"max_turns", "proxy_mode", "parallel_interactions", "seed", "corpus", "split", "min_upvotes", "limit",
                "runs_dir", "templates_dir", "weights", "cost_model", "clamp_quality", "agent", "user_proxy", "judge",
                "complexity_judge"});
    RunFile f;
    RunConfig& c = f.run;
    c.max_turns = value_or<int>(j, "max_turns", c.max_turns, "run config");
    c.proxy_mode = user_proxy_mode_from_string(value_or<std::string>(j, "proxy_mode", "llm_simulated", "run config"));
    c.parallel_interactions = value_or<int>(j, "parallel_interactions", c.parallel_interactions, "run config");
    c.seed = value_or<std::uint64_t>(j, "seed", c.seed, "run config");
    if (j.contains("weights")) c.weights = weights_from_json(j["weights"]);
    if (j.contains("cost_model") && !j["cost_model"].is_null()) c.cost_model = cost_model_from_json(j["cost_model"]);
    c.clamp_quality = value_or<bool>(j, "clamp_quality", false, "run config");

    if (!j.contains("judge")) throw ConfigError("run config: \"judge\" is required");
    c.judge.gateway = gateway_config_from_json(j["judge"], "SELFSCORE_API_KEY_JUDGE", kJudgeTemperature);
    c.judge.parse_retries = value_or<int>(j["judge"], "parse_retries", c.judge.parse_retries, "judge");
    if (j.contains("complexity_judge")) {
        const Json& cj = j["complexity_judge"];
        c.complexity_judge.gateway = gateway_config_from_json(cj, "SELFSCORE_API_KEY_COMPLEXITY_JUDGE", kJudgeTemperature);
        c.complexity_judge.parse_retries =
            value_or<int>(cj, "parse_retries", c.complexity_judge.parse_retries, "complexity_judge");
    } else {
        c.complexity_judge = c.judge;
    }

    if (c.proxy_mode == UserProxyMode::llm_simulated) {
        if (!j.contains("agent")) throw ConfigError("run config: \"agent\" is required for llm_simulated runs");
        const Json& a = j["agent"];
        c.agent.gateway = gateway_config_from_json(a, "SELFSCORE_API_KEY_AGENT", kActorTemperature);
        c.agent.use_rag = value_or<bool>(a, "use_rag", false, "agent");
        c.agent.rag_top_k = value_or<int>(a, "rag_top_k", c.agent.rag_top_k, "agent");
        c.agent.system_prompt = value_or<std::string>(a, "system_prompt", c.agent.system_prompt, "agent");
        if (!j.contains("user_proxy")) throw ConfigError("run config: \"user_proxy\" is required for llm_simulated runs");
        c.user_proxy = gateway_config_from_json(j["user_proxy"], "SELFSCORE_API_KEY_USER_PROXY", kActorTemperature);
    }

    f.corpus = resolve(base_dir, value_or<std::string>(j, "corpus", f.corpus.string(), "run config"));
    if (j.contains("split")) f.split = resolve(base_dir, value_or<std::string>(j, "split", "", "run config"));
    if (j.contains("min_upvotes")) f.min_upvotes = value_or<std::int64_t>(j, "min_upvotes", 0, "run config");
    if (j.contains("limit")) f.limit = value_or<std::size_t>(j, "limit", 0, "run config");
    f.runs_dir = resolve(base_dir, value_or<std::string>(j, "runs_dir", f.runs_dir.string(), "run config"));
    if (j.contains("templates_dir")) {
        f.templates_dir = resolve(base_dir, value_or<std::string>(j, "templates_dir", "", "run config"));
        c.judge.templates = TemplateSet::load(*f.templates_dir);
        c.complexity_judge.templates = c.judge.templates;
        c.actor_templates = ActorTemplates::load(*f.templates_dir);
    }
    if (c.agent.use_rag && !f.split) throw ConfigError("run config: RAG agents need a \"split\" file for the RAG pool");
    c.validate();
    return f;
}

RunFile load_run_file(const std::filesystem::path& path) {
    return parse_run_file(read_text_file(path), path.parent_path());
}

Json to_json(const RunFile& f) {
    const RunConfig& c = f.run;
    Json j;
    j["max_turns"] = c.max_turns;
    j["proxy_mode"] = to_string(c.proxy_mode);
    j["parallel_interactions"] = c.parallel_interactions;
    j["seed"] = c.seed;
    j["corpus"] = f.corpus.string();
    j["split"] = f.split ? Json(f.split->string()) : Json(nullptr);
    j["min_upvotes"] = f.min_upvotes ? Json(*f.min_upvotes) : Json(nullptr);
    j["limit"] = f.limit ? Json(*f.limit) : Json(nullptr);
    j["runs_dir"] = f.runs_dir.string();
    j["templates_dir"] = f.templates_dir ? Json(f.templates_dir->string()) : Json(nullptr);
    j["weights"] = to_json(c.weights);
    j["cost_model"] = c.cost_model ? to_json(*c.cost_model) : Json(nullptr);
    j["clamp_quality"] = c.clamp_quality;
    if (c.proxy_mode == UserProxyMode::llm_simulated) {
        Json a = to_json(c.agent.gateway);
        a["use_rag"] = c.agent.use_rag;
        a["rag_top_k"] = c.agent.rag_top_k;
        a["system_prompt"] = c.agent.system_prompt;
        j["agent"] = std::move(a);
        j["user_proxy"] = to_json(c.user_proxy);
    }
    Json judge = to_json(c.judge.gateway);
    judge["parse_retries"] = c.judge.parse_retries;
    j["judge"] = std::move(judge);
    Json cj = to_json(c.complexity_judge.gateway);
    cj["parse_retries"] = c.complexity_judge.parse_retries;
    j["complexity_judge"] = std::move(cj);
    return j;
}

IngestFile parse_ingest_file(std::string_view json_text, const std::filesystem::path& base_dir) {
    const Json j = parse_document(json_text, "ingest config");
    check_keys(j, "ingest config",
               {"posts", "out_dir", "min_upvotes", "rag_min_upvotes", "seed", "extract", "parallelism", "judge"});
    IngestFile f;
    if (j.contains("posts")) f.posts = resolve(base_dir, value_or<std::string>(j, "posts", "", "ingest config"));
    f.out_dir = resolve(base_dir, value_or<std::string>(j, "out_dir", f.out_dir.string(), "ingest config"));
    f.min_upvotes = value_or<std::int64_t>(j, "min_upvotes", f.min_upvotes, "ingest config");
    if (j.contains("rag_min_upvotes")) {
        f.rag_min_upvotes = value_or<std::int64_t>(j, "rag_min_upvotes", 0, "ingest config");
    }
    f.seed = value_or<std::uint64_t>(j, "seed", f.seed, "ingest config");
    f.extract = value_or<bool>(j, "extract", f.extract, "ingest config");
    f.parallelism = value_or<int>(j, "parallelism", f.parallelism, "ingest config");
    if (j.contains("judge")) f.judge = gateway_config_from_json(j["judge"], "SELFSCORE_API_KEY_JUDGE", kJudgeTemperature);
    return f;
}

IngestFile load_ingest_file(const std::filesystem::path& path) {
    return parse_ingest_file(read_text_file(path), path.parent_path());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write to " + path.string() + " failed");
}

} // namespace selfscore
