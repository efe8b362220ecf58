#pragma once

#include "selfscore/actors.hpp"
#include "selfscore/assessor.hpp"
#include "selfscore/ingest.hpp"
#include "selfscore/rag_index.hpp"
#include "selfscore/scoring.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace selfscore {

struct TurnRecord {
    int turn_index = 1;
    std::string user_message;
    std::string agent_message;
    int user_helpfulness = 1;
    int agent_helpfulness = 1;
    double turn_quality = 1.0;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    std::optional<double> turn_cost; // set when a cost model is configured
    bool solved_after = false;

    bool operator==(const TurnRecord&) const = default;
};

enum class Termination { solved, max_turns, failed };

std::string_view to_string(Termination t) noexcept;
Termination termination_from_string(std::string_view s);

struct InteractionResult {
    std::int64_t entry_id = 0;
    std::optional<ComplexityAssessment> complexity; // absent only when failed early
    std::vector<TurnRecord> turns;
    std::optional<InteractionScore> score;          // absent when failed
    Termination terminated_by = Termination::failed;
    std::string run_label;
    std::string error;                              // diagnostic for failed interactions
    ScoringOptions scoring;                         // options the score was computed with

    bool operator==(const InteractionResult&) const = default;
};

struct RunConfig {
    int max_turns = 50;
    AgentConfig agent;
    UserProxyMode proxy_mode = UserProxyMode::llm_simulated;
    GatewayConfig user_proxy;
    JudgeConfig judge;
    JudgeConfig complexity_judge;
    std::optional<CostModel> cost_model;
    WeightVector weights;
    bool clamp_quality = false;
    int parallel_interactions = 4;
    std::uint64_t seed = 0;
    ActorTemplates actor_templates = ActorTemplates::defaults();

    void validate() const;
    ScoringOptions scoring() const { return {weights, cost_model, clamp_quality}; }
};

/// Gateways an interaction talks to. `user_proxy` may be null in
/// dataset_replay mode; `rag` is required when the agent uses RAG.
struct Backends {
    Gateway* agent = nullptr;
    Gateway* user_proxy = nullptr;
    Gateway* judge = nullptr;
    Gateway* complexity_judge = nullptr;
    const RagIndex* rag = nullptr;
};

/// "<agent>_<complexity judge>_<eval judge>". Underscores inside model ids
/// become '-' so the label always splits into exactly three parts.
std::string make_run_label(std::string_view agent_model, std::string_view complexity_judge_model,
                           std::string_view eval_judge_model);
/// Agent part is "human" for dataset replay and gains "+RAG" when retrieval is on.
std::string make_run_label(const RunConfig& config);

/// Plays one interaction to completion. Errors from gateways or judges end
/// it with Termination::failed and the turns completed so far; they are not
/// rethrown.
InteractionResult run_interaction(const RunConfig& config, const Backends& backends, const BenchmarkEntry& entry,
                                  std::string_view run_label);

/// Called once per finished interaction, from worker threads, serialized.
using ResultSink = std::function<void(const InteractionResult&)>;

/// Runs every entry with at most parallel_interactions in flight. Results
/// come back in pool order. Progress lines go to `progress` when non-null.
std::vector<InteractionResult> run_benchmark(const RunConfig& config, const Backends& backends,
                                             std::span<const BenchmarkEntry> eval_pool,
                                             const ResultSink& sink = {}, std::ostream* progress = nullptr);

/// Recomputes an interaction's score from its complexity and stored turns.
/// Throws PreconditionError when the per-turn data needed is missing.
InteractionScore rescore(const InteractionResult& result, const ScoringOptions& options);

} // namespace selfscore
