#include "selfscore/orchestrator.hpp"

#include "selfscore/error.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

namespace selfscore {
namespace {

std::string label_part(std::string_view model) {
    std::string s(model);
    std::replace(s.begin(), s.end(), '_', '-');
    return s;
}

// One interaction's mutable state: history plus the turns recorded so far.
class Interaction {
public:
    Interaction(const RunConfig& config, const Backends& backends, const BenchmarkEntry& entry)
        : config_(config), backends_(backends), entry_(entry) {}

    void run(InteractionResult& out) {
        out.complexity = assess_complexity(config_.complexity_judge, *backends_.complexity_judge,
                                           entry_.question_summary);
        std::string user_message = user_initial_question(entry_);
        for (int t = 1;; ++t) {
            const bool solved = play_turn(t, user_message, out);
            if (solved) {
                out.terminated_by = Termination::solved;
                return;
            }
            if (t >= config_.max_turns || config_.proxy_mode == UserProxyMode::dataset_replay) {
                out.terminated_by = Termination::max_turns;
                return;
            }
            user_message = user_follow_up(config_.proxy_mode, backends_.user_proxy, entry_, history_,
                                          config_.actor_templates);
        }
    }

private:
    bool play_turn(int t, const std::string& user_message, InteractionResult& out) {
        Gateway& judge = *backends_.judge;
        TurnRecord rec;
        rec.turn_index = t;
        rec.user_message = user_message;
        rec.user_helpfulness =
            assess_user_helpfulness(config_.judge, judge, history_, user_message, t == 1, t).value;

        if (config_.proxy_mode == UserProxyMode::dataset_replay) {
            rec.agent_message = entry_.accepted_answer;
        } else {
            AgentReply reply = agent_respond(config_.agent, *backends_.agent, backends_.rag, history_, user_message,
                                             config_.actor_templates);
            rec.agent_message = std::move(reply.text);
            rec.input_tokens = reply.input_tokens;
            rec.output_tokens = reply.output_tokens;
        }

        // The judges see the history including this turn's user message.
        std::vector<ChatMessage> seen = history_;
        seen.push_back({Role::user, user_message});
        rec.agent_helpfulness = assess_agent_helpfulness(config_.judge, judge, seen, rec.agent_message, t).value;
        rec.solved_after = check_solved(config_.judge, judge, entry_.underlying_problem, seen, rec.agent_message);
        if (config_.cost_model) rec.turn_cost = turn_cost(*config_.cost_model, rec.input_tokens, rec.output_tokens);
        rec.turn_quality = turn_quality(rec.agent_helpfulness, rec.user_helpfulness);

        history_ = std::move(seen);
        history_.push_back({Role::assistant, rec.agent_message});
        const bool solved = rec.solved_after;
        out.turns.push_back(std::move(rec));
        return solved;
    }

    const RunConfig& config_;
    const Backends& backends_;
    const BenchmarkEntry& entry_;
    std::vector<ChatMessage> history_;
};

} // namespace

std::string_view to_string(Termination t) noexcept {
    switch (t) {
    case Termination::solved: return "solved";
    case Termination::max_turns: return "max_turns";
    case Termination::failed: return "failed";
    }
    return "failed";
}

Termination termination_from_string(std::string_view s) {
    if (s == "solved") return Termination::solved;
    if (s == "max_turns") return Termination::max_turns;
    if (s == "failed") return Termination::failed;
    throw ConfigError("unknown termination '" + std::string(s) + "'");
}

void RunConfig::validate() const {
    if (max_turns < 1) throw ConfigError("max_turns must be >= 1");
    if (parallel_interactions < 1) throw ConfigError("parallel_interactions must be >= 1");
    if (proxy_mode == UserProxyMode::llm_simulated) agent.validate();
    judge.validate();
    complexity_judge.validate();
    weights.validate();
    if (cost_model) cost_model->validate();
}

std::string make_run_label(std::string_view agent_model, std::string_view complexity_judge_model,
                           std::string_view eval_judge_model) {
    if (agent_model.empty() || complexity_judge_model.empty() || eval_judge_model.empty()) {
        throw ConfigError("run label parts must be non-empty");
    }
    return label_part(agent_model) + "_" + label_part(complexity_judge_model) + "_" + label_part(eval_judge_model);
}

std::string make_run_label(const RunConfig& config) {
    std::string agent = config.proxy_mode == UserProxyMode::dataset_replay ? "human" : config.agent.gateway.model_id;
    if (config.proxy_mode != UserProxyMode::dataset_replay && config.agent.use_rag) agent += "+RAG";
    return make_run_label(agent, config.complexity_judge.gateway.model_id, config.judge.gateway.model_id);
}

InteractionResult run_interaction(const RunConfig& config, const Backends& backends, const BenchmarkEntry& entry,
                                  std::string_view run_label) {
    if (!entry.extracted()) {
        throw PreconditionError("entry " + std::to_string(entry.entry_id) + " has no extracted summary");
    }
    if (backends.judge == nullptr || backends.complexity_judge == nullptr) {
        throw PreconditionError("run_interaction: judge gateways are required");
    }
    if (config.proxy_mode == UserProxyMode::llm_simulated && (backends.agent == nullptr || backends.user_proxy == nullptr)) {
        throw PreconditionError("run_interaction: simulated runs need agent and user-proxy gateways");
    }
    InteractionResult out;
    out.entry_id = entry.entry_id;
    out.run_label = std::string(run_label);
    out.scoring = config.scoring();
    try {
        Interaction(config, backends, entry).run(out);
        out.score = rescore(out, out.scoring);
    } catch (const std::exception& e) {
        out.terminated_by = Termination::failed;
        out.score.reset();
        out.error = e.what();
    }
    return out;
}

std::vector<InteractionResult> run_benchmark(const RunConfig& config, const Backends& backends,
                                             std::span<const BenchmarkEntry> eval_pool, const ResultSink& sink,
                                             std::ostream* progress) {
    if (eval_pool.empty()) throw PreconditionError("run_benchmark: empty evaluation pool");
    config.validate();
    const std::string label = make_run_label(config);
    std::vector<InteractionResult> results(eval_pool.size());
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::size_t done = 0;
    std::exception_ptr first_error;

    auto worker = [&] {
        for (std::size_t i = next++; i < eval_pool.size(); i = next++) {
            try {
                results[i] = run_interaction(config, backends, eval_pool[i], label);
                std::lock_guard lock(mu);
                if (sink) sink(results[i]);
                ++done;
                if (progress != nullptr) {
                    const auto& r = results[i];
                    *progress << "[" << done << "/" << eval_pool.size() << "] entry " << r.entry_id << ": "
                              << to_string(r.terminated_by) << " after " << r.turns.size() << " turn(s)";
                    if (r.score) *progress << ", final score " << r.score->final_score;
                    if (!r.error.empty()) *progress << " (" << r.error << ")";
                    *progress << '\n';
                }
            } catch (...) {
                std::lock_guard lock(mu);
                if (!first_error) first_error = std::current_exception();
                next = eval_pool.size();
            }
        }
    };

    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config.parallel_interactions), eval_pool.size());
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
        worker();
    }
    if (first_error) std::rethrow_exception(first_error);
    return results;
}

InteractionScore rescore(const InteractionResult& result, const ScoringOptions& options) {
    if (!result.complexity) throw PreconditionError("rescore: record has no complexity assessment");
    if (result.turns.empty()) throw PreconditionError("rescore: record has no turns");
    std::vector<int> user;
    std::vector<int> agent;
    std::vector<TokenUsage> tokens;
    for (const auto& t : result.turns) {
        user.push_back(t.user_helpfulness);
        agent.push_back(t.agent_helpfulness);
        tokens.push_back({t.input_tokens, t.output_tokens});
    }
    return score_interaction(*result.complexity, user, agent, tokens, options);
}

} // namespace selfscore
