#include "scenario.hpp"

#include "selfscore/error.hpp"
#include "selfscore/orchestrator.hpp"
#include "selfscore/serialization.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

using namespace selfscore;
using selfscore::testing::mock_run_config;
using selfscore::testing::sample_entry;

TEST(RunInteraction, TwoTurnTrace) {
    auto suite = selfscore::testing::two_turn_suite();
    const auto r = run_interaction(mock_run_config(), suite.backends(), sample_entry(1), "lbl");
    ASSERT_EQ(r.terminated_by, Termination::solved) << r.error;
    EXPECT_EQ(r.complexity, (ComplexityAssessment{6, 5, 3}));
    ASSERT_EQ(r.turns.size(), 2u);
    EXPECT_EQ(r.turns[0].user_helpfulness, 8);
    EXPECT_EQ(r.turns[0].agent_helpfulness, 6);
    EXPECT_EQ(r.turns[0].turn_quality, 0.75);
    EXPECT_FALSE(r.turns[0].solved_after);
    EXPECT_EQ(r.turns[0].input_tokens, 120);
    EXPECT_EQ(r.turns[0].output_tokens, 30);
    EXPECT_EQ(r.turns[1].user_helpfulness, 8);
    EXPECT_EQ(r.turns[1].agent_helpfulness, 8);
    EXPECT_EQ(r.turns[1].turn_quality, 1.0);
    EXPECT_TRUE(r.turns[1].solved_after);
    EXPECT_EQ(r.turns[0].user_message, sample_entry(1).question_summary);
    EXPECT_EQ(r.turns[1].user_message, "It lists 10.0.0.53, which is not our router.");
    ASSERT_TRUE(r.score.has_value());
    EXPECT_NEAR(r.score->weighted_complexity, 5.3, 1e-12);
    EXPECT_EQ(r.score->avg_user_helpfulness, 8.0);
    EXPECT_EQ(r.score->avg_llm_helpfulness, 7.0);
    EXPECT_EQ(r.score->avg_quality, 0.875);
    EXPECT_EQ(r.score->final_score, 30.875);
    EXPECT_EQ(r.run_label, "lbl");
    EXPECT_TRUE(r.error.empty());
    EXPECT_EQ(suite.judge->remaining(), 0u);
    EXPECT_EQ(suite.agent->remaining(), 0u);
}

TEST(RunInteraction, HistoryOwnershipAndOrdering) {
    auto suite = selfscore::testing::two_turn_suite();
    const auto entry = sample_entry(1);
    run_interaction(mock_run_config(), suite.backends(), entry, "lbl");

    const auto agent_calls = suite.agent->captured();
    ASSERT_EQ(agent_calls.size(), 2u);
    ASSERT_EQ(agent_calls[0].size(), 2u);
    EXPECT_EQ(agent_calls[0][0].role, Role::system);
    EXPECT_EQ(agent_calls[0][1], (ChatMessage{Role::user, entry.question_summary}));
    const std::vector<ChatMessage> second{
        agent_calls[0][0],
        {Role::user, entry.question_summary},
        {Role::assistant, "Open a terminal and run ipconfig /all. Which DNS servers are listed?"},
        {Role::user, "It lists 10.0.0.53, which is not our router."}};
    EXPECT_EQ(agent_calls[1], second);

    // Complexity happens on its own judge before anything else.
    ASSERT_EQ(suite.complexity_judge->captured().size(), 1u);
    EXPECT_NE(suite.complexity_judge->captured()[0][0].content.find(entry.question_summary), std::string::npos);

    const auto judge_calls = suite.judge->captured();
    ASSERT_EQ(judge_calls.size(), 6u);
    const char* order[] = {selfscore::testing::kMatchUserFirst, selfscore::testing::kMatchAgent,
                           selfscore::testing::kMatchSolved,    selfscore::testing::kMatchUserLater,
                           selfscore::testing::kMatchAgent,     selfscore::testing::kMatchSolved};
    for (std::size_t i = 0; i < 6; ++i) {
        EXPECT_NE(judge_calls[i][0].content.find(order[i]), std::string::npos) << i;
    }
    // The solved check of turn 2 sees the whole transcript and the latest reply.
    const auto& solved2 = judge_calls[5][0].content;
    EXPECT_NE(solved2.find("User: " + entry.question_summary + "\nAgent: Open a terminal"), std::string::npos);
    EXPECT_NE(solved2.find("Set the adapter to obtain the DNS server address automatically."), std::string::npos);
    EXPECT_NE(solved2.find(entry.underlying_problem), std::string::npos);
    EXPECT_EQ(solved2.find(entry.accepted_answer), std::string::npos);

    // The user proxy is asked about the agent's first instruction.
    const auto proxy_calls = suite.user_proxy->captured();
    ASSERT_EQ(proxy_calls.size(), 1u);
    EXPECT_NE(proxy_calls[0][0].content.find("Which DNS servers are listed?"), std::string::npos);
}

TEST(RunInteraction, LoopGuard) {
    auto suite = selfscore::testing::never_solving_suite();
    const auto r = run_interaction(mock_run_config(3), suite.backends(), sample_entry(1), "lbl");
    EXPECT_EQ(r.terminated_by, Termination::max_turns);
    ASSERT_EQ(r.turns.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(r.turns[i].turn_index, static_cast<int>(i + 1));
        EXPECT_FALSE(r.turns[i].solved_after);
    }
    EXPECT_EQ(suite.agent->captured().size(), 3u);
    EXPECT_EQ(suite.user_proxy->captured().size(), 2u);
}

TEST(RunInteraction, DefaultMaxTurnsIsFifty) {
    EXPECT_EQ(RunConfig{}.max_turns, 50);
    auto suite = selfscore::testing::never_solving_suite();
    const auto r = run_interaction(mock_run_config(), suite.backends(), sample_entry(1), "lbl");
    EXPECT_EQ(r.turns.size(), 50u);
}

TEST(RunInteraction, PerTurnCost) {
    auto suite = selfscore::testing::never_solving_suite();
    auto cfg = mock_run_config(7);
    cfg.cost_model = CostModel{PerTurnPrice{0.01}};
    const auto r = run_interaction(cfg, suite.backends(), sample_entry(1), "lbl");
    ASSERT_EQ(r.turns.size(), 7u);
    for (const auto& t : r.turns) EXPECT_EQ(t.turn_cost, 0.01);
    EXPECT_NEAR(r.score->total_cost, 0.07, 1e-12);
}

TEST(RunInteraction, TokenCost) {
    auto suite = selfscore::testing::two_turn_suite();
    auto cfg = mock_run_config();
    cfg.cost_model = CostModel{SplitPrice{0.00003, 0.00006}};
    const auto r = run_interaction(cfg, suite.backends(), sample_entry(1), "lbl");
    EXPECT_NEAR(*r.turns[0].turn_cost, 120 * 0.00003 + 30 * 0.00006, 1e-15);
    EXPECT_NEAR(r.score->total_cost, (120 + 180) * 0.00003 + (30 + 25) * 0.00006, 1e-15);
}

TEST(RunInteraction, FailureKeepsPartialTurns) {
    auto suite = selfscore::testing::two_turn_suite();
    // Drop the last solved reply: turn 2's solved check exhausts the script.
    suite.judge = make_mock({{selfscore::testing::kMatchUserFirst, "{\"score\": 8}"},
                             {selfscore::testing::kMatchAgent, "{\"score\": 6}"},
                             {selfscore::testing::kMatchSolved, "no"},
                             {selfscore::testing::kMatchUserLater, "{\"score\": 8}"},
                             {selfscore::testing::kMatchAgent, "{\"score\": 8}"}});
    const auto r = run_interaction(mock_run_config(), suite.backends(), sample_entry(1), "lbl");
    EXPECT_EQ(r.terminated_by, Termination::failed);
    EXPECT_EQ(r.turns.size(), 1u);
    EXPECT_FALSE(r.score.has_value());
    EXPECT_TRUE(r.complexity.has_value());
    EXPECT_NE(r.error.find("no script entry"), std::string::npos);
}

TEST(RunInteraction, UnparseableJudgeFailsInteraction) {
    auto suite = selfscore::testing::two_turn_suite();
    suite.complexity_judge = make_mock({{std::nullopt, "hard", false, true}});
    const auto r = run_interaction(mock_run_config(), suite.backends(), sample_entry(1), "lbl");
    EXPECT_EQ(r.terminated_by, Termination::failed);
    EXPECT_FALSE(r.complexity.has_value());
    EXPECT_TRUE(r.turns.empty());
    EXPECT_EQ(suite.complexity_judge->captured().size(), 3u);
}

TEST(RunInteraction, Preconditions) {
    auto suite = selfscore::testing::two_turn_suite();
    auto entry = sample_entry(1);
    entry.question_summary.clear();
    EXPECT_THROW(run_interaction(mock_run_config(), suite.backends(), entry, "l"), PreconditionError);
    Backends none;
    EXPECT_THROW(run_interaction(mock_run_config(), none, sample_entry(1), "l"), PreconditionError);
}

TEST(RunInteraction, DatasetReplay) {
    auto cfg = mock_run_config();
    cfg.proxy_mode = UserProxyMode::dataset_replay;
    auto judge = make_mock({{selfscore::testing::kMatchUserFirst, "{\"score\": 7}"},
                            {selfscore::testing::kMatchAgent, "{\"score\": 9}"},
                            {selfscore::testing::kMatchSolved, "yes"}});
    auto cj = make_mock({{std::nullopt, R"({"critical_thinking":4,"error_handling":4,"topic_knowledge":4})"}});
    const auto entry = sample_entry(3);
    const auto r = run_interaction(cfg, Backends{nullptr, nullptr, judge.get(), cj.get(), nullptr}, entry, "h");
    ASSERT_EQ(r.terminated_by, Termination::solved) << r.error;
    ASSERT_EQ(r.turns.size(), 1u);
    EXPECT_EQ(r.turns[0].agent_message, entry.accepted_answer);
    EXPECT_EQ(r.turns[0].input_tokens, 0);
    EXPECT_NEAR(r.score->final_score, (4.0 + 9.0 / 7.0) / 2.0 * 10.0, 1e-12);

    auto judge2 = make_mock({{selfscore::testing::kMatchUserFirst, "{\"score\": 7}"},
                             {selfscore::testing::kMatchAgent, "{\"score\": 9}"},
                             {selfscore::testing::kMatchSolved, "no"}});
    auto cj2 = make_mock({{std::nullopt, R"({"critical_thinking":4,"error_handling":4,"topic_knowledge":4})"}});
    const auto r2 = run_interaction(cfg, Backends{nullptr, nullptr, judge2.get(), cj2.get(), nullptr}, entry, "h");
    EXPECT_EQ(r2.terminated_by, Termination::max_turns);
    EXPECT_EQ(r2.turns.size(), 1u);
}

TEST(RunInteraction, RagAgentGetsNoSystemPrompt) {
    auto suite = selfscore::testing::two_turn_suite();
    std::vector<BenchmarkEntry> pool{sample_entry(100)};
    pool[0].accepted_answer = "Reset the DNS resolver configuration.";
    const auto index = RagIndex::build(pool);
    auto cfg = mock_run_config();
    cfg.agent.use_rag = true;
    auto backends = suite.backends();
    backends.rag = &index;
    const auto r = run_interaction(cfg, backends, sample_entry(1), "lbl");
    ASSERT_EQ(r.terminated_by, Termination::solved) << r.error;
    for (const auto& call : suite.agent->captured()) {
        for (const auto& m : call) EXPECT_NE(m.role, Role::system);
    }
}

TEST(RunLabel, Format) {
    EXPECT_EQ(make_run_label("mixtral-8x7b", "gpt-4-1106-preview", "gpt-4-1106-preview"),
              "mixtral-8x7b_gpt-4-1106-preview_gpt-4-1106-preview");
    EXPECT_EQ(make_run_label("my_model", "j_1", "j2"), "my-model_j-1_j2");
    EXPECT_THROW(make_run_label("", "a", "b"), ConfigError);

    auto cfg = mock_run_config();
    EXPECT_EQ(make_run_label(cfg), "mixtral-8x7b_gpt-4-1106-preview_gpt-4-1106-preview");
    cfg.agent.use_rag = true;
    EXPECT_EQ(make_run_label(cfg), "mixtral-8x7b+RAG_gpt-4-1106-preview_gpt-4-1106-preview");
    cfg.proxy_mode = UserProxyMode::dataset_replay;
    EXPECT_EQ(make_run_label(cfg), "human_gpt-4-1106-preview_gpt-4-1106-preview");
    cfg.complexity_judge.gateway.model_id = "mixtral-8x7b";
    const auto label = make_run_label(cfg);
    EXPECT_TRUE(label.starts_with("human_"));
    EXPECT_EQ(std::count(label.begin(), label.end(), '_'), 2);
}

TEST(RunBenchmark, CompleteAndOrderedUnderParallelism) {
    auto suite = selfscore::testing::never_solving_suite();
    auto cfg = mock_run_config(2);
    cfg.parallel_interactions = 2;
    std::vector<BenchmarkEntry> pool{sample_entry(1), sample_entry(2), sample_entry(3)};
    std::set<std::int64_t> sunk;
    std::ostringstream progress;
    const auto results = run_benchmark(cfg, suite.backends(), pool,
                                       [&](const InteractionResult& r) { sunk.insert(r.entry_id); }, &progress);
    ASSERT_EQ(results.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(results[i].entry_id, pool[i].entry_id);
        EXPECT_EQ(results[i].run_label, "mixtral-8x7b_gpt-4-1106-preview_gpt-4-1106-preview");
    }
    EXPECT_EQ(sunk.size(), 3u);
    EXPECT_NE(progress.str().find("[3/3]"), std::string::npos);
}

TEST(RunBenchmark, ManyEntriesManyWorkers) {
    auto suite = selfscore::testing::never_solving_suite(4, 7);
    auto cfg = mock_run_config(5);
    cfg.parallel_interactions = 8;
    std::vector<BenchmarkEntry> pool;
    for (int i = 1; i <= 60; ++i) pool.push_back(sample_entry(i));
    const auto results = run_benchmark(cfg, suite.backends(), pool);
    ASSERT_EQ(results.size(), 60u);
    for (std::size_t i = 0; i < 60; ++i) {
        EXPECT_EQ(results[i].entry_id, static_cast<std::int64_t>(i + 1));
        EXPECT_EQ(results[i].turns.size(), 5u);
        EXPECT_EQ(results[i].terminated_by, Termination::max_turns);
    }
}

TEST(RunBenchmark, FailuresDoNotAbortRun) {
    auto suite = selfscore::testing::never_solving_suite();
    auto cfg = mock_run_config(1);
    std::vector<BenchmarkEntry> pool{sample_entry(1), sample_entry(2)};
    pool[1].underlying_problem = "special";
    // The solved check for entry 2 finds no matching rule.
    suite.judge = make_mock({{selfscore::testing::kMatchUserFirst, "{\"score\": 5}", false, true},
                             {selfscore::testing::kMatchAgent, "{\"score\": 5}", false, true},
                             {"The laptop uses a stale static DNS server.", "no", false, true}});
    const auto results = run_benchmark(cfg, suite.backends(), pool);
    ASSERT_EQ(results.size(), 2u);
    EXPECT_EQ(results[0].terminated_by, Termination::max_turns);
    EXPECT_EQ(results[1].terminated_by, Termination::failed);
}

TEST(RunBenchmark, SinkErrorsPropagate) {
    auto suite = selfscore::testing::never_solving_suite();
    std::vector<BenchmarkEntry> pool{sample_entry(1)};
    EXPECT_THROW(run_benchmark(mock_run_config(1), suite.backends(), pool,
                               [](const InteractionResult&) { throw IoError("disk full"); }),
                 IoError);
    EXPECT_THROW(run_benchmark(mock_run_config(1), suite.backends(), std::vector<BenchmarkEntry>{}), PreconditionError);
}

TEST(RunBenchmark, ByteIdenticalAcrossRuns) {
    std::string first;
    for (int run = 0; run < 5; ++run) {
        auto suite = selfscore::testing::two_turn_suite();
        std::vector<BenchmarkEntry> pool{sample_entry(1)};
        const auto results = run_benchmark(mock_run_config(), suite.backends(), pool);
        const auto text = to_json(results[0]).dump();
        if (run == 0) first = text;
        EXPECT_EQ(text, first);
    }
}

TEST(Rescore, MatchesStoredScore) {
    auto suite = selfscore::testing::two_turn_suite();
    const auto r = run_interaction(mock_run_config(), suite.backends(), sample_entry(1), "lbl");
    EXPECT_EQ(rescore(r, r.scoring), *r.score);
    ScoringOptions other;
    other.weights = {0.1, 0.4, 0.5};
    EXPECT_NEAR(rescore(r, other).weighted_complexity, 4.1, 1e-12);
    InteractionResult empty;
    EXPECT_THROW(rescore(empty, other), PreconditionError);
}

TEST(RunConfig, Validation) {
    auto cfg = mock_run_config();
    cfg.max_turns = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = mock_run_config();
    cfg.weights = {0.5, 0.5, 0.5};
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = mock_run_config();
    cfg.parallel_interactions = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
}
