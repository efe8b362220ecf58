#include "scenario.hpp"

#include "selfscore/actors.hpp"
#include "selfscore/error.hpp"
#include "selfscore/kernels.hpp"
#include "selfscore/mock_gateway.hpp"
#include "selfscore/rag_index.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

using namespace selfscore;

namespace {

BenchmarkEntry doc(std::int64_t id, std::string title, std::string body, std::string answer) {
    BenchmarkEntry e;
    e.entry_id = id;
    e.title = std::move(title);
    e.question_body = std::move(body);
    e.accepted_answer = std::move(answer);
    return e;
}

MockRule echo_rule() {
    MockRule r;
    r.echo = true;
    r.repeat = true;
    return r;
}

} // namespace

TEST(Sanitize, Examples) {
    EXPECT_EQ(sanitize_output("Fix→it ✓"), "Fixit");
    EXPECT_EQ(sanitize_output("Plain ASCII text, 100% fine!"), "Plain ASCII text, 100% fine!");
    EXPECT_EQ(sanitize_output(""), "");
    EXPECT_EQ(sanitize_output("  a \n\n\t b  "), "a b");
    EXPECT_EQ(sanitize_output("caf\xc3\xa9 ok"), "caf ok");
    EXPECT_EQ(sanitize_output("bad \xff byte"), "bad byte");
}

TEST(Sanitize, CustomClassKeepsLatin1) {
    const CharClass latin({{0x20, 0x7E}, {0xA0, 0xFF}});
    EXPECT_EQ(sanitize_output("café → bar", latin), "café bar");
}

TEST(Sanitize, Idempotent) {
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> byte(0, 255);
    for (int i = 0; i < 2000; ++i) {
        std::string s;
        for (int j = 0; j < 40; ++j) s.push_back(static_cast<char>(byte(rng)));
        const auto once = sanitize_output(s);
        EXPECT_EQ(sanitize_output(once), once);
        const CharClass wide({{0x20, 0x7E}, {0x80, 0x10FFFF}});
        const auto w = sanitize_output(s, wide);
        EXPECT_EQ(sanitize_output(w, wide), w);
    }
}

TEST(Tokenize, LowercasesAndTrimsPunctuation) {
    EXPECT_EQ(tokenize("Hello, World! (DNS) e-mail ..."), (std::vector<std::string>{"hello", "world", "dns", "e-mail"}));
    EXPECT_TRUE(tokenize("  \n ").empty());
}

TEST(RagIndex, EmptyPoolRejected) {
    EXPECT_THROW(RagIndex::build(std::vector<BenchmarkEntry>{}), PreconditionError);
}

TEST(RagIndex, SingleDocumentRankedFirst) {
    const std::vector<BenchmarkEntry> pool{doc(4, "Printer offline", "It jams", "Reset it")};
    const auto index = RagIndex::build(pool);
    // With one document every term has df = N, yet the +1 inside the log keeps idf positive.
    const auto hits = index.search("printer", 3);
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_EQ(hits[0].entry_id, 4);
}

TEST(RagIndex, AbsentTermGivesNoHits) {
    const std::vector<BenchmarkEntry> pool{doc(1, "Printer offline", "jam", "reset"),
                                           doc(2, "Network down", "cable", "replace")};
    const auto index = RagIndex::build(pool);
    EXPECT_TRUE(index.search("keyboard", 3).empty());
    for (double s : index.score_all("keyboard")) EXPECT_EQ(s, 0.0);
}

TEST(RagIndex, HandComputedBm25EqualLengths) {
    const std::vector<BenchmarkEntry> pool{doc(1, "Printer offline", "jam", "reset"),
                                           doc(2, "Network down", "cable", "replace")};
    const auto index = RagIndex::build(pool);
    // df = 1 of N = 2: idf = ln(1 + 1.5 / 1.5) = ln 2. tf = 1 and dl = avgdl,
    // so the saturation term is 2.2 / (1 + 1.2) = 1.
    const auto scores = index.score_all("network", false);
    EXPECT_NEAR(scores[0], 0.0, 1e-15);
    EXPECT_NEAR(scores[1], std::log(2.0), 1e-12);
    const auto hits = index.search("network", 3);
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_EQ(hits[0].entry_id, 2);
}

TEST(RagIndex, HandComputedBm25LengthNormalised) {
    const std::vector<BenchmarkEntry> pool{doc(1, "Printer offline", "jam", "reset"),
                                           doc(2, "Network down", "cable unplugged again", "replace it")};
    const auto index = RagIndex::build(pool);
    const double avgdl = (4.0 + 7.0) / 2.0;
    const double expected = std::log(2.0) * 2.2 / (1.0 + 1.2 * (0.25 + 0.75 * 7.0 / avgdl));
    EXPECT_NEAR(index.score_all("network")[1], expected, 1e-12);
    // Title-only match ranks B above A.
    const auto hits = index.search("Network printer down", 2);
    ASSERT_EQ(hits.size(), 2u);
    EXPECT_EQ(hits[0].entry_id, 2);
}

TEST(RagIndex, TiesGoToLowerId) {
    const std::vector<BenchmarkEntry> pool{doc(9, "disk full", "x", "y"), doc(3, "disk full", "x", "y")};
    const auto hits = RagIndex::build(pool).search("disk", 2);
    ASSERT_EQ(hits.size(), 2u);
    EXPECT_EQ(hits[0].entry_id, 3);
    EXPECT_EQ(hits[1].entry_id, 9);
}

TEST(Bm25Kernel, ParallelMatchesSerial) {
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> word(0, 300), len(5, 200);
    std::vector<BenchmarkEntry> pool;
    for (int i = 0; i < 2000; ++i) {
        std::string text;
        for (int j = len(rng); j > 0; --j) text += "w" + std::to_string(word(rng)) + " ";
        pool.push_back(doc(i + 1, "t", text, "a"));
    }
    const auto index = RagIndex::build(pool);
    for (int q = 0; q < 20; ++q) {
        const std::string query = "w" + std::to_string(word(rng)) + " w" + std::to_string(word(rng)) + " t";
        const auto s = index.score_all(query, false);
        const auto p = index.score_all(query, true);
        ASSERT_EQ(s.size(), p.size());
        for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(s[i], p[i]);
    }
}

TEST(Agent, SystemPromptFirstWithoutRag) {
    auto gw = make_mock({echo_rule()});
    AgentConfig cfg;
    const std::vector<ChatMessage> history{{Role::user, "first"}, {Role::assistant, "reply"}};
    const auto r = agent_respond(cfg, *gw, nullptr, history, "It still fails");
    EXPECT_EQ(r.text, "It still fails");
    const auto sent = gw->captured().at(0);
    ASSERT_EQ(sent.size(), 4u);
    EXPECT_EQ(sent[0].role, Role::system);
    EXPECT_EQ(sent[0].content,
              "A user is having a problem. Respond with simple and helpful instructions most likely to guide the user "
              "to a solution. Only provide one solution at a time. Never give instructions to contact external or "
              "professional services. Never suggest contacting external or professional services.");
    EXPECT_TRUE(sent[0].content.ends_with("Never suggest contacting external or professional services."));
    EXPECT_EQ(sent[1], history[0]);
    EXPECT_EQ(sent[2], history[1]);
    EXPECT_EQ(sent[3], (ChatMessage{Role::user, "It still fails"}));
}

TEST(Agent, RagSendsContextAndNoSystemMessage) {
    const std::vector<BenchmarkEntry> pool{doc(1, "Printer offline", "jam", "reset the spooler"),
                                           doc(2, "Network down", "cable", "replace")};
    const auto index = RagIndex::build(pool);
    auto gw = make_mock({{std::nullopt, "Restart the print spooler."}});
    AgentConfig cfg;
    cfg.use_rag = true;
    cfg.rag_top_k = 1;
    agent_respond(cfg, *gw, &index, {}, "My printer is offline");
    const auto sent = gw->captured().at(0);
    for (const auto& m : sent) EXPECT_NE(m.role, Role::system);
    ASSERT_EQ(sent.size(), 2u);
    EXPECT_NE(sent[0].content.find("reset the spooler"), std::string::npos);
    EXPECT_EQ(sent[0].content.find("replace"), std::string::npos);
    EXPECT_EQ(sent[1].content, "My printer is offline");
    EXPECT_THROW(agent_respond(cfg, *gw, nullptr, {}, "x"), PreconditionError);
}

TEST(Agent, RetrievalNeverLeavesTheRagPool) {
    std::vector<BenchmarkEntry> all;
    for (int i = 1; i <= 40; ++i) all.push_back(doc(i, "problem " + std::to_string(i), "disk printer network", "fix"));
    const auto split = split_pool(all, 5);
    const auto index = RagIndex::build(split.rag_pool);
    for (const auto& e : split.eval_pool) {
        EXPECT_FALSE(index.contains(e.entry_id));
        for (const auto& h : index.search(e.title + " disk", 5)) EXPECT_FALSE(
            std::any_of(split.eval_pool.begin(), split.eval_pool.end(),
                        [&](const BenchmarkEntry& x) { return x.entry_id == h.entry_id; }));
    }
}

TEST(Agent, SanitizesAndReportsTokens) {
    auto gw = make_mock({{std::nullopt, "Reboot → then check ✓", false, false, 42, 7}});
    const auto r = agent_respond(AgentConfig{}, *gw, nullptr, {}, "help");
    EXPECT_EQ(r.text, "Reboot then check");
    EXPECT_EQ(r.input_tokens, 42);
    EXPECT_EQ(r.output_tokens, 7);
    EXPECT_THROW(agent_respond(AgentConfig{}, *gw, nullptr, {}, ""), PreconditionError);
}

TEST(Agent, Stateless) {
    MockRule r;
    r.reply = "same";
    r.repeat = true;
    auto gw = make_mock({r});
    const std::vector<ChatMessage> h{{Role::user, "q"}, {Role::assistant, "a"}};
    const auto a = agent_respond(AgentConfig{}, *gw, nullptr, h, "next");
    const auto b = agent_respond(AgentConfig{}, *gw, nullptr, h, "next");
    EXPECT_EQ(a.text, b.text);
    EXPECT_EQ(gw->captured()[0], gw->captured()[1]);
}

TEST(UserProxy, InitialQuestionIsSummary) {
    auto e = selfscore::testing::sample_entry(1);
    e.question_summary = "Laptop won't boot";
    EXPECT_EQ(user_initial_question(e), "Laptop won't boot");
    e.underlying_problem.clear();
    EXPECT_THROW(user_initial_question(e), PreconditionError);
}

TEST(UserProxy, SimulatedFollowUp) {
    auto gw = make_mock({{std::nullopt, "  I tried that; same error.\n"}});
    const auto entry = selfscore::testing::sample_entry(1);
    const std::vector<ChatMessage> h{{Role::user, "q"}, {Role::assistant, "Flush the DNS cache."}};
    EXPECT_EQ(user_follow_up(UserProxyMode::llm_simulated, gw.get(), entry, h), "I tried that; same error.");
    const auto prompt = gw->captured().at(0).at(0).content;
    EXPECT_NE(prompt.find(entry.underlying_problem), std::string::npos);
    EXPECT_NE(prompt.find("Never solve the problem yourself"), std::string::npos);
    EXPECT_NE(prompt.find("Flush the DNS cache."), std::string::npos);
}

TEST(UserProxy, ReplayAcknowledges) {
    const std::vector<ChatMessage> h{{Role::user, "q"}, {Role::assistant, "answer"}};
    EXPECT_EQ(user_follow_up(UserProxyMode::dataset_replay, nullptr, selfscore::testing::sample_entry(1), h),
              kReplayAcknowledgment);
}

TEST(UserProxy, HistoryMustEndWithAgent) {
    auto gw = make_mock({{std::nullopt, "x"}});
    const std::vector<ChatMessage> h{{Role::user, "q"}};
    EXPECT_THROW(user_follow_up(UserProxyMode::llm_simulated, gw.get(), selfscore::testing::sample_entry(1), h),
                 PreconditionError);
    EXPECT_THROW(user_follow_up(UserProxyMode::llm_simulated, gw.get(), selfscore::testing::sample_entry(1), {}),
                 PreconditionError);
}

TEST(ActorTemplates, LoadOverrides) {
    selfscore::testing::TempDir dir;
    std::ofstream(dir.path() / "persona.txt") << "Custom persona {{problem}}";
    const auto t = ActorTemplates::load(dir.path());
    EXPECT_EQ(t.persona, "Custom persona {{problem}}");
    EXPECT_EQ(t.rag_context, ActorTemplates::defaults().rag_context);
}
