#include "selfscore/error.hpp"
#include "selfscore/scoring.hpp"

#include <gtest/gtest.h>

#include <random>
#include <vector>

using namespace selfscore;

namespace {
constexpr double kTol = 1e-9;
}

TEST(WeightedComplexity, HandValues) {
    EXPECT_NEAR(weighted_complexity({10, 10, 10}), 10.0, kTol);
    EXPECT_NEAR(weighted_complexity({6, 5, 3}), 5.3, kTol);
    EXPECT_NEAR(weighted_complexity({1, 1, 1}), 1.0, kTol);
    EXPECT_NEAR(weighted_complexity({6, 5, 3}, {0.1, 0.4, 0.5}), 4.1, kTol);
}

TEST(WeightedComplexity, RejectsInvalidWeights) {
    EXPECT_THROW(weighted_complexity({6, 5, 3}, {0.5, 0.5, 0.5}), ConfigError);
    EXPECT_THROW(weighted_complexity({6, 5, 3}, {1.2, -0.1, -0.1}), ConfigError);
    EXPECT_THROW(weighted_complexity({0, 5, 3}), PreconditionError);
    EXPECT_THROW(weighted_complexity({6, 11, 3}), PreconditionError);
}

TEST(WeightedComplexity, MonotoneInEachComponent) {
    for (int a = 1; a <= 10; ++a) {
        for (int b = 1; b <= 10; ++b) {
            for (int c = 1; c < 10; ++c) {
                EXPECT_LE(weighted_complexity({a, b, c}), weighted_complexity({a, b, c + 1}));
                EXPECT_LE(weighted_complexity({c, a, b}), weighted_complexity({c + 1, a, b}));
                EXPECT_LE(weighted_complexity({a, c, b}), weighted_complexity({a, c + 1, b}));
            }
        }
    }
}

TEST(AverageHelpfulness, Values) {
    const std::vector<int> eights{8, 8};
    const std::vector<int> mixed{6, 8};
    EXPECT_NEAR(average_helpfulness(eights), 8.0, kTol);
    EXPECT_NEAR(average_helpfulness(mixed), 7.0, kTol);
    EXPECT_THROW(average_helpfulness(std::vector<int>{}), PreconditionError);
    EXPECT_THROW(average_helpfulness(std::vector<int>{0, 5}), PreconditionError);
}

TEST(Quality, Values) {
    EXPECT_NEAR(quality(8, 8), 1.0, kTol);
    EXPECT_NEAR(quality(9, 3), 3.0, kTol);
    EXPECT_NEAR(quality(1, 10), 0.1, kTol);
    EXPECT_THROW(quality(5, 0.5), PreconditionError);
}

TEST(Quality, ScaleInvariant) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> v(1.0, 10.0), k(0.1, 5.0);
    for (int i = 0; i < 1000; ++i) {
        const double x = v(rng), y = v(rng), s = k(rng);
        if (s * y < 1.0) continue;
        EXPECT_NEAR(quality(s * x, s * y), quality(x, y), 1e-12);
    }
}

TEST(TurnQuality, Values) {
    EXPECT_NEAR(turn_quality(8, 8), 1.0, kTol);
    EXPECT_NEAR(turn_quality(10, 1), 10.0, kTol);
    EXPECT_NEAR(turn_quality(1, 10), 0.1, kTol);
    EXPECT_THROW(turn_quality(0, 5), PreconditionError);
    EXPECT_THROW(turn_quality(5, 11), PreconditionError);
}

TEST(FinalScore, Values) {
    EXPECT_NEAR(final_score(10, 10), 100.0, kTol);
    EXPECT_NEAR(final_score(5.3, 0.875), 30.875, kTol);
    EXPECT_NEAR(final_score(1, 0.1), 5.5, kTol);
    EXPECT_THROW(final_score(0.5, 1.0), PreconditionError);
    EXPECT_THROW(final_score(5.0, 0.0), PreconditionError);
}

TEST(FinalScore, PerfectHelpfulnessOnBothSidesGives55) {
    const std::vector<int> tens{10, 10, 10};
    const double q = quality(average_helpfulness(tens), average_helpfulness(tens));
    EXPECT_NEAR(final_score(weighted_complexity({10, 10, 10}), q), 55.0, kTol);
}

TEST(FinalScore, StrictlyIncreasing) {
    EXPECT_LT(final_score(5.0, 1.0), final_score(5.0 + 1e-6, 1.0));
    EXPECT_LT(final_score(5.0, 1.0), final_score(5.0, 1.0 + 1e-6));
}

TEST(TurnCost, ThreeCases) {
    EXPECT_NEAR(turn_cost({UniformPrice{0.000002}}, 1000, 500), 0.003, kTol);
    EXPECT_NEAR(turn_cost({SplitPrice{0.00003, 0.00006}}, 1000, 200), 0.042, kTol);
    EXPECT_NEAR(turn_cost({PerTurnPrice{0.01}}, 123456, 789), 0.01, kTol);
    EXPECT_THROW(turn_cost({UniformPrice{0.1}}, -1, 0), PreconditionError);
    EXPECT_THROW(turn_cost({UniformPrice{-0.1}}, 1, 0), ConfigError);
}

TEST(TurnCost, UniformEqualsSplitBitExact) {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::int64_t> tok(0, 200000);
    std::uniform_real_distribution<double> price(0.0, 1e-3);
    for (int i = 0; i < 10000; ++i) {
        const double p = price(rng);
        const auto in = tok(rng), out = tok(rng);
        EXPECT_EQ(turn_cost({UniformPrice{p}}, in, out), turn_cost({SplitPrice{p, p}}, in, out));
    }
}

TEST(ParseCostModel, Forms) {
    EXPECT_EQ(parse_cost_model("uniform:0.5").price, (CostModel{UniformPrice{0.5}}.price));
    EXPECT_EQ(parse_cost_model("split:0.1,0.2").price, (CostModel{SplitPrice{0.1, 0.2}}.price));
    EXPECT_EQ(parse_cost_model("per_turn:0.01").price, (CostModel{PerTurnPrice{0.01}}.price));
    EXPECT_THROW(parse_cost_model("flat:1"), ConfigError);
    EXPECT_THROW(parse_cost_model("split:1"), ConfigError);
    EXPECT_THROW(parse_cost_model("uniform:abc"), ConfigError);
}

TEST(ScoreInteraction, TwoTurnTrace) {
    const std::vector<int> user{8, 8}, agent{6, 8};
    const std::vector<TokenUsage> tokens{{120, 30}, {180, 25}};
    const auto s = score_interaction({6, 5, 3}, user, agent, tokens);
    EXPECT_NEAR(s.weighted_complexity, 5.3, kTol);
    EXPECT_NEAR(s.avg_user_helpfulness, 8.0, kTol);
    EXPECT_NEAR(s.avg_llm_helpfulness, 7.0, kTol);
    EXPECT_NEAR(s.avg_quality, 0.875, kTol);
    EXPECT_NEAR(s.final_score, 30.875, kTol);
    EXPECT_EQ(s.total_cost, 0.0);
}

TEST(ScoreInteraction, PerTurnCostMultipliesByTurns) {
    const std::vector<int> h(7, 5);
    const std::vector<TokenUsage> tokens(7, TokenUsage{100, 50});
    ScoringOptions opt;
    opt.cost_model = CostModel{PerTurnPrice{0.01}};
    EXPECT_NEAR(score_interaction({5, 5, 5}, h, h, tokens, opt).total_cost, 0.07, kTol);
}

TEST(ScoreInteraction, MaximumNeedsMaximalAgentAndMinimalUser) {
    const std::vector<int> user{1, 1}, agent{10, 10};
    const std::vector<TokenUsage> tokens(2);
    for (bool clamp : {false, true}) {
        ScoringOptions opt;
        opt.clamp_quality = clamp;
        const auto s = score_interaction({10, 10, 10}, user, agent, tokens, opt);
        EXPECT_NEAR(s.avg_quality, 10.0, kTol);
        EXPECT_NEAR(s.final_score, 100.0, kTol);
    }
}

TEST(ScoreInteraction, RejectsMismatchedSpans) {
    const std::vector<int> a{5, 5}, b{5};
    const std::vector<TokenUsage> t(2);
    EXPECT_THROW(score_interaction({5, 5, 5}, a, b, t), PreconditionError);
    EXPECT_THROW(score_interaction({5, 5, 5}, std::vector<int>{}, std::vector<int>{}, std::vector<TokenUsage>{}),
                 PreconditionError);
}

TEST(ScoreInteraction, Pure) {
    const std::vector<int> user{3, 7, 9}, agent{4, 6, 10};
    const std::vector<TokenUsage> tokens{{1, 2}, {3, 4}, {5, 6}};
    ScoringOptions opt;
    opt.cost_model = CostModel{SplitPrice{1e-5, 3e-5}};
    const auto first = score_interaction({7, 2, 9}, user, agent, tokens, opt);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(score_interaction({7, 2, 9}, user, agent, tokens, opt), first);
}
