#pragma once

#include "selfscore/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>

namespace selfscore {

struct WeightVector {
    double critical = 0.5;
    double error = 0.4;
    double topic = 0.1;

    /// Throws ConfigError unless all weights are >= 0 and sum to 1 (1e-12).
    void validate() const;
    bool operator==(const WeightVector&) const = default;
};

struct UniformPrice {
    double per_token = 0.0;
    bool operator==(const UniformPrice&) const = default;
};
struct SplitPrice {
    double input = 0.0;
    double output = 0.0;
    bool operator==(const SplitPrice&) const = default;
};
struct PerTurnPrice {
    double flat = 0.0;
    bool operator==(const PerTurnPrice&) const = default;
};

struct CostModel {
    std::variant<UniformPrice, SplitPrice, PerTurnPrice> price;
    std::string currency = "USD";

    void validate() const;
    bool operator==(const CostModel&) const = default;
};

/// Parses "uniform:P", "split:IN,OUT" or "per_turn:FLAT".
CostModel parse_cost_model(std::string_view spec);

struct InteractionScore {
    double weighted_complexity = 0.0;
    double avg_user_helpfulness = 0.0;
    double avg_llm_helpfulness = 0.0;
    double avg_quality = 0.0;
    double final_score = 0.0;
    double total_cost = 0.0;

    bool operator==(const InteractionScore&) const = default;
};

double weighted_complexity(const ComplexityAssessment& c, const WeightVector& w = {});
double average_helpfulness(std::span<const int> scores);
/// avg_llm / avg_user. Throws PreconditionError when avg_user < 1.
double quality(double avg_llm, double avg_user);
double turn_quality(int agent_help, int user_help);
double final_score(double wc, double q);
double turn_cost(const CostModel& model, std::int64_t input_tokens, std::int64_t output_tokens);

struct ScoringOptions {
    WeightVector weights;
    std::optional<CostModel> cost_model;
    /// Caps the quality ratio at 10 so the final score stays within 100.
    bool clamp_quality = false;

    bool operator==(const ScoringOptions&) const = default;
};

/// Applies every formula to one interaction's stored data. The three spans
/// are per turn and must have equal, non-zero length.
InteractionScore score_interaction(const ComplexityAssessment& complexity, std::span<const int> user_help,
                                   std::span<const int> agent_help, std::span<const TokenUsage> tokens,
                                   const ScoringOptions& options = {});

} // namespace selfscore
