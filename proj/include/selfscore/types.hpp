#pragma once

#include <cstdint>

namespace selfscore {

/// Judge ratings of a problem's three complexity criteria, each 1..10.
struct ComplexityAssessment {
    int critical_thinking = 1;
    int error_handling = 1;
    int topic_knowledge = 1;

    bool operator==(const ComplexityAssessment&) const = default;
};

enum class Subject { user, agent };

struct HelpfulnessScore {
    int value = 1;
    Subject subject = Subject::user;
    int turn_index = 1;
};

struct TokenUsage {
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
};

inline constexpr int kMinRating = 1;
inline constexpr int kMaxRating = 10;

constexpr bool rating_in_range(int v) noexcept { return v >= kMinRating && v <= kMaxRating; }

} // namespace selfscore
