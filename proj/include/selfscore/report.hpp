#pragma once

#include "selfscore/orchestrator.hpp"
#include "selfscore/stats.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace selfscore {

struct SummaryRow {
    std::string label;
    double average_final_score = 0.0;
    std::size_t count = 0;
};

/// Non-failed results grouped by run_label, in first-seen label order.
std::vector<stats::Cohort> cohorts_by_label(std::span<const InteractionResult> results);

/// One row per cohort, highest average first (ties by label).
std::vector<SummaryRow> summary_table(std::span<const stats::Cohort> cohorts);
/// label,average_final_score,count with the average to two decimals.
std::string summary_csv(std::span<const SummaryRow> rows);

enum class Metric { complexity, user_helpfulness, agent_helpfulness, quality, final_score };

std::string_view to_string(Metric m) noexcept;
/// Axis caption, e.g. "Final score".
std::string_view metric_title(Metric m) noexcept;

struct HistogramSpec {
    Metric metric = Metric::final_score;
    int bin_count = 20;
    std::optional<std::pair<double, double>> range; // defaults to the data range

    /// 20 bins over [0,100] for final scores, 10 over [1,10] for complexity
    /// and helpfulness, 20 over the data range for quality.
    static HistogramSpec defaults(Metric m);
    void validate() const;
};

/// Bin counts over [lo, hi]; values outside land in the edge bins and the
/// last bin is closed on the right.
std::vector<std::size_t> bin_values(std::span<const double> values, int bin_count, double lo, double hi);

/// Standalone SVG bar chart whose bars sum to values.size().
std::string histogram_svg(std::span<const double> values, const HistogramSpec& spec, std::string_view title = {});

/// Per-interaction values of a metric: weighted complexity, average
/// helpfulness, quality or final score of each non-failed result.
std::vector<double> metric_values(std::span<const InteractionResult> results, Metric m);

/// One SVG holding a distribution panel per metric for a single cohort.
std::string cohort_report_svg(std::string_view label, std::span<const InteractionResult> results);

} // namespace selfscore
