#include "selfscore/report.hpp"

#include "selfscore/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace selfscore {
namespace {

constexpr double kPanelWidth = 480.0;
constexpr double kPanelHeight = 320.0;
constexpr double kLeft = 56.0;
constexpr double kRight = 16.0;
constexpr double kTop = 36.0;
constexpr double kBottom = 52.0;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out += c;
        }
    }
    return out;
}

std::pair<double, double> resolve_range(std::span<const double> values, const HistogramSpec& spec) {
    if (spec.range) return *spec.range;
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    if (*mn == *mx) return {*mn - 0.5, *mx + 0.5};
    return {*mn, *mx};
}

// Emits one histogram as a <g> translated to (x, y).
void write_panel(std::ostream& out, std::span<const double> values, const HistogramSpec& spec,
                 std::string_view title, double x, double y) {
    const auto [lo, hi] = resolve_range(values, spec);
    const auto counts = bin_values(values, spec.bin_count, lo, hi);
    const std::size_t peak = std::max<std::size_t>(1, *std::max_element(counts.begin(), counts.end()));
    const double plot_w = kPanelWidth - kLeft - kRight;
    const double plot_h = kPanelHeight - kTop - kBottom;
    const double bar_w = plot_w / static_cast<double>(counts.size());

    out << "<g transform=\"translate(" << px(x) << "," << px(y) << ")\">\n";
    out << "<text x=\"" << px(kPanelWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
        << xml_escape(title.empty() ? metric_title(spec.metric) : title) << "</text>\n";
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double h = plot_h * static_cast<double>(counts[i]) / static_cast<double>(peak);
        out << "<rect class=\"bin\" data-count=\"" << counts[i] << "\" x=\"" << px(kLeft + bar_w * i) << "\" y=\""
            << px(kTop + plot_h - h) << "\" width=\"" << px(bar_w) << "\" height=\"" << px(h)
            << "\" fill=\"#4c72b0\" stroke=\"#ffffff\" stroke-width=\"0.5\"/>\n";
    }
    out << "<line x1=\"" << px(kLeft) << "\" y1=\"" << px(kTop + plot_h) << "\" x2=\"" << px(kLeft + plot_w)
        << "\" y2=\"" << px(kTop + plot_h) << "\" stroke=\"#000000\"/>\n";
    out << "<line x1=\"" << px(kLeft) << "\" y1=\"" << px(kTop) << "\" x2=\"" << px(kLeft) << "\" y2=\""
        << px(kTop + plot_h) << "\" stroke=\"#000000\"/>\n";
    constexpr int kTicks = 5;
    for (int t = 0; t <= kTicks; ++t) {
        const double f = static_cast<double>(t) / kTicks;
        const double tx = kLeft + plot_w * f;
        out << "<text x=\"" << px(tx) << "\" y=\"" << px(kTop + plot_h + 16) << "\" text-anchor=\"middle\" "
            << "font-size=\"11\">" << num(lo + (hi - lo) * f) << "</text>\n";
        const double ty = kTop + plot_h * (1.0 - f);
        out << "<text x=\"" << px(kLeft - 6) << "\" y=\"" << px(ty + 4) << "\" text-anchor=\"end\" font-size=\"11\">"
            << num(static_cast<double>(peak) * f) << "</text>\n";
    }
    out << "<text x=\"" << px(kLeft + plot_w / 2) << "\" y=\"" << px(kPanelHeight - 12)
        << "\" text-anchor=\"middle\" font-size=\"12\">" << xml_escape(metric_title(spec.metric)) << "</text>\n";
    out << "<text x=\"14\" y=\"" << px(kTop + plot_h / 2) << "\" text-anchor=\"middle\" font-size=\"12\" "
        << "transform=\"rotate(-90 14 " << px(kTop + plot_h / 2) << ")\">Count</text>\n";
    out << "</g>\n";
}

void svg_open(std::ostream& out, double w, double h) {
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(w) << "\" height=\"" << px(h)
        << "\" viewBox=\"0 0 " << px(w) << " " << px(h) << "\" font-family=\"sans-serif\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
}

} // namespace

std::vector<stats::Cohort> cohorts_by_label(std::span<const InteractionResult> results) {
    std::vector<stats::Cohort> cohorts;
    for (const auto& r : results) {
        if (r.terminated_by == Termination::failed || !r.score) continue;
        auto it = std::find_if(cohorts.begin(), cohorts.end(), [&](const auto& c) { return c.label == r.run_label; });
        if (it == cohorts.end()) {
            cohorts.push_back({r.run_label, {}});
            it = cohorts.end() - 1;
        }
        it->values.push_back(r.score->final_score);
    }
    return cohorts;
}

std::vector<SummaryRow> summary_table(std::span<const stats::Cohort> cohorts) {
    if (cohorts.empty()) throw PreconditionError("summary_table: no cohorts");
    std::vector<SummaryRow> rows;
    for (const auto& c : cohorts) {
        const auto d = stats::describe(c.values);
        rows.push_back({c.label, d.mean, d.count});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const SummaryRow& a, const SummaryRow& b) {
        return a.average_final_score != b.average_final_score ? a.average_final_score > b.average_final_score
                                                               : a.label < b.label;
    });
    return rows;
}

std::string summary_csv(std::span<const SummaryRow> rows) {
    std::string out = "label,average_final_score,count\n";
    char buf[32];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.2f", r.average_final_score);
        out += r.label + "," + buf + "," + std::to_string(r.count) + "\n";
    }
    return out;
}

std::string_view to_string(Metric m) noexcept {
    switch (m) {
    case Metric::complexity: return "complexity";
    case Metric::user_helpfulness: return "user_helpfulness";
    case Metric::agent_helpfulness: return "agent_helpfulness";
    case Metric::quality: return "quality";
    case Metric::final_score: return "final_score";
    }
    return "final_score";
}

std::string_view metric_title(Metric m) noexcept {
    switch (m) {
    case Metric::complexity: return "Weighted complexity";
    case Metric::user_helpfulness: return "Average user helpfulness";
    case Metric::agent_helpfulness: return "Average agent helpfulness";
    case Metric::quality: return "Average quality";
    case Metric::final_score: return "Final score";
    }
    return "Final score";
}

HistogramSpec HistogramSpec::defaults(Metric m) {
    switch (m) {
    case Metric::final_score: return {m, 20, std::pair{0.0, 100.0}};
    case Metric::quality: return {m, 20, std::nullopt};
    default: return {m, 10, std::pair{1.0, 10.0}};
    }
}

void HistogramSpec::validate() const {
    if (bin_count < 1) throw PreconditionError("histogram needs at least one bin");
    if (range && !(range->first < range->second)) throw PreconditionError("histogram range needs lo < hi");
}

std::vector<std::size_t> bin_values(std::span<const double> values, int bin_count, double lo, double hi) {
    if (bin_count < 1) throw PreconditionError("bin_values: bin_count must be >= 1");
    if (!(lo < hi)) throw PreconditionError("bin_values: need lo < hi");
    std::vector<std::size_t> counts(static_cast<std::size_t>(bin_count), 0);
    const double width = (hi - lo) / bin_count;
    for (double v : values) {
        auto idx = static_cast<long long>(std::floor((v - lo) / width));
        idx = std::clamp<long long>(idx, 0, bin_count - 1);
        ++counts[static_cast<std::size_t>(idx)];
    }
    return counts;
}

std::string histogram_svg(std::span<const double> values, const HistogramSpec& spec, std::string_view title) {
    if (values.empty()) throw PreconditionError("histogram_svg: no values");
    spec.validate();
    std::ostringstream out;
    svg_open(out, kPanelWidth, kPanelHeight);
    write_panel(out, values, spec, title, 0.0, 0.0);
    out << "</svg>\n";
    return out.str();
}

std::vector<double> metric_values(std::span<const InteractionResult> results, Metric m) {
    std::vector<double> v;
    for (const auto& r : results) {
        if (r.terminated_by == Termination::failed || !r.score) continue;
        const auto& s = *r.score;
        switch (m) {
        case Metric::complexity: v.push_back(s.weighted_complexity); break;
        case Metric::user_helpfulness: v.push_back(s.avg_user_helpfulness); break;
        case Metric::agent_helpfulness: v.push_back(s.avg_llm_helpfulness); break;
        case Metric::quality: v.push_back(s.avg_quality); break;
        case Metric::final_score: v.push_back(s.final_score); break;
        }
    }
    return v;
}

std::string cohort_report_svg(std::string_view label, std::span<const InteractionResult> results) {
    constexpr Metric kPanels[] = {Metric::complexity, Metric::user_helpfulness, Metric::agent_helpfulness,
                                  Metric::quality, Metric::final_score};
    if (metric_values(results, Metric::final_score).empty()) {
        throw PreconditionError("cohort_report_svg: no scored interactions for " + std::string(label));
    }
    constexpr int kColumns = 2;
    constexpr double kHeader = 40.0;
    const int panel_rows = (static_cast<int>(std::size(kPanels)) + kColumns - 1) / kColumns;
    std::ostringstream out;
    svg_open(out, kPanelWidth * kColumns, kHeader + kPanelHeight * panel_rows);
    out << "<text x=\"" << px(kPanelWidth * kColumns / 2) << "\" y=\"26\" text-anchor=\"middle\" font-size=\"18\">"
        << xml_escape(label) << "</text>\n";
    for (std::size_t i = 0; i < std::size(kPanels); ++i) {
        const auto values = metric_values(results, kPanels[i]);
        const double x = kPanelWidth * static_cast<double>(i % kColumns);
        const double y = kHeader + kPanelHeight * static_cast<double>(i / kColumns);
        write_panel(out, values, HistogramSpec::defaults(kPanels[i]), {}, x, y);
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace selfscore
