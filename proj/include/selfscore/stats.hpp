#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace selfscore::stats {

struct Cohort {
    std::string label;
    std::vector<double> values;
};

struct AnovaResult {
    double f_statistic = 0.0;
    double p_value = 1.0;
    int df_between = 0;
    int df_within = 0;
};

/// Requires >= 2 groups of >= 2 values each and non-zero within-group
/// variance (DegenerateDataError otherwise).
AnovaResult one_way_anova(std::span<const Cohort> groups);

struct TukeyRow {
    std::string group1;
    std::string group2;
    double mean_diff = 0.0; // mean(group2) - mean(group1)
    double p_adj = 1.0;
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    bool reject = false;
};

enum class Execution { serial, parallel };

/// Tukey-Kramer HSD over all unordered pairs (i < j in input order).
std::vector<TukeyRow> tukey_hsd(std::span<const Cohort> groups, double alpha = 0.05,
                               Execution exec = Execution::parallel);

/// CSV with header group1,group2,meandiff,p-adj,lower,upper,reject.
std::string tukey_csv(std::span<const TukeyRow> rows);

/// P(Q <= q) for the studentized range of k means with df degrees of
/// freedom (df may be +infinity). Absolute accuracy about 1e-7.
double studentized_range_cdf(double q, int k, double df);
/// Inverse of studentized_range_cdf in q.
double studentized_range_quantile(double p, int k, double df);

struct MannWhitneyResult {
    double u_statistic = 0.0; // U of the first sample
    double p_value = 1.0;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    bool degenerate = false;  // every observation equal; p set to 1
};

/// Two-sided test, normal approximation with tie and continuity corrections.
MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

/// Exact two-sided p-value by enumerating the permutation distribution of
/// the midrank sum (ties handled). Requires a.size() * b.size() <= 400.
double mann_whitney_exact_p(std::span<const double> a, std::span<const double> b);

struct Description {
    double mean = 0.0;
    double median = 0.0;
    double stddev = 0.0; // sample (n-1) form; NaN when count == 1
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 0;
};

Description describe(std::span<const double> values);

} // namespace selfscore::stats
