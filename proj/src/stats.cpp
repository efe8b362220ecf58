#include "selfscore/stats.hpp"

#include "selfscore/error.hpp"

#include <boost/math/distributions/fisher_f.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>

namespace selfscore::stats {
namespace {

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

struct Pooled {
    std::vector<double> means;
    double ssb = 0.0;
    double ssw = 0.0;
    std::size_t total = 0;
};

Pooled pool_groups(std::span<const Cohort> groups) {
    if (groups.size() < 2) throw PreconditionError("need at least two groups");
    Pooled p;
    double grand = 0.0;
    for (const auto& g : groups) {
        if (g.values.size() < 2) throw PreconditionError("group '" + g.label + "' has fewer than two values");
        p.total += g.values.size();
        grand += std::accumulate(g.values.begin(), g.values.end(), 0.0);
        p.means.push_back(mean_of(g.values));
    }
    grand /= static_cast<double>(p.total);
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const double d = p.means[i] - grand;
        p.ssb += static_cast<double>(groups[i].values.size()) * d * d;
        for (double x : groups[i].values) p.ssw += (x - p.means[i]) * (x - p.means[i]);
    }
    if (!(p.ssw > 0.0)) throw DegenerateDataError("within-group variance is zero");
    return p;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

// Midranks (1-based) of the pooled sample, doubled so they are integers.
std::vector<std::int64_t> doubled_midranks(std::span<const double> pooled) {
    const std::size_t n = pooled.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return pooled[x] < pooled[y]; });
    std::vector<std::int64_t> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
        // Positions i..j share rank ((i+1) + (j+1)) / 2; doubled: i + j + 2.
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = static_cast<std::int64_t>(i + j + 2);
        i = j + 1;
    }
    return ranks;
}

std::vector<double> concat(std::span<const double> a, std::span<const double> b) {
    std::vector<double> v(a.begin(), a.end());
    v.insert(v.end(), b.begin(), b.end());
    return v;
}

} // namespace

AnovaResult one_way_anova(std::span<const Cohort> groups) {
    const Pooled p = pool_groups(groups);
    AnovaResult r;
    r.df_between = static_cast<int>(groups.size()) - 1;
    r.df_within = static_cast<int>(p.total - groups.size());
    r.f_statistic = (p.ssb / r.df_between) / (p.ssw / r.df_within);
    if (r.f_statistic <= 0.0) {
        r.p_value = 1.0;
    } else {
        const boost::math::fisher_f dist(r.df_between, r.df_within);
        r.p_value = boost::math::cdf(boost::math::complement(dist, r.f_statistic));
    }
    return r;
}

std::vector<TukeyRow> tukey_hsd(std::span<const Cohort> groups, double alpha, Execution exec) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw PreconditionError("alpha must be in (0, 1)");
    const Pooled p = pool_groups(groups);
    const int k = static_cast<int>(groups.size());
    const double df = static_cast<double>(p.total - groups.size());
    const double msw = p.ssw / df;
    const double q_crit = studentized_range_quantile(1.0 - alpha, k, df);

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        for (std::size_t j = i + 1; j < groups.size(); ++j) pairs.emplace_back(i, j);
    }
    std::vector<TukeyRow> rows(pairs.size());
    auto compute = [&](std::size_t r) {
        const auto [i, j] = pairs[r];
        TukeyRow& row = rows[r];
        row.group1 = groups[i].label;
        row.group2 = groups[j].label;
        row.mean_diff = p.means[j] - p.means[i];
        const double se = std::sqrt(msw / 2.0 *
                                    (1.0 / static_cast<double>(groups[i].values.size()) +
                                     1.0 / static_cast<double>(groups[j].values.size())));
        const double q = std::abs(row.mean_diff) / se;
        row.p_adj = std::clamp(1.0 - studentized_range_cdf(q, k, df), 0.0, 1.0);
        row.ci_lower = row.mean_diff - q_crit * se;
        row.ci_upper = row.mean_diff + q_crit * se;
        row.reject = row.p_adj < alpha;
    };
    const auto n = static_cast<std::ptrdiff_t>(pairs.size());
    if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t r = 0; r < n; ++r) compute(static_cast<std::size_t>(r));
    } else {
        for (std::ptrdiff_t r = 0; r < n; ++r) compute(static_cast<std::size_t>(r));
    }
    return rows;
}

std::string tukey_csv(std::span<const TukeyRow> rows) {
    std::ostringstream out;
    out.precision(10);
    out << "group1,group2,meandiff,p-adj,lower,upper,reject\n";
    for (const auto& r : rows) {
        out << csv_field(r.group1) << ',' << csv_field(r.group2) << ',' << r.mean_diff << ',' << r.p_adj << ','
            << r.ci_lower << ',' << r.ci_upper << ',' << (r.reject ? "True" : "False") << '\n';
    }
    return out.str();
}

MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw PreconditionError("mann_whitney_u: both samples must be non-empty");
    const auto pooled = concat(a, b);
    const auto ranks = doubled_midranks(pooled);
    const double n1 = static_cast<double>(a.size());
    const double n2 = static_cast<double>(b.size());
    const double n = n1 + n2;
    double r1 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) r1 += static_cast<double>(ranks[i]) / 2.0;

    MannWhitneyResult res;
    res.n1 = a.size();
    res.n2 = b.size();
    res.u_statistic = r1 - n1 * (n1 + 1.0) / 2.0;

    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    const double var = n1 * n2 / 12.0 * ((n + 1.0) - (n > 1.0 ? tie_term / (n * (n - 1.0)) : 0.0));
    if (!(var > 0.0)) {
        res.p_value = 1.0;
        res.degenerate = true;
        return res;
    }
    const double mu = n1 * n2 / 2.0;
    const double u = std::max(res.u_statistic, n1 * n2 - res.u_statistic);
    const double z = (u - mu - 0.5) / std::sqrt(var);
    res.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    return res;
}

double mann_whitney_exact_p(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw PreconditionError("mann_whitney_exact_p: both samples must be non-empty");
    if (a.size() * b.size() > 400) throw PreconditionError("mann_whitney_exact_p: n1 * n2 exceeds 400");
    const auto ranks = doubled_midranks(concat(a, b));
    const std::size_t n1 = a.size();
    std::int64_t observed = 0;
    for (std::size_t i = 0; i < n1; ++i) observed += ranks[i];
    const auto max_sum = static_cast<std::size_t>(std::accumulate(ranks.begin(), ranks.end(), std::int64_t{0}));

    // ways[m][s]: subsets of size m with doubled rank sum s.
    std::vector<std::vector<double>> ways(n1 + 1, std::vector<double>(max_sum + 1, 0.0));
    ways[0][0] = 1.0;
    for (const auto r : ranks) {
        const auto step = static_cast<std::size_t>(r);
        for (std::size_t m = n1; m >= 1; --m) {
            auto& dst = ways[m];
            const auto& src = ways[m - 1];
            for (std::size_t s = max_sum; s >= step; --s) dst[s] += src[s - step];
        }
    }
    double total = 0.0;
    double le = 0.0;
    double ge = 0.0;
    for (std::size_t s = 0; s <= max_sum; ++s) {
        const double w = ways[n1][s];
        total += w;
        if (static_cast<std::int64_t>(s) <= observed) le += w;
        if (static_cast<std::int64_t>(s) >= observed) ge += w;
    }
    return std::min(1.0, 2.0 * std::min(le, ge) / total);
}

Description describe(std::span<const double> values) {
    if (values.empty()) throw PreconditionError("describe: no values");
    Description d;
    d.count = values.size();
    d.mean = mean_of(values);
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    d.min = sorted.front();
    d.max = sorted.back();
    const std::size_t mid = sorted.size() / 2;
    d.median = sorted.size() % 2 == 1 ? sorted[mid] : (sorted[mid - 1] + sorted[mid]) / 2.0;
    if (d.count == 1) {
        d.stddev = std::numeric_limits<double>::quiet_NaN();
    } else {
        double ss = 0.0;
        for (double x : values) ss += (x - d.mean) * (x - d.mean);
        d.stddev = std::sqrt(ss / static_cast<double>(d.count - 1));
    }
    return d;
}

} // namespace selfscore::stats
