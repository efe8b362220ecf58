#include "selfscore/error.hpp"
#include "selfscore/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace selfscore::stats {
namespace {

using boost::math::quadrature::gauss_kronrod;

constexpr double kInnerTol = 1e-11;
constexpr double kOuterTol = 1e-10;
// Past this many degrees of freedom the chi factor is indistinguishable from
// 1 at the accuracy we target, and the infinite-df form is used.
constexpr double kLargeDf = 2.0e5;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

// P(range of k iid standard normals <= w).
double range_cdf(double w, int k) {
    if (w <= 0.0) return 0.0;
    auto f = [w, k](double z) {
        const double d = normal_cdf(z) - normal_cdf(z - w);
        return d <= 0.0 ? 0.0 : normal_pdf(z) * std::pow(d, k - 1);
    };
    // The integrand lives on roughly [-8, 8 + w]; split at the midpoint of
    // its bulk so each panel is unimodal.
    const double mid = 0.5 * w;
    double err = 0.0;
    const double a = gauss_kronrod<double, 31>::integrate(f, -8.5, mid, 15, kInnerTol, &err);
    const double b = gauss_kronrod<double, 31>::integrate(f, mid, w + 8.5, 15, kInnerTol, &err);
    return std::min(1.0, k * (a + b));
}

} // namespace

double studentized_range_cdf(double q, int k, double df) {
    if (k < 2) throw PreconditionError("studentized range needs k >= 2");
    if (!(df > 0.0)) throw PreconditionError("studentized range needs df > 0");
    if (std::isnan(q)) return q;
    if (q <= 0.0) return 0.0;
    if (std::isinf(q)) return 1.0;
    if (df >= kLargeDf) return range_cdf(q, k);

    // Density of s = sqrt(chi2_df / df), in log form to survive large df.
    const double half = 0.5 * df;
    const double log_norm = half * std::log(df) - std::lgamma(half) - (half - 1.0) * std::numbers::ln2;
    auto f = [&](double s) {
        if (s <= 0.0) return 0.0;
        const double log_density = log_norm + (df - 1.0) * std::log(s) - half * s * s;
        return std::exp(log_density) * range_cdf(q * s, k);
    };
    const boost::math::chi_squared chi(df);
    const double lo = std::sqrt(boost::math::quantile(chi, 1e-16) / df);
    const double hi = std::sqrt(boost::math::quantile(boost::math::complement(chi, 1e-16)) / df);
    const double mode = df > 1.0 ? std::sqrt((df - 1.0) / df) : lo;
    double err = 0.0;
    double total = 0.0;
    if (mode > lo) total += gauss_kronrod<double, 31>::integrate(f, lo, mode, 15, kOuterTol, &err);
    total += gauss_kronrod<double, 31>::integrate(f, std::max(lo, mode), hi, 15, kOuterTol, &err);
    return std::clamp(total, 0.0, 1.0);
}

double studentized_range_quantile(double p, int k, double df) {
    if (!(p > 0.0 && p < 1.0)) throw PreconditionError("studentized range quantile needs 0 < p < 1");
    auto g = [&](double q) { return studentized_range_cdf(q, k, df) - p; };
    double hi = 4.0;
    while (g(hi) < 0.0) {
        hi *= 2.0;
        if (hi > 1e6) throw Error("studentized range quantile did not bracket");
    }
    std::uintmax_t iters = 100;
    const auto [a, b] = boost::math::tools::toms748_solve(g, 0.0, hi, -p, g(hi),
                                                          boost::math::tools::eps_tolerance<double>(40), iters);
    return 0.5 * (a + b);
}

} // namespace selfscore::stats
