// stats.hpp — the small statistics toolbox used by the verification harness

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "eventum/errors.hpp"

namespace eventum {

inline double mean(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double sample_variance(const std::vector<double>& xs) {
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
}

/// Least-squares slope of y on x.
inline double fit_slope(const std::vector<double>& xs,
                        const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) {
        throw Error("fit_slope: need at least two points");
    }
    const double mx = mean(xs);
    const double my = mean(ys);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0.0) throw Error("fit_slope: degenerate abscissa");
    return sxy / sxx;
}

inline double exponential_cdf(double x, double rate) {
    return x <= 0.0 ? 0.0 : 1.0 - std::exp(-rate * x);
}

inline double poisson_pmf(int k, double mu) {
    if (k < 0) return 0.0;
    if (mu <= 0.0) return k == 0 ? 1.0 : 0.0;
    return std::exp(static_cast<double>(k) * std::log(mu) - mu -
                    std::lgamma(static_cast<double>(k) + 1.0));
}

/// Survival function of the Kolmogorov distribution,
/// Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
inline double kolmogorov_sf(double x) {
    if (x <= 0.0) return 1.0;
    double q = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * std::exp(-2.0 * static_cast<double>(k) *
                                           static_cast<double>(k) * x * x);
        q += (k % 2 == 1) ? term : -term;
        if (term < 1e-16) break;
    }
    return std::clamp(q, 0.0, 1.0);
}

struct KsResult {
    double statistic = 0.0;  // sup-norm distance D
    double p_value = 1.0;
    std::size_t n = 0;
};

/// One-sample Kolmogorov-Smirnov test against a continuous CDF; p-value via
/// the Stephens small-sample correction of the asymptotic law.
inline KsResult ks_test(std::vector<double> samples,
                        const std::function<double(double)>& cdf) {
    if (samples.empty()) throw Error("ks_test: no samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d = std::max({d, std::abs(f - lo), std::abs(hi - f)});
    }
    KsResult res;
    res.statistic = d;
    res.n = samples.size();
    const double sn = std::sqrt(n);
    res.p_value = kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
    return res;
}

/// Two-sample Kolmogorov-Smirnov test.
inline KsResult ks_test_two_sample(std::vector<double> a,
                                   std::vector<double> b) {
    if (a.empty() || b.empty()) throw Error("ks_test_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t ia = 0;
    std::size_t ib = 0;
    while (ia < a.size() && ib < b.size()) {
        const double x = std::min(a[ia], b[ib]);
        while (ia < a.size() && a[ia] <= x) ++ia;
        while (ib < b.size() && b[ib] <= x) ++ib;
        const double fa = static_cast<double>(ia) / static_cast<double>(a.size());
        const double fb = static_cast<double>(ib) / static_cast<double>(b.size());
        d = std::max(d, std::abs(fa - fb));
    }
    KsResult res;
    res.statistic = d;
    res.n = a.size() + b.size();
    const double ne = static_cast<double>(a.size()) *
                      static_cast<double>(b.size()) /
                      static_cast<double>(a.size() + b.size());
    const double sn = std::sqrt(ne);
    res.p_value = kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
    return res;
}

/// 4-sigma binomial band around probability p at sample size n.
inline double binomial_4sigma(double p, std::size_t n) {
    return 4.0 * std::sqrt(std::max(p * (1.0 - p), 0.0) /
                           static_cast<double>(n));
}

}  // namespace eventum
