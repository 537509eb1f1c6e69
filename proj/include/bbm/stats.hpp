#ifndef BBM_STATS_HPP
#define BBM_STATS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace bbm::stats {

struct MeanSe {
    double mean;
    double se;
};

inline MeanSe mean_se(std::span<const double> xs) {
    if (xs.size() < 2) throw std::invalid_argument("mean_se: need >= 2 samples");
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= double(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= double(xs.size() - 1);
    return {mean, std::sqrt(var / double(xs.size()))};
}

inline double median(std::vector<double> xs) {
    if (xs.empty()) throw std::invalid_argument("median: empty");
    const std::size_t mid = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
    double hi = xs[mid];
    if (xs.size() % 2 == 1) return hi;
    std::nth_element(xs.begin(), xs.begin() + mid - 1, xs.end());
    return 0.5 * (xs[mid - 1] + hi);
}

// One-sample Kolmogorov-Smirnov statistic against a fully specified CDF.
inline double ks_statistic(std::vector<double> xs,
                           const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = double(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max(d, std::max(f - double(i) / n, double(i + 1) / n - f));
    }
    return d;
}

// Asymptotic critical value c(alpha)/sqrt(n), c = sqrt(-ln(alpha/2)/2),
// with the usual small-sample denominator correction.
inline double ks_critical(std::size_t n, double alpha) {
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    const double sn = std::sqrt(double(n));
    return c / (sn + 0.12 + 0.11 / sn);
}

// Anderson-Darling A^2 against a fully specified CDF (case 0).
inline double ad_statistic(std::vector<double> xs,
                           const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = std::clamp(cdf(xs[i]), 1e-15, 1.0 - 1e-15);
        const double ur = std::clamp(cdf(xs[n - 1 - i]), 1e-15, 1.0 - 1e-15);
        s += (2.0 * double(i) + 1.0) * (std::log(u) + std::log(1.0 - ur));
    }
    return -double(n) - s / double(n);
}

// Case-0 A^2 critical value, alpha = 1e-3.
inline constexpr double AD_CRITICAL_1E3 = 6.0;

// Upper chi-square critical values at alpha = 1e-3 for small dof.
inline double chi2_critical_1e3(int dof) {
    static const double table[] = {0.0,    10.828, 13.816, 16.266, 18.467,
                                   20.515, 22.458, 24.322, 26.124, 27.877};
    if (dof < 1 || dof > 9)
        throw std::invalid_argument("chi2_critical_1e3: dof out of table");
    return table[dof];
}

// Pearson chi-square over categories with expected counts n*p_k; categories
// with expected count < 5 are pooled into their left neighbor.
inline double chi2_statistic(std::span<const std::size_t> observed,
                             std::span<const double> probs, std::size_t n,
                             int* dof_out) {
    std::vector<std::pair<double, double>> pooled;  // (obs, exp)
    double pool_obs = 0.0, pool_exp = 0.0;
    for (std::size_t k = 0; k < observed.size(); ++k) {
        pool_obs += double(observed[k]);
        pool_exp += double(n) * probs[k];
        if (pool_exp >= 5.0) {
            pooled.emplace_back(pool_obs, pool_exp);
            pool_obs = pool_exp = 0.0;
        }
    }
    if (pool_exp > 0.0 && !pooled.empty()) {
        pooled.back().first += pool_obs;
        pooled.back().second += pool_exp;
    }
    double stat = 0.0;
    for (const auto& [obs, exp] : pooled)
        stat += (obs - exp) * (obs - exp) / exp;
    if (dof_out) *dof_out = std::max(1, int(pooled.size()) - 1);
    return stat;
}

}  // namespace bbm::stats

#endif
