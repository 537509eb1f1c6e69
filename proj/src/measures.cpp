#include "bbm/measures.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace bbm::measures {

namespace {

struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double v) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

constexpr std::size_t REDUCE_CHUNK = 4096;

// Per-chunk Kahan sums computed in parallel, combined in chunk order; the
// decomposition is fixed, so the result does not depend on thread count.
template <class Term>
double reduce(std::size_t n, Term&& term, bool parallel) {
    const std::size_t nchunks = (n + REDUCE_CHUNK - 1) / REDUCE_CHUNK;
    std::vector<double> partial(nchunks, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel && nchunks > 1)
#endif
    for (std::size_t c = 0; c < nchunks; ++c) {
        const std::size_t lo = c * REDUCE_CHUNK;
        const std::size_t hi = std::min(lo + REDUCE_CHUNK, n);
        KahanSum acc;
        for (std::size_t i = lo; i < hi; ++i) acc.add(term(i));
        partial[c] = acc.sum;
    }
    KahanSum total;
    for (double p : partial) total.add(p);
    return total.sum;
}

double exp_weight(std::span<const double> x, std::span<const double> theta) {
    double dot = 0.0;
    for (std::size_t j = 0; j < theta.size(); ++j) dot += theta[j] * x[j];
    return std::exp(-dot);
}

double cdf_impl(const Snapshot& snap, const ModelParams& params,
                std::span<const double> b, Scaling scaling, bool parallel) {
    const double s = snap.time;
    if (s <= 0.0) throw std::invalid_argument("additive_cdf: snapshot time <= 0");
    if (int(b.size()) != params.d)
        throw std::invalid_argument("additive_cdf: dimension mismatch");
    const int d = params.d;
    const double sqrt_s = std::sqrt(s);
    std::vector<double> thresh(b.begin(), b.end());
    if (scaling == Scaling::scaled)
        for (double& t : thresh) t *= sqrt_s;
    const double sum = reduce(
        snap.size(),
        [&](std::size_t i) {
            const auto x = snap.position(i, d);
            for (int j = 0; j < d; ++j)
                if (x[j] + params.theta[j] * s > thresh[std::size_t(j)]) return 0.0;
            return exp_weight(x, params.theta);
        },
        parallel);
    return params.discount(s) * sum;
}

double box_impl(const Snapshot& snap, const ModelParams& params,
                std::span<const double> a, std::span<const double> b,
                bool parallel) {
    const double s = snap.time;
    if (s <= 0.0) throw std::invalid_argument("additive_box: snapshot time <= 0");
    if (int(a.size()) != params.d || int(b.size()) != params.d)
        throw std::invalid_argument("additive_box: dimension mismatch");
    for (std::size_t j = 0; j < a.size(); ++j)
        if (!(a[j] < b[j]))
            throw std::invalid_argument("additive_box: requires a < b");
    const int d = params.d;
    const double sum = reduce(
        snap.size(),
        [&](std::size_t i) {
            const auto x = snap.position(i, d);
            for (int j = 0; j < d; ++j) {
                const double y = x[j] + params.theta[j] * s;
                if (!(a[j] < y && y <= b[j])) return 0.0;
            }
            return exp_weight(x, params.theta);
        },
        parallel);
    return params.discount(s) * sum;
}

double martingale_impl(const Snapshot& snap, const ModelParams& params,
                       const MultiIndex& k, bool parallel) {
    if (k.dim() != params.d)
        throw std::invalid_argument("hermite_martingale: dimension mismatch");
    const int d = params.d;
    const double t = snap.time;
    const double sum = reduce(
        snap.size(),
        [&](std::size_t i) {
            const auto x = snap.position(i, d);
            double v = exp_weight(x, params.theta);
            for (int j = 0; j < d; ++j)
                v *= specfun::heat_poly(k.entries[std::size_t(j)],
                                        x[j] + params.theta[j] * t, t);
            return v;
        },
        parallel);
    return params.discount(t) * sum;
}

}  // namespace

double additive_cdf(const Snapshot& snap, const ModelParams& params,
                    std::span<const double> b, Scaling scaling) {
    return cdf_impl(snap, params, b, scaling, true);
}

double serial_additive_cdf(const Snapshot& snap, const ModelParams& params,
                           std::span<const double> b, Scaling scaling) {
    return cdf_impl(snap, params, b, scaling, false);
}

double additive_box(const Snapshot& snap, const ModelParams& params,
                    std::span<const double> a, std::span<const double> b) {
    return box_impl(snap, params, a, b, true);
}

double serial_additive_box(const Snapshot& snap, const ModelParams& params,
                           std::span<const double> a, std::span<const double> b) {
    return box_impl(snap, params, a, b, false);
}

double hermite_martingale(const Snapshot& snap, const ModelParams& params,
                          const MultiIndex& k) {
    return martingale_impl(snap, params, k, true);
}

double serial_hermite_martingale(const Snapshot& snap, const ModelParams& params,
                                 const MultiIndex& k) {
    return martingale_impl(snap, params, k, false);
}

double additive_martingale(const Snapshot& snap, const ModelParams& params) {
    return hermite_martingale(snap, params, MultiIndex::zeros(params.d));
}

}  // namespace bbm::measures
