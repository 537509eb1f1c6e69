#include "bbm/expansion.hpp"

#include <cmath>
#include <stdexcept>

namespace bbm {

double LimitEstimates::at(const MultiIndex& k) const {
    const auto it = values.find(k);
    if (it == values.end())
        throw std::out_of_range("LimitEstimates: missing multi-index entry");
    return it->second;
}

namespace expansion {

namespace {

void enumerate(int remaining, int pos, std::vector<int>& current,
               std::vector<MultiIndex>& out) {
    if (pos == int(current.size()) - 1) {
        current[std::size_t(pos)] = remaining;
        out.emplace_back(current);
        return;
    }
    for (int v = 0; v <= remaining; ++v) {
        current[std::size_t(pos)] = v;
        enumerate(remaining - v, pos + 1, current, out);
    }
}

}  // namespace

std::vector<MultiIndex> multi_indices_of_order(int ell, int d) {
    if (ell < 0 || d < 1)
        throw std::invalid_argument("multi_indices_of_order: bad arguments");
    std::vector<MultiIndex> out;
    std::vector<int> current(std::size_t(d), 0);
    enumerate(ell, 0, current, out);
    return out;
}

LimitEstimates estimate_limits(const Trajectory& traj, const ModelParams& params,
                               int m_max) {
    if (traj.snapshots.empty())
        throw std::invalid_argument("estimate_limits: empty trajectory");
    const Snapshot& last = traj.snapshots.back();
    LimitEstimates limits;
    limits.horizon = last.time;
    for (int ell = 0; ell <= m_max; ++ell)
        for (const MultiIndex& k : multi_indices_of_order(ell, params.d))
            limits.values[k] = measures::hermite_martingale(last, params, k);
    return limits;
}

double thm1_partial_sum(int m, double s, std::span<const double> b,
                        const LimitEstimates& limits) {
    if (s <= 0.0) throw std::invalid_argument("thm1_partial_sum: s <= 0");
    const int d = int(b.size());
    double total = 0.0;
    for (int ell = 0; ell <= m; ++ell) {
        const double sign = (ell % 2 == 0) ? 1.0 : -1.0;
        const double scale = sign * std::pow(s, -0.5 * ell);
        for (const MultiIndex& k : multi_indices_of_order(ell, d)) {
            total += scale * specfun::cdf_derivative_d(k, b) / k.factorial() *
                     limits.at(k);
        }
    }
    return total;
}

double moment_integral(std::span<const double> a, std::span<const double> b,
                       const MultiIndex& i) {
    if (int(a.size()) != i.dim() || int(b.size()) != i.dim())
        throw std::invalid_argument("moment_integral: dimension mismatch");
    double p = 1.0;
    for (int j = 0; j < i.dim(); ++j) {
        if (!(a[std::size_t(j)] < b[std::size_t(j)]))
            throw std::invalid_argument("moment_integral: requires a < b");
        const double e = double(i.entries[std::size_t(j)]) + 1.0;
        p *= (std::pow(b[std::size_t(j)], e) - std::pow(a[std::size_t(j)], e)) / e;
    }
    return p;
}

double thm2_partial_sum(int m, double s, std::span<const double> a,
                        std::span<const double> b, const LimitEstimates& limits) {
    if (s <= 0.0) throw std::invalid_argument("thm2_partial_sum: s <= 0");
    const int d = int(b.size());
    const std::vector<double> origin(std::size_t(d), 0.0);
    double total = 0.0;
    for (int ell = 0; ell <= m; ++ell) {
        const double scale = std::pow(s, -0.5 * ell);
        for (int j = 0; j <= ell; ++j) {
            const double sign = (j % 2 == 0) ? 1.0 : -1.0;
            for (const MultiIndex& k : multi_indices_of_order(j, d)) {
                const double mk = limits.at(k) / k.factorial();
                for (const MultiIndex& i : multi_indices_of_order(ell - j, d)) {
                    MultiIndex ki1 = k;
                    for (int c = 0; c < d; ++c)
                        ki1.entries[std::size_t(c)] +=
                            i.entries[std::size_t(c)] + 1;
                    total += scale * sign * mk *
                             specfun::cdf_derivative_d(ki1, origin) /
                             i.factorial() * moment_integral(a, b, i);
                }
            }
        }
    }
    return total;
}

ExpansionReport residual_report(const Trajectory& traj, const ModelParams& params,
                                int m, std::span<const double> a,
                                std::span<const double> b, Mode mode) {
    if (traj.snapshots.size() < 2)
        throw std::invalid_argument("residual_report: degenerate grid");
    const LimitEstimates limits = estimate_limits(traj, params, m);

    ExpansionReport report;
    report.m = m;
    report.mode = mode;
    report.horizon = limits.horizon;
    for (const Snapshot& snap : traj.snapshots) {
        const double s = snap.time;
        double measured;
        if (mode == Mode::thm1) {
            measured = measures::additive_cdf(snap, params, b, Scaling::scaled);
        } else {
            measured = std::pow(s, 0.5 * params.d) *
                       measures::additive_box(snap, params, a, b);
        }
        std::vector<double> sums, resids;
        for (int ell = 0; ell <= m; ++ell) {
            const double ps = (mode == Mode::thm1)
                                  ? thm1_partial_sum(ell, s, b, limits)
                                  : thm2_partial_sum(ell, s, a, b, limits);
            sums.push_back(ps);
            resids.push_back(measured - ps);
        }
        report.grid.push_back(s);
        report.measured.push_back(measured);
        report.partial_sums.push_back(std::move(sums));
        report.residuals.push_back(std::move(resids));
    }

    // OLS slope of log|r_l| against log s
    const std::size_t n = report.grid.size();
    for (int ell = 0; ell <= m; ++ell) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double lx = std::log(report.grid[i]);
            const double ly =
                std::log(std::abs(report.residuals[i][std::size_t(ell)]) +
                         1e-300);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        const double denom = double(n) * sxx - sx * sx;
        report.slopes.push_back((double(n) * sxy - sx * sy) / denom);
    }
    return report;
}

}  // namespace expansion
}  // namespace bbm
