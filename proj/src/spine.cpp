#include "bbm/spine.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bbm::spine {

SpinePath sample_spine(const ModelParams& params, double t, RandomStream& rng) {
    if (t <= 0.0) throw std::invalid_argument("sample_spine: t <= 0");
    const int d = params.d;
    SpinePath path;
    path.horizon = t;

    // Poisson(beta*mu*t) atoms, uniform on [0,t]
    const double rate = params.beta * params.mu();
    // inversion by exponential gaps
    double clock = rng.exponential(rate);
    while (clock <= t) {
        path.branch_times.push_back(clock);
        clock += rng.exponential(rate);
    }

    const SizeBiasedLaw sb = params.law.size_biased();
    path.offspring_counts.reserve(path.branch_times.size());
    for (std::size_t i = 0; i < path.branch_times.size(); ++i)
        path.offspring_counts.push_back(sb.sample(rng));

    // drifted motion: X_xi(s) = B_s - theta s, Gaussian increments between
    // the recording times
    std::vector<double> pos(std::size_t(d), 0.0);
    double prev = 0.0;
    auto record_at = [&](double s) {
        const double sd = std::sqrt(s - prev);
        for (int j = 0; j < d; ++j) {
            pos[std::size_t(j)] += sd * rng.gaussian() -
                                   params.theta[std::size_t(j)] * (s - prev);
            path.positions.push_back(pos[std::size_t(j)]);
        }
        prev = s;
    };
    for (double s : path.branch_times) record_at(s);
    record_at(t);
    return path;
}

GaussHermiteRule gauss_hermite(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: n < 1");
    // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite
    // polynomials: zero diagonal, off-diagonal sqrt(k).
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double off = std::sqrt(double(k));
        jacobi(k, k - 1) = off;
        jacobi(k - 1, k) = off;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    GaussHermiteRule rule;
    rule.nodes.resize(std::size_t(n));
    rule.weights.resize(std::size_t(n));
    for (int i = 0; i < n; ++i) {
        rule.nodes[std::size_t(i)] = solver.eigenvalues()(i);
        const double v0 = solver.eigenvectors()(0, i);
        rule.weights[std::size_t(i)] = v0 * v0;  // total mass 1
    }
    return rule;
}

namespace {

// n-point Gauss-Legendre on [-1, 1] by Golub-Welsch.
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double off = double(k) / std::sqrt(4.0 * k * k - 1.0);
        jacobi(k, k - 1) = off;
        jacobi(k - 1, k) = off;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    std::vector<double> nodes(static_cast<std::size_t>(n));
    std::vector<double> weights(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        nodes[std::size_t(i)] = solver.eigenvalues()(i);
        const double v0 = solver.eigenvectors()(0, i);
        weights[std::size_t(i)] = 2.0 * v0 * v0;
    }
    return {nodes, weights};
}

struct AxisRule {
    std::vector<double> nodes;    // in z (standard normal variable)
    std::vector<double> weights;  // include the normal density where needed
};

// Composite GL panels on [-12, 12] split at `cut`, weights carrying phi(z).
AxisRule panel_rule(double cut) {
    constexpr double LIMIT = 12.0;
    constexpr int PANELS_PER_SIDE = 8;
    constexpr int GL_ORDER = 24;
    static const auto gl = gauss_legendre(GL_ORDER);
    const double c = std::clamp(cut, -LIMIT, LIMIT);
    AxisRule rule;
    auto add_interval = [&](double lo, double hi) {
        const double width = (hi - lo) / PANELS_PER_SIDE;
        for (int p = 0; p < PANELS_PER_SIDE; ++p) {
            const double a = lo + p * width, b = a + width;
            for (int i = 0; i < GL_ORDER; ++i) {
                const double z =
                    0.5 * (a + b) + 0.5 * (b - a) * gl.first[std::size_t(i)];
                const double w = 0.5 * (b - a) * gl.second[std::size_t(i)] *
                                 std::exp(-0.5 * z * z) /
                                 std::sqrt(2.0 * std::numbers::pi);
                rule.nodes.push_back(z);
                rule.weights.push_back(w);
            }
        }
    };
    add_interval(-LIMIT, c);
    add_interval(c, LIMIT);
    return rule;
}

}  // namespace

double many_to_one_rhs(const ModelParams& params, double t,
                       const PositionFunctional& h, int nodes_per_axis,
                       std::span<const double> cuts) {
    if (t <= 0.0) throw std::invalid_argument("many_to_one_rhs: t <= 0");
    const int d = params.d;
    const double prefactor =
        std::exp((params.beta * (params.mu() - 1.0) + 0.5 * params.theta_norm2()) *
                 t);
    const double sqrt_t = std::sqrt(t);

    if (d <= 3) {
        std::vector<AxisRule> axes(static_cast<std::size_t>(d));
        if (cuts.empty()) {
            const GaussHermiteRule gh = gauss_hermite(nodes_per_axis);
            for (auto& ax : axes) {
                ax.nodes = gh.nodes;
                ax.weights = gh.weights;
            }
        } else {
            if (int(cuts.size()) != d)
                throw std::invalid_argument("many_to_one_rhs: cuts dimension");
            for (int j = 0; j < d; ++j) {
                // x = sqrt(t) z - theta t, so the cut in z space:
                const double zcut =
                    (cuts[std::size_t(j)] + params.theta[std::size_t(j)] * t) /
                    sqrt_t;
                axes[std::size_t(j)] = panel_rule(zcut);
            }
        }
        std::vector<double> x(static_cast<std::size_t>(d));
        std::vector<std::size_t> idx(std::size_t(d), 0);
        double sum = 0.0;
        // tensorized loop over node multi-indices
        while (true) {
            double w = 1.0;
            double dot = 0.0;
            for (int j = 0; j < d; ++j) {
                const auto& ax = axes[std::size_t(j)];
                const double z = ax.nodes[idx[std::size_t(j)]];
                w *= ax.weights[idx[std::size_t(j)]];
                x[std::size_t(j)] = sqrt_t * z - params.theta[std::size_t(j)] * t;
                dot += params.theta[std::size_t(j)] * x[std::size_t(j)];
            }
            sum += w * std::exp(dot) * h(x);
            int j = 0;
            for (; j < d; ++j) {
                if (++idx[std::size_t(j)] < axes[std::size_t(j)].nodes.size())
                    break;
                idx[std::size_t(j)] = 0;
            }
            if (j == d) break;
        }
        return prefactor * sum;
    }

    // d > 3: Monte Carlo over the spine motion
    constexpr int SAMPLES = 200'000;
    RandomStream rng = RandomStream::for_particle(0xB1A5u, 0x5F1DEu);
    double sum = 0.0;
    std::vector<double> x(static_cast<std::size_t>(d));
    for (int i = 0; i < SAMPLES; ++i) {
        double dot = 0.0;
        for (int j = 0; j < d; ++j) {
            x[std::size_t(j)] =
                sqrt_t * rng.gaussian() - params.theta[std::size_t(j)] * t;
            dot += params.theta[std::size_t(j)] * x[std::size_t(j)];
        }
        sum += std::exp(dot) * h(x);
    }
    return prefactor * sum / double(SAMPLES);
}

std::vector<ManyToOneRow> verify_many_to_one(const ModelParams& params, double t,
                                             int num_traj, std::uint64_t base_seed,
                                             std::span<const double> b,
                                             int workers) {
    const int d = params.d;
    std::vector<double> bvec(b.begin(), b.end());

    struct Functional {
        std::string name;
        PositionFunctional h;
        std::vector<double> cuts;  // empty = smooth
    };
    std::vector<Functional> suite;
    suite.push_back({"one", [](std::span<const double>) { return 1.0; }, {}});
    suite.push_back({"indicator",
                     [bvec](std::span<const double> x) {
                         for (std::size_t j = 0; j < x.size(); ++j)
                             if (x[j] > bvec[j]) return 0.0;
                         return 1.0;
                     },
                     bvec});
    for (int p = 1; p <= 4; ++p)
        suite.push_back({"x^" + std::to_string(p),
                         [p](std::span<const double> x) {
                             return std::pow(x[0], double(p));
                         },
                         {}});
    {
        std::vector<double> theta = params.theta;
        suite.push_back({"exp(-theta.x)",
                         [theta](std::span<const double> x) {
                             double dot = 0.0;
                             for (std::size_t j = 0; j < x.size(); ++j)
                                 dot += theta[j] * x[j];
                             return std::exp(-dot);
                         },
                         {}});
    }

    const std::size_t nf = suite.size();
    std::vector<std::vector<double>> per_seed(nf,
                                              std::vector<double>(std::size_t(num_traj)));
    const std::vector<double> schedule{t};

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 64) num_threads(workers)
#endif
    for (int i = 0; i < num_traj; ++i) {
        const Trajectory traj =
            simulate(params, schedule, base_seed + std::uint64_t(i), 1);
        const Snapshot& snap = traj.snapshots.front();
        std::vector<double> acc(nf, 0.0);
        for (std::size_t u = 0; u < snap.size(); ++u) {
            const auto x = snap.position(u, d);
            for (std::size_t f = 0; f < nf; ++f) acc[f] += suite[f].h(x);
        }
        for (std::size_t f = 0; f < nf; ++f) per_seed[f][std::size_t(i)] = acc[f];
    }

    std::vector<ManyToOneRow> rows;
    for (std::size_t f = 0; f < nf; ++f) {
        double mean = 0.0;
        for (double v : per_seed[f]) mean += v;
        mean /= double(num_traj);
        double var = 0.0;
        for (double v : per_seed[f]) var += (v - mean) * (v - mean);
        var /= double(num_traj - 1);
        const double se = std::sqrt(var / double(num_traj));
        const double quad =
            many_to_one_rhs(params, t, suite[f].h, 64, suite[f].cuts);
        const double z = (se > 0.0) ? (mean - quad) / se : 0.0;
        rows.push_back({suite[f].name, t, mean, se, quad, z});
    }
    return rows;
}

}  // namespace bbm::spine
