#include <doctest.h>

#include <cmath>
#include <vector>

#include "bbm/expansion.hpp"

using namespace bbm;
using namespace bbm::expansion;

namespace {

double binom(int n, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r = r * double(n - i) / double(i + 1);
    return r;
}

LimitEstimates unit_limits(int m, int d) {
    LimitEstimates limits;
    limits.horizon = 100.0;
    for (int ell = 0; ell <= m; ++ell)
        for (const auto& k : multi_indices_of_order(ell, d))
            limits.values[k] = (ell == 0) ? 1.0 : 0.0;
    return limits;
}

}  // namespace

TEST_CASE("multi-index enumeration count C(l+d-1, d-1)") {
    for (int d = 1; d <= 4; ++d)
        for (int ell = 0; ell <= 8; ++ell)
            CHECK(double(multi_indices_of_order(ell, d).size()) ==
                  doctest::Approx(binom(ell + d - 1, d - 1)));
    // lexicographic order
    const auto ks = multi_indices_of_order(2, 2);
    CHECK(ks[0] == MultiIndex({0, 2}));
    CHECK(ks[1] == MultiIndex({1, 1}));
    CHECK(ks[2] == MultiIndex({2, 0}));
}

TEST_CASE("thm1 partial sum, order 0 and 1 by hand (d=1)") {
    LimitEstimates limits;
    limits.horizon = 12.0;
    limits.values[MultiIndex({0})] = 0.8;
    limits.values[MultiIndex({1})] = 0.3;
    const std::vector<double> b{0.7};
    const double s = 9.0;
    const double phi = specfun::std_normal_pdf(0.7);
    const double Phi = specfun::std_normal_cdf(0.7);
    CHECK(thm1_partial_sum(0, s, b, limits) == doctest::Approx(Phi * 0.8));
    CHECK(thm1_partial_sum(1, s, b, limits) ==
          doctest::Approx(Phi * 0.8 - phi * 0.3 / 3.0));
    CHECK_THROWS_AS(thm1_partial_sum(2, s, b, limits), std::out_of_range);
}

TEST_CASE("thm1 at b -> +inf reduces to the k=0 limit") {
    LimitEstimates limits;
    limits.horizon = 10.0;
    limits.values[MultiIndex({0, 0})] = 1.7;
    for (const auto& k : multi_indices_of_order(1, 2)) limits.values[k] = 5.0;
    for (const auto& k : multi_indices_of_order(2, 2)) limits.values[k] = -3.0;
    const std::vector<double> b{1e9, 1e9};
    CHECK(thm1_partial_sum(2, 4.0, b, limits) == doctest::Approx(1.7));
}

TEST_CASE("moment_integral") {
    const std::vector<double> a1{0.0}, b1{1.0};
    CHECK(moment_integral(a1, b1, MultiIndex({0})) == doctest::Approx(1.0));
    const std::vector<double> b2{2.0};
    CHECK(moment_integral(a1, b2, MultiIndex({2})) == doctest::Approx(8.0 / 3.0));
    const std::vector<double> am{-1.0, -1.0}, bm{1.0, 1.0};
    CHECK(moment_integral(am, bm, MultiIndex({1, 0})) == doctest::Approx(0.0));
    CHECK_THROWS_AS(moment_integral(b1, a1, MultiIndex({0})),
                    std::invalid_argument);
}

TEST_CASE("thm2 order 0 is the local limit coefficient") {
    LimitEstimates limits;
    limits.horizon = 10.0;
    limits.values[MultiIndex({0})] = 1.3;
    const std::vector<double> a{-1.0}, b{1.0};
    // phi(0) * (b - a) * M^{(0)}
    CHECK(thm2_partial_sum(0, 9.0, a, b, limits) ==
          doctest::Approx(specfun::std_normal_pdf(0.0) * 2.0 * 1.3));
}

TEST_CASE("thm2 ell=1 term vanishes for a symmetric box in d=1") {
    LimitEstimates limits;
    limits.horizon = 10.0;
    limits.values[MultiIndex({0})] = 0.9;
    limits.values[MultiIndex({1})] = 0.4;
    const std::vector<double> a{-1.5}, b{1.5};
    const double s = 7.0;
    CHECK(thm2_partial_sum(1, s, a, b, limits) ==
          doctest::Approx(thm2_partial_sum(0, s, a, b, limits)));
}

TEST_CASE("thm2 parity: odd k_j + i_j terms are exactly zero") {
    // every term with any odd k_j+i_j carries H_odd(0) = 0; the numeric
    // check: with symmetric box the order-3 sum equals the order-2 sum
    LimitEstimates limits;
    limits.horizon = 10.0;
    for (int ell = 0; ell <= 3; ++ell)
        for (const auto& k : multi_indices_of_order(ell, 1))
            limits.values[k] = 0.5 + double(ell);
    const std::vector<double> a{-2.0}, b{2.0};
    const double s2 = thm2_partial_sum(2, 5.0, a, b, limits);
    const double s3 = thm2_partial_sum(3, 5.0, a, b, limits);
    CHECK(s3 == doctest::Approx(s2));
}

TEST_CASE("deterministic reduction: unit limits converge to Phi_d") {
    // with limits {0 -> 1, else 0} the thm1 sum is Phi(b) exactly at any s
    const auto limits = unit_limits(3, 1);
    for (double b = -2.0; b <= 2.0; b += 0.5) {
        const std::vector<double> bv{b};
        CHECK(thm1_partial_sum(3, 50.0, bv, limits) ==
              doctest::Approx(specfun::std_normal_cdf(b)).epsilon(1e-12));
    }
}

TEST_CASE("thm2 with unit limits matches Gaussian box quadrature at s=100") {
    // deterministic reduction: the thm2 sum should approximate
    // s^{d/2} integral_{(a/sqrt s, b/sqrt s]} phi_d = integral over [a,b]
    // of phi(z/sqrt s) dz, expanded in powers of 1/s
    const int m = 4;
    const auto limits = unit_limits(m, 1);
    const double s = 100.0;
    const std::vector<double> a{-1.0}, b{2.0};
    double oracle = 0.0;
    {
        const int N = 20000;
        const double lo = a[0], hi = b[0];
        const double w = (hi - lo) / N;
        for (int i = 0; i < N; ++i) {
            const double z = lo + (i + 0.5) * w;
            oracle += w * specfun::std_normal_pdf(z / std::sqrt(s));
        }
    }
    CHECK(thm2_partial_sum(m, s, a, b, limits) ==
          doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("partial sums telescope") {
    const ModelParams params(1, 1.0, OffspringLaw::binary(), {0.0});
    const std::vector<double> schedule{2.0, 4.0, 6.0};
    const Trajectory traj = simulate(params, schedule, 2024);
    const std::vector<double> b{0.0}, a{-1.0};
    const auto report = residual_report(traj, params, 2, a, b, Mode::thm1);
    const LimitEstimates limits = estimate_limits(traj, params, 2);
    for (std::size_t ti = 0; ti < report.grid.size(); ++ti) {
        for (int ell = 1; ell <= 2; ++ell) {
            const double s = report.grid[ti];
            const double term = report.partial_sums[ti][std::size_t(ell)] -
                                report.partial_sums[ti][std::size_t(ell - 1)];
            // the ell-th order term recomputed directly
            double direct = 0.0;
            const double sign = (ell % 2 == 0) ? 1.0 : -1.0;
            for (const auto& k : multi_indices_of_order(ell, 1))
                direct += sign * std::pow(s, -0.5 * ell) *
                          specfun::cdf_derivative_d(k, b) / k.factorial() *
                          limits.at(k);
            CHECK(term == doctest::Approx(direct).epsilon(1e-12));
        }
    }
}

TEST_CASE("thm1 m=0 consistency with the measures module at the horizon") {
    const ModelParams params(1, 1.0, OffspringLaw::binary(), {0.0});
    const std::vector<double> schedule{2.0, 5.0};
    const Trajectory traj = simulate(params, schedule, 11);
    const LimitEstimates limits = estimate_limits(traj, params, 0);
    const std::vector<double> b{0.5};
    const double expected = specfun::std_normal_cdf(0.5) *
                            measures::additive_martingale(traj.snapshots.back(),
                                                          params);
    CHECK(thm1_partial_sum(0, 5.0, b, limits) ==
          doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("residual_report structure") {
    const ModelParams params(1, 1.0, OffspringLaw::binary(), {0.0});
    const std::vector<double> schedule{2.0, 4.0, 6.0, 8.0};
    const Trajectory traj = simulate(params, schedule, 77);
    const std::vector<double> a{-1.0}, b{1.0};
    const auto rep = residual_report(traj, params, 1, a, b, Mode::thm2);
    CHECK(rep.grid.size() == 4);
    CHECK(rep.slopes.size() == 2);
    for (const auto& row : rep.residuals)
        for (double r : row) CHECK(std::isfinite(r));
}
