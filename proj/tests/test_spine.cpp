#include <doctest.h>

#include <cmath>
#include <vector>

#include "bbm/specfun.hpp"
#include "bbm/spine.hpp"
#include "bbm/stats.hpp"

using namespace bbm;
using namespace bbm::spine;

TEST_CASE("spine branch count has Poisson(beta mu t) mean") {
    const ModelParams params(1, 1.0, OffspringLaw::binary(), {0.0});
    const double t = 3.0;
    RandomStream rng = RandomStream::for_particle(1000, 1);
    const int n = 100'000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const SpinePath path = sample_spine(params, t, rng);
        const double c = double(path.branch_times.size());
        sum += c;
        sumsq += c * c;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sumsq / n - mean * mean) / n);
    CHECK(std::abs(mean - 6.0) < 3.0 * se);  // rate 2, t = 3
}

TEST_CASE("spine endpoint is N(0, t) for theta = 0") {
    const ModelParams params(1, 1.0, OffspringLaw::binary(), {0.0});
    const double t = 2.0;
    RandomStream rng = RandomStream::for_particle(2000, 3);
    std::vector<double> xs;
    for (int i = 0; i < 20'000; ++i)
        xs.push_back(sample_spine(params, t, rng).endpoint(1)[0]);
    const double d = stats::ks_statistic(xs, [t](double x) {
        return specfun::std_normal_cdf(x / std::sqrt(t));
    });
    CHECK(d < stats::ks_critical(xs.size(), 1e-3));
}

TEST_CASE("size-biased binary law gives all 2s") {
    const ModelParams params(1, 1.0, OffspringLaw::binary(), {0.0});
    RandomStream rng = RandomStream::for_particle(3000, 5);
    const SpinePath path = sample_spine(params, 10.0, rng);
    for (int c : path.offspring_counts) CHECK(c == 2);
}

TEST_CASE("branch count and endpoint are uncorrelated") {
    const ModelParams params(1, 1.0, OffspringLaw({0.0, 0.5, 0.0, 0.5}), {0.2});
    RandomStream rng = RandomStream::for_particle(4000, 7);
    const int n = 100'000;
    std::vector<double> counts(n), ends(n);
    for (int i = 0; i < n; ++i) {
        const SpinePath path = sample_spine(params, 2.0, rng);
        counts[std::size_t(i)] = double(path.branch_times.size());
        ends[std::size_t(i)] = path.endpoint(1)[0];
    }
    const auto mc = stats::mean_se(counts);
    const auto me = stats::mean_se(ends);
    double cov = 0.0, vc = 0.0, ve = 0.0;
    for (int i = 0; i < n; ++i) {
        cov += (counts[std::size_t(i)] - mc.mean) * (ends[std::size_t(i)] - me.mean);
        vc += (counts[std::size_t(i)] - mc.mean) * (counts[std::size_t(i)] - mc.mean);
        ve += (ends[std::size_t(i)] - me.mean) * (ends[std::size_t(i)] - me.mean);
    }
    const double corr = cov / std::sqrt(vc * ve);
    CHECK(std::abs(corr) < 3.0 / std::sqrt(double(n)));
}

TEST_CASE("many_to_one_rhs closed forms") {
    auto one = [](std::span<const double>) { return 1.0; };
    for (double th : {0.0, 0.5, 1.0}) {
        const ModelParams params(1, 1.0, OffspringLaw::binary(), {th});
        // E sum 1 = e^{beta(mu-1)t} regardless of theta
        CHECK(many_to_one_rhs(params, 2.0, one) ==
              doctest::Approx(std::exp(2.0)).epsilon(1e-10));
        CHECK(many_to_one_rhs(params, 2.0, one) ==
              doctest::Approx(estimate_population(params, 2.0)).epsilon(1e-10));
    }
    {
        // beta = 2, mu = 1.5
        const ModelParams params(1, 2.0, OffspringLaw({0.0, 0.5, 0.5}), {0.3});
        CHECK(many_to_one_rhs(params, 3.0, one) ==
              doctest::Approx(std::exp(3.0)).epsilon(1e-10));
    }
}

TEST_CASE("quadrature self-consistency under node doubling") {
    const ModelParams params(2, 1.0, OffspringLaw::binary(), {0.3, -0.2});
    for (int p = 0; p <= 4; ++p) {
        auto h = [p](std::span<const double> x) {
            return std::pow(x[0], double(p));
        };
        const double v64 = many_to_one_rhs(params, 2.0, h, 64);
        const double v128 = many_to_one_rhs(params, 2.0, h, 128);
        CHECK(std::abs(v64 - v128) < 1e-9 * std::max(1.0, std::abs(v64)));
    }
}

TEST_CASE("second moment: E sum X^2 = e^t t at theta=0, binary") {
    const ModelParams params(1, 1.0, OffspringLaw::binary(), {0.0});
    auto h = [](std::span<const double> x) { return x[0] * x[0]; };
    CHECK(many_to_one_rhs(params, 1.0, h) ==
          doctest::Approx(std::exp(1.0)).epsilon(1e-10));
}

TEST_CASE("indicator with panel quadrature matches the exact factorization") {
    // E^{-theta}[e^{theta X} 1{X <= b}] factor per axis has the closed form
    // e^{-theta^2 t / 2} Phi(b / sqrt(t))... times the prefactor this is
    // e^{beta(mu-1)t} Phi(b/sqrt(t)).
    const double th = 0.5, t = 2.0, b = 0.0;
    const ModelParams params(1, 1.0, OffspringLaw::binary(), {th});
    const std::vector<double> cuts{b};
    auto h = [b](std::span<const double> x) { return x[0] <= b ? 1.0 : 0.0; };
    const double quad = many_to_one_rhs(params, t, h, 64, cuts);
    const double exact = std::exp(t) * specfun::std_normal_cdf(b / std::sqrt(t));
    CHECK(quad == doctest::Approx(exact).epsilon(1e-10));
}

TEST_CASE("verify_many_to_one suite agrees with forward simulation") {
    const ModelParams params(1, 1.0, OffspringLaw::binary(), {0.5});
    const std::vector<double> b{0.0};
    const auto rows = verify_many_to_one(params, 2.0, 20'000, 123456, b, 4);
    REQUIRE(rows.size() == 7);
    for (const auto& r : rows) {
        INFO(r.functional, " z=", r.zscore);
        CHECK(std::abs(r.zscore) < 3.0);
    }
    // h = e^{-theta x}: forward mean equals e^{(beta(mu-1)+||theta||^2/2)t},
    // i.e. E W_t = 1 after normalization
    const auto& w = rows.back();
    CHECK(w.quadrature ==
          doctest::Approx(std::exp((1.0 + 0.125) * 2.0)).epsilon(1e-9));
}

TEST_CASE("verify_many_to_one symmetric first moment at theta=0") {
    const ModelParams params(1, 1.0, OffspringLaw::binary(), {0.0});
    const std::vector<double> b{0.0};
    const auto rows = verify_many_to_one(params, 1.0, 20'000, 654321, b, 4);
    for (const auto& r : rows) {
        if (r.functional == "x^1") {
            CHECK(r.quadrature == doctest::Approx(0.0));
            CHECK(std::abs(r.forward_mean) < 3.0 * r.forward_se);
        }
        if (r.functional == "x^2")
            CHECK(r.quadrature == doctest::Approx(std::exp(1.0)).epsilon(1e-9));
    }
}
