#include <doctest.h>

#include <cmath>
#include <vector>

#include "bbm/offspring.hpp"
#include "bbm/stats.hpp"

using namespace bbm;

TEST_CASE("law validation") {
    CHECK_THROWS_AS(OffspringLaw({0.5, 0.4}), std::invalid_argument);
    CHECK_THROWS_AS(OffspringLaw({1.5, -0.5}), std::invalid_argument);
    CHECK_THROWS_AS(OffspringLaw({1.0}).size_biased(), std::invalid_argument);
    const OffspringLaw binary = OffspringLaw::binary();
    CHECK(binary.mean() == 2.0);
}

TEST_CASE("point mass sampling is deterministic") {
    const OffspringLaw law = OffspringLaw::point_mass(2);
    RandomStream rng = RandomStream::for_particle(1, 2);
    for (int i = 0; i < 100; ++i) CHECK(law.sample(rng) == 2);
}

TEST_CASE("empirical frequencies within 3 sigma") {
    const OffspringLaw law({0.25, 0.0, 0.0, 0.75});
    RandomStream rng = RandomStream::for_particle(7, 13);
    const int n = 1'000'000;
    int zeros = 0;
    for (int i = 0; i < n; ++i)
        if (law.sample(rng) == 0) ++zeros;
    const double p = 0.25;
    const double sigma = std::sqrt(p * (1 - p) * n);
    CHECK(std::abs(zeros - p * n) < 3.0 * sigma);
}

TEST_CASE("sample mean matches law mean") {
    const OffspringLaw law({0.0, 0.5, 0.0, 0.5});
    CHECK(law.mean() == 2.0);
    RandomStream rng = RandomStream::for_particle(11, 17);
    const int n = 1'000'000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double k = law.sample(rng);
        sum += k;
        sumsq += k * k;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sumsq / n - mean * mean) / n);
    CHECK(std::abs(mean - 2.0) < 3.0 * se);
}

TEST_CASE("size biasing") {
    const auto sb2 = OffspringLaw::point_mass(2).size_biased();
    CHECK(sb2.probs[2] == doctest::Approx(1.0));

    const auto sb = OffspringLaw({0.0, 0.5, 0.0, 0.5}).size_biased();
    CHECK(sb.probs[1] == doctest::Approx(0.25));
    CHECK(sb.probs[3] == doctest::Approx(0.75));

    const auto sb0 = OffspringLaw({0.3, 0.0, 0.7}).size_biased();
    CHECK(sb0.probs[0] == 0.0);
}

TEST_CASE("size-biased law normalization and mean E[L^2]/mu") {
    const OffspringLaw law({0.1, 0.2, 0.3, 0.4});
    const auto sb = law.size_biased();
    double total = 0.0, sb_mean = 0.0, second = 0.0;
    for (std::size_t k = 0; k < sb.probs.size(); ++k) {
        total += sb.probs[k];
        sb_mean += double(k) * sb.probs[k];
        second += double(k) * double(k) * law.probs()[k];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sb_mean == doctest::Approx(second / law.mean()).epsilon(1e-12));
}

TEST_CASE("llogl moment") {
    const double log2 = std::log(2.0);
    CHECK(OffspringLaw::point_mass(2).llogl_moment(1.0) ==
          doctest::Approx(2.0 * log2 * log2).epsilon(1e-12));
    CHECK(OffspringLaw::point_mass(1).llogl_moment(3.0) == 0.0);
    CHECK(OffspringLaw::point_mass(2).llogl_moment(0.0) ==
          doctest::Approx(2.0 * log2).epsilon(1e-12));
    CHECK_THROWS_AS(OffspringLaw::binary().llogl_moment(-1.0),
                    std::invalid_argument);
}

TEST_CASE("chi-square goodness of fit, three reference laws") {
    const std::vector<OffspringLaw> laws{
        OffspringLaw({0.25, 0.0, 0.0, 0.75}),
        OffspringLaw({0.0, 0.5, 0.0, 0.5}),
        OffspringLaw({0.1, 0.2, 0.3, 0.4}),
    };
    std::uint64_t key = 101;
    for (const auto& law : laws) {
        RandomStream rng = RandomStream::for_particle(23, key++);
        const std::size_t n = 1'000'000;
        std::vector<std::size_t> counts(law.probs().size(), 0);
        for (std::size_t i = 0; i < n; ++i)
            ++counts[std::size_t(law.sample(rng))];
        int dof = 0;
        const double stat =
            stats::chi2_statistic(counts, law.probs(), n, &dof);
        CHECK(stat < stats::chi2_critical_1e3(dof));
    }
}
