#include <doctest.h>

#include <cmath>
#include <vector>

#include "viphash/rng.hpp"
#include "viphash/sense.hpp"

using namespace viphash;

TEST_CASE("accumulators update exactly") {
    SenseAccumulator acc;
    acc.record(1);
    acc.record(1);
    acc.record(1);
    CHECK(acc.cumulative_displacement() == 3);
    CHECK(acc.cumulative_displacement_sq() == 3);
    CHECK(acc.count() == 3);

    acc.reset();
    acc.record(2);
    acc.record(3);
    CHECK(acc.cumulative_displacement() == 5);
    CHECK(acc.cumulative_displacement_sq() == 13);
    CHECK(acc.count() == 2);
}

TEST_CASE("finalize: zero variance gives zero width") {
    SenseAccumulator acc;
    for (int i = 0; i < 1000; ++i) acc.record(1);
    auto s = acc.finalize();
    CHECK(s.u == 1.0);
    CHECK(s.w == 0.0);
}

TEST_CASE("finalize computes the documented estimators") {
    SenseAccumulator acc(0.95);
    acc.record(2);
    acc.record(3);
    auto s = acc.finalize();
    CHECK(s.u == doctest::Approx(2.5).epsilon(1e-12));
    // v = 13/1 - 25/2 = 0.5; w = sqrt(-2*0.5*ln(0.05)/2)
    CHECK(s.w == doctest::Approx(1.223873415340408).epsilon(1e-9));
}

TEST_CASE("interval half-width formula") {
    CHECK(interval_half_width(4.0, 1000, 0.95) == doctest::Approx(0.154809102408).epsilon(1e-9));
    CHECK(interval_half_width(0.0, 10, 0.95) == 0.0);
}

TEST_CASE("finalize needs two samples") {
    SenseAccumulator acc;
    CHECK_FALSE(acc.can_finalize());
    CHECK_THROWS_AS(acc.finalize(), InsufficientSamples);
    acc.record(4);
    CHECK_THROWS_AS(acc.finalize(), InsufficientSamples);
    acc.record(4);
    CHECK_NOTHROW(acc.finalize());
}

TEST_CASE("change detection compares interval gaps") {
    CHECK(has_distribution_changed({2.0, 0.1}, {2.5, 0.2}));
    CHECK_FALSE(has_distribution_changed({2.0, 0.3}, {2.4, 0.3}));
    CHECK_FALSE(has_distribution_changed({2.0, 0.1}, {2.0, 0.1}));
}

TEST_CASE("estimators match a two-pass oracle") {
    Xoshiro256 rng(11);
    std::vector<std::uint64_t> samples;
    SenseAccumulator acc(0.95);
    for (int i = 0; i < 5000; ++i) {
        std::uint64_t d = 1 + rng.next_below(9);
        samples.push_back(d);
        acc.record(d);
    }
    double mean = 0.0;
    for (auto d : samples) mean += static_cast<double>(d);
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (auto d : samples) {
        double e = static_cast<double>(d) - mean;
        var += e * e;
    }
    var /= static_cast<double>(samples.size() - 1);

    auto s = acc.finalize();
    CHECK(s.u == doctest::Approx(mean).epsilon(1e-12));
    CHECK(s.w == doctest::Approx(interval_half_width(var, samples.size(), 0.95)).epsilon(1e-9));
}

TEST_CASE("calibration: |u - mu| <= w in at least 90% of windows") {
    // fixed discrete distribution over displacements 1..4
    const double probs[4] = {0.55, 0.25, 0.15, 0.05};
    const double mu = 1 * 0.55 + 2 * 0.25 + 3 * 0.15 + 4 * 0.05;
    Xoshiro256 rng(31);
    int covered = 0;
    const int windows = 300;
    for (int t = 0; t < windows; ++t) {
        SenseAccumulator acc(0.95);
        for (int i = 0; i < 1000; ++i) {
            double u = rng.next_double();
            std::uint64_t d = u < probs[0] ? 1 : u < probs[0] + probs[1] ? 2 : u < 0.95 ? 3 : 4;
            acc.record(d);
        }
        auto s = acc.finalize();
        if (std::abs(s.u - mu) <= s.w) ++covered;
    }
    CHECK(covered >= static_cast<int>(0.9 * windows));
}
