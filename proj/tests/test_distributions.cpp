#include <doctest.h>

#include <cmath>

#include "portsim/distributions.hpp"

using namespace portsim;

TEST_CASE("constant distribution returns its value") {
    RandomStream rng = make_stream(1, 0, "dist");
    const auto d = DistributionSpec::constant(3.25);
    for (int i = 0; i < 10; ++i) CHECK(d.sample(rng) == 3.25);
    CHECK(d.mean() == 3.25);
}

TEST_CASE("triangular samples stay in [min, max] and match the mean") {
    RandomStream rng = make_stream(2, 0, "dist");
    const auto d = DistributionSpec::triangular(2.0, 5.0, 11.0);
    double sum = 0.0;
    constexpr int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = d.sample(rng);
        CHECK(x >= 2.0);
        CHECK(x <= 11.0);
        sum += x;
    }
    CHECK(std::fabs(sum / n - (2.0 + 5.0 + 11.0) / 3.0) < 0.02);
}

TEST_CASE("uniform samples stay in range") {
    RandomStream rng = make_stream(3, 0, "dist");
    const auto d = DistributionSpec::uniform(1.0, 4.0);
    double sum = 0.0;
    constexpr int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double x = d.sample(rng);
        CHECK(x >= 1.0);
        CHECK(x < 4.0);
        sum += x;
    }
    CHECK(std::fabs(sum / n - 2.5) < 0.02);
}

TEST_CASE("parameter validity rules") {
    CHECK(!DistributionSpec::triangular(1, 2, 3).validity_error());
    CHECK(DistributionSpec::triangular(3, 2, 1).validity_error());
    CHECK(DistributionSpec::triangular(-1, 0, 1).validity_error());
    CHECK(DistributionSpec::exponential(0).validity_error());
    CHECK(!DistributionSpec::exponential(0.1).validity_error());
    CHECK(DistributionSpec::uniform(4, 1).validity_error());
    CHECK(DistributionSpec::constant(-2).validity_error());
    CHECK(!DistributionSpec::constant(0).validity_error());
}

TEST_CASE("degenerate triangular collapses to a point") {
    RandomStream rng = make_stream(4, 0, "dist");
    const auto d = DistributionSpec::triangular(2.0, 2.0, 2.0);
    CHECK(d.sample(rng) == 2.0);
}
