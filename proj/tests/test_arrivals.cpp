#include <doctest.h>

#include <cmath>
#include <vector>

#include "portsim/network.hpp"

using namespace portsim;

namespace {

ArrivalSpec flat_spec(double per_hour) {
    ArrivalSpec a;
    a.base_rate_per_hour = per_hour;
    a.finalize();
    return a;
}

}  // namespace

TEST_CASE("annual volume at the default rate lands on ~900k") {
    // 102.74/h over 8760 h: the expectation of the Poisson count.
    CHECK(102.74 * 8760 == doctest::Approx(900002.4));
}

TEST_CASE("flat profile is an exact exponential with the right mean") {
    const ArrivalSpec spec = flat_spec(102.74);
    RandomStream rng = make_stream(6, 0, "arr");
    double sum = 0.0;
    constexpr int n = 100000;
    for (int i = 0; i < n; ++i) {
        const auto gap = sample_interarrival(spec, 0.0, rng);
        REQUIRE(gap.has_value());
        sum += *gap;
    }
    const double mean_gap = 60.0 / 102.74;  // minutes
    CHECK(std::fabs(sum / n - mean_gap) < 4 * mean_gap / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("zero rate yields the no-arrivals sentinel") {
    RandomStream rng = make_stream(6, 0, "arr");
    CHECK(!sample_interarrival(flat_spec(0.0), 0.0, rng).has_value());

    ArrivalSpec zeros = flat_spec(10.0);
    zeros.weekly_profile.assign(168, 0.0);
    zeros.finalize();
    CHECK(!sample_interarrival(zeros, 0.0, rng).has_value());
}

TEST_CASE("two-level profile reproduces the per-hour Poisson means") {
    // Even hours at x2, odd hours at x0.5: the thinning sampler must hit the
    // analytic mean of every one of the 168 weekly buckets.
    ArrivalSpec spec;
    spec.base_rate_per_hour = 30.0;
    spec.weekly_profile.assign(168, 0.5);
    for (int h = 0; h < 168; h += 2) spec.weekly_profile[h] = 2.0;
    spec.finalize();

    RandomStream rng = make_stream(8, 0, "arr");
    constexpr int weeks = 300;
    const double horizon = weeks * 168.0 * 60.0;
    std::vector<long> bucket(168, 0);
    double t = 0.0;
    for (;;) {
        const auto gap = sample_interarrival(spec, t, rng);
        REQUIRE(gap.has_value());
        t += *gap;
        if (t > horizon) break;
        ++bucket[static_cast<std::size_t>(t / 60.0) % 168];
    }
    for (int h = 0; h < 168; ++h) {
        // Analytic Poisson mean per weekly bucket.
        const double expected = weeks * 30.0 * spec.weekly_profile[h];
        CHECK(std::fabs(bucket[h] - expected) < 3.9 * std::sqrt(expected));
    }
}

TEST_CASE("zero-rate hours never produce arrivals") {
    ArrivalSpec spec;
    spec.base_rate_per_hour = 30.0;
    spec.weekly_profile.assign(168, 0.0);
    for (int h = 0; h < 168; h += 2) spec.weekly_profile[h] = 2.0;
    spec.finalize();

    RandomStream rng = make_stream(9, 0, "arr");
    double t = 0.0;
    for (int i = 0; i < 200000; ++i) {
        const auto gap = sample_interarrival(spec, t, rng);
        REQUIRE(gap.has_value());
        t += *gap;
        CHECK(static_cast<long>(t / 60.0) % 2 == 0);
    }
}

TEST_CASE("arrival validation catches bad specs") {
    ArrivalSpec a = flat_spec(10.0);
    a.weekly_profile.assign(100, 1.0);
    CHECK(!validate_arrivals(a).empty());

    ArrivalSpec b = flat_spec(10.0);
    b.clandestine_probability = 1.5;
    CHECK(!validate_arrivals(b).empty());

    ArrivalSpec c = flat_spec(10.0);
    c.commodity_labels = {"x", "y"};
    c.commodity_weights = {0.5, 0.6};
    CHECK(!validate_arrivals(c).empty());

    ArrivalSpec d = flat_spec(10.0);
    CHECK(validate_arrivals(d).empty());
}
