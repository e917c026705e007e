#pragma once

#include <optional>
#include <string>

#include "portsim/rng.hpp"

namespace portsim {

enum class DistFamily { Constant, Exponential, Triangular, Uniform };

// Non-negative duration distribution for service, dwell and check-interval
// times. Parameter meaning by family:
//   Constant:    a = value
//   Exponential: a = mean
//   Triangular:  a = min, b = mode, c = max
//   Uniform:     a = lo, b = hi
struct DistributionSpec {
    DistFamily family = DistFamily::Constant;
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    static DistributionSpec constant(double v) { return {DistFamily::Constant, v, 0, 0}; }
    static DistributionSpec exponential(double mean) { return {DistFamily::Exponential, mean, 0, 0}; }
    static DistributionSpec triangular(double lo, double mode, double hi) {
        return {DistFamily::Triangular, lo, mode, hi};
    }
    static DistributionSpec uniform(double lo, double hi) { return {DistFamily::Uniform, lo, hi, 0}; }

    // Empty on success, otherwise a description of the violated rule.
    std::optional<std::string> validity_error() const;

    double mean() const;
    double sample(RandomStream& rng) const;
};

const char* to_string(DistFamily f);

}  // namespace portsim
