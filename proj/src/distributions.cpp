#include "portsim/distributions.hpp"

#include <cmath>

namespace portsim {

std::optional<std::string> DistributionSpec::validity_error() const {
    switch (family) {
        case DistFamily::Constant:
            if (a < 0) return "constant value must be >= 0";
            break;
        case DistFamily::Exponential:
            if (a <= 0) return "exponential mean must be > 0";
            break;
        case DistFamily::Triangular:
            if (a < 0) return "triangular min must be >= 0";
            if (!(a <= b && b <= c)) return "triangular requires min <= mode <= max";
            break;
        case DistFamily::Uniform:
            if (a < 0) return "uniform lo must be >= 0";
            if (a > b) return "uniform requires lo <= hi";
            break;
    }
    return std::nullopt;
}

double DistributionSpec::mean() const {
    switch (family) {
        case DistFamily::Constant: return a;
        case DistFamily::Exponential: return a;
        case DistFamily::Triangular: return (a + b + c) / 3.0;
        case DistFamily::Uniform: return (a + b) / 2.0;
    }
    return 0.0;
}

double DistributionSpec::sample(RandomStream& rng) const {
    switch (family) {
        case DistFamily::Constant:
            return a;
        case DistFamily::Exponential:
            return rng.exponential(a);
        case DistFamily::Triangular: {
            if (c == a) return a;
            const double u = rng.uniform();
            const double f = (b - a) / (c - a);
            if (u < f) return a + std::sqrt(u * (c - a) * (b - a));
            return c - std::sqrt((1.0 - u) * (c - a) * (c - b));
        }
        case DistFamily::Uniform:
            return rng.uniform(a, b);
    }
    return 0.0;
}

const char* to_string(DistFamily f) {
    switch (f) {
        case DistFamily::Constant: return "constant";
        case DistFamily::Exponential: return "exponential";
        case DistFamily::Triangular: return "triangular";
        case DistFamily::Uniform: return "uniform";
    }
    return "?";
}

}  // namespace portsim
