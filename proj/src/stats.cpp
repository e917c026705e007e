#include "portsim/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace portsim {

double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (const double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double sample_sd(const std::vector<double>& xs) {
    if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    bool constant = true;
    for (const double x : xs) constant = constant && x == xs.front();
    if (constant) return 0.0;
    const double m = mean_of(xs);
    double ss = 0.0;
    for (const double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kFpMin = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betacf(a, b, x) / a;
    }
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
    if (df <= 0) throw std::invalid_argument("t distribution needs df > 0");
    const double x = df / (df + t * t);
    const double tail = 0.5 * incomplete_beta(df / 2.0, 0.5, x);
    return t >= 0.0 ? 1.0 - tail : tail;
}

double student_t_quantile(double p, double df) {
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("quantile needs p in (0,1)");
    if (p == 0.5) return 0.0;
    double lo = -1.0, hi = 1.0;
    while (student_t_cdf(lo, df) > p) lo *= 2.0;
    while (student_t_cdf(hi, df) < p) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (student_t_cdf(mid, df) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-13 * std::max(1.0, std::fabs(hi))) break;
    }
    return 0.5 * (lo + hi);
}

double binomial_log_pmf(std::int64_t k, std::int64_t n, double p) {
    if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
    if (p <= 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    if (p >= 1.0) return k == n ? 0.0 : -std::numeric_limits<double>::infinity();
    const double dk = static_cast<double>(k);
    const double dn = static_cast<double>(n);
    return std::lgamma(dn + 1) - std::lgamma(dk + 1) - std::lgamma(dn - dk + 1) +
           dk * std::log(p) + (dn - dk) * std::log1p(-p);
}

double binomial_cdf(std::int64_t k, std::int64_t n, double p) {
    if (k < 0) return 0.0;
    if (k >= n) return 1.0;
    double cdf = 0.0;
    for (std::int64_t i = 0; i <= k; ++i) cdf += std::exp(binomial_log_pmf(i, n, p));
    return std::min(cdf, 1.0);
}

std::pair<std::int64_t, std::int64_t> binomial_acceptance_interval(std::int64_t n,
                                                                   double p,
                                                                   double conf) {
    const double tail = (1.0 - conf) / 2.0;
    // One forward pass: lo is the largest k with P(X < k) <= tail, hi the
    // smallest k with P(X <= k) >= 1 - tail.
    std::int64_t lo = 0, hi = n;
    bool lo_found = false, hi_found = false;
    double cdf = 0.0;
    for (std::int64_t k = 0; k <= n; ++k) {
        const double next = cdf + std::exp(binomial_log_pmf(k, n, p));
        if (!lo_found && next > tail) {
            lo = k;
            lo_found = true;
        }
        if (!hi_found && next >= 1.0 - tail) {
            hi = k;
            hi_found = true;
            break;
        }
        cdf = next;
    }
    return {lo, hi};
}

}  // namespace portsim
