#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace portsim {

double mean_of(const std::vector<double>& xs);
double sample_sd(const std::vector<double>& xs);  // n-1 denominator

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

// Student-t CDF and its quantile (inverse CDF via bisection on the CDF).
double student_t_cdf(double t, double df);
double student_t_quantile(double p, double df);

// Binomial(n, p) log pmf and CDF (direct stable summation).
double binomial_log_pmf(std::int64_t k, std::int64_t n, double p);
double binomial_cdf(std::int64_t k, std::int64_t n, double p);

// Central acceptance region [lo, hi] for X ~ Binomial(n, p): the smallest
// equal-tail region with P(X < lo) <= (1-conf)/2 and P(X > hi) <= (1-conf)/2.
std::pair<std::int64_t, std::int64_t> binomial_acceptance_interval(std::int64_t n,
                                                                   double p,
                                                                   double conf);

}  // namespace portsim
