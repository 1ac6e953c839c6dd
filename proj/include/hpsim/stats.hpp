#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace hpsim {

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t reps = 0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::vector<std::string> flags;

    bool has_flag(const std::string& f) const;
    void add_flag(const std::string& f);
};

// Pairwise summation over a fixed split tree; result depends only on order.
double pairwise_sum(std::span<const double> xs);

// stderr is the population standard deviation divided by sqrt(reps).
McEstimate mc_estimate(std::span<const double> samples);

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    int dof = 0;
};

// Kolmogorov limiting distribution: P[K > lambda].
double kolmogorov_survival(double lambda);
// P[D_n < d] for the one-sample statistic, exact (Marsaglia-Tsang-Wang).
double ks_exact_cdf(int n, double d);

// One-sample KS. p-value exact for n < 35, asymptotic above.
TestResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);
// Two-sample KS with asymptotic p-value.
TestResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// Chi-square goodness of fit of integer counts against Poisson(mean).
// Adjacent cells are pooled until each expected count is at least min_expected.
TestResult chi_square_poisson(std::span<const std::uint64_t> counts, double mean,
                              double min_expected = 5.0);

double poisson_pmf(std::uint64_t k, double mean);

enum class TailSide { Upper, Lower };

// P[Poi(lambda) >= lambda + x] or P[Poi(lambda) <= lambda - x].
double poisson_tail_exact(double lambda, double x, TailSide side);
// exp(-x^2 / (2 (x + lambda)))
double poisson_tail_bound(double lambda, double x);
// h(x) = 2((1+x)log(1+x) - x)/x^2 on [-1, inf), h(-1) = 2, h(0) = 1.
double chernoff_h(double x);
// g(x) = (1 + x) h(x)
double chernoff_g(double x);
// x^2/(2 lambda) * h(+-x/lambda)
double chernoff_exponent(double lambda, double x, TailSide side);

}  // namespace hpsim
