#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace spikes {

double poisson_pmf(std::size_t k, double mu);

// Exact two-sided p-value: total probability of outcomes no more likely than
// the observed count.
double poisson_two_sided_p(std::size_t observed, double mu);

// Upper tail of the chi-square distribution with k degrees of freedom.
double chi_square_tail(double x, double k);

// Regularized incomplete gamma functions.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// One-sample Kolmogorov-Smirnov statistic against a (possibly defective) CDF
// evaluated at the sorted sample points.  `data` must be sorted ascending;
// `n_total` may exceed data.size() when part of the sample sits in an atom
// above every data point.
double ks_statistic(const std::vector<double>& sorted_data,
                    const std::function<double(double)>& cdf,
                    std::size_t n_total);

// Asymptotic Kolmogorov p-value with the Stephens small-sample correction.
double ks_pvalue(double d, std::size_t n);

struct WilsonInterval {
  double p_hat = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

WilsonInterval wilson_interval(std::size_t successes, std::size_t n, double z = 1.959963984540054);

double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y);

struct MeanVar {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double sd() const;
  double stderr_mean() const;
};

MeanVar mean_var(const std::vector<double>& x);

}  // namespace spikes
