#include "spikes/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spikes {

namespace {

double log_poisson_pmf(std::size_t k, double mu) {
  return -mu + static_cast<double>(k) * std::log(mu) - std::lgamma(static_cast<double>(k) + 1.0);
}

}  // namespace

double poisson_pmf(std::size_t k, double mu) {
  if (!(mu >= 0.0)) throw std::invalid_argument("poisson_pmf: mu must be >= 0");
  if (mu == 0.0) return k == 0 ? 1.0 : 0.0;
  return std::exp(log_poisson_pmf(k, mu));
}

double poisson_two_sided_p(std::size_t observed, double mu) {
  if (!(mu >= 0.0)) throw std::invalid_argument("poisson_two_sided_p: mu must be >= 0");
  if (mu == 0.0) return observed == 0 ? 1.0 : 0.0;
  const double p_obs = poisson_pmf(observed, mu) * (1.0 + 1e-12);
  // Sum pmf(k) over all k with pmf(k) <= pmf(observed); the pmf is unimodal,
  // so walk both tails away from the mode.
  const std::size_t mode = static_cast<std::size_t>(std::floor(mu));
  const std::size_t kmax =
      static_cast<std::size_t>(std::ceil(mu + 40.0 * std::sqrt(mu) + 40.0));
  double p = 0.0;
  for (std::size_t k = 0; k <= kmax; ++k) {
    const double f = poisson_pmf(k, mu);
    if (f <= p_obs) p += f;
    if (k > mode && f < 1e-18) break;
  }
  return std::min(p, 1.0);
}

// Incomplete gamma by series (x < a+1) or continued fraction (otherwise).
double gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw std::invalid_argument("gamma_p: bad arguments");
  if (x == 0.0) return 0.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a, sum = term, ap = a;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - lg);
  }
  // Lentz continued fraction for Q, return 1-Q.
  double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  const double q = std::exp(-x + a * std::log(x) - lg) * h;
  return 1.0 - q;
}

double gamma_q(double a, double x) { return 1.0 - gamma_p(a, x); }

double chi_square_tail(double x, double k) {
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * k, 0.5 * x);
}

double ks_statistic(const std::vector<double>& sorted_data,
                    const std::function<double(double)>& cdf, std::size_t n_total) {
  if (n_total == 0) throw std::invalid_argument("ks_statistic: empty sample");
  const double n = static_cast<double>(n_total);
  double d = 0.0;
  for (std::size_t i = 0; i < sorted_data.size(); ++i) {
    const double f = cdf(sorted_data[i]);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max(d, std::max(std::abs(hi - f), std::abs(lo - f)));
  }
  return d;
}

double ks_pvalue(double d, std::size_t n) {
  if (d <= 0.0) return 1.0;
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

WilsonInterval wilson_interval(std::size_t successes, std::size_t n, double z) {
  if (n == 0) throw std::invalid_argument("wilson_interval: n must be > 0");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {p, std::max(0.0, center - half), std::min(1.0, center + half)};
}

double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("pearson_correlation: need two equal-length samples");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double MeanVar::sd() const { return std::sqrt(variance); }

double MeanVar::stderr_mean() const {
  return n > 0 ? std::sqrt(variance / static_cast<double>(n)) : 0.0;
}

MeanVar mean_var(const std::vector<double>& x) {
  MeanVar mv;
  mv.n = x.size();
  if (x.empty()) return mv;
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  mv.mean = m;
  mv.variance = x.size() > 1 ? s / static_cast<double>(x.size() - 1) : 0.0;
  return mv;
}

}  // namespace spikes
