#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "spikes/rng.hpp"
#include "spikes/stats.hpp"

using namespace spikes;

TEST_CASE("poisson pmf normalizes and peaks at the mode") {
  const double mu = 7.3;
  double total = 0.0;
  for (std::size_t k = 0; k < 100; ++k) total += poisson_pmf(k, mu);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(poisson_pmf(7, mu) > poisson_pmf(6, mu));
  CHECK(poisson_pmf(7, mu) > poisson_pmf(8, mu));
  CHECK(poisson_pmf(0, 0.0) == 1.0);
  CHECK(poisson_pmf(3, 0.0) == 0.0);
}

TEST_CASE("two-sided poisson p-values") {
  // Observing the mode gives p = 1 (every outcome is at most as likely).
  CHECK(poisson_two_sided_p(3, 3.3) == doctest::Approx(1.0).epsilon(1e-9));
  // Far-tail observation: essentially the one-sided tail.
  const double p = poisson_two_sided_p(30, 10.0);
  CHECK(p < 1e-6);
  // Symmetric sanity: p decreases as the observation moves away from mu.
  CHECK(poisson_two_sided_p(14, 10.0) > poisson_two_sided_p(20, 10.0));
  CHECK(poisson_two_sided_p(0, 0.0) == 1.0);
  CHECK(poisson_two_sided_p(1, 0.0) == 0.0);
}

TEST_CASE("incomplete gamma against closed forms") {
  // gamma_p(1, x) = 1 - exp(-x)
  for (double x : {0.1, 1.0, 3.0, 10.0})
    CHECK(gamma_p(1.0, x) == doctest::Approx(1.0 - std::exp(-x)).epsilon(1e-12));
  // gamma_p(1/2, x) = erf(sqrt(x))
  CHECK(gamma_p(0.5, 1.0) == doctest::Approx(std::erf(1.0)).epsilon(1e-12));
  CHECK(gamma_p(0.5, 4.0) == doctest::Approx(std::erf(2.0)).epsilon(1e-12));
  CHECK(gamma_q(2.5, 0.0) == 1.0);
}

TEST_CASE("chi-square tail matches the exponential form for k=2") {
  for (double x : {0.5, 2.0, 5.0})
    CHECK(chi_square_tail(x, 2.0) == doctest::Approx(std::exp(-0.5 * x)).epsilon(1e-10));
  CHECK(chi_square_tail(-1.0, 3.0) == 1.0);
}

TEST_CASE("KS statistic and p-value") {
  // Exact uniform quantiles have D = 1/(2n).
  std::vector<double> q;
  const std::size_t n = 100;
  for (std::size_t i = 0; i < n; ++i) q.push_back((i + 0.5) / n);
  const auto unif = [](double x) { return x; };
  CHECK(ks_statistic(q, unif, n) == doctest::Approx(1.0 / (2.0 * n)).epsilon(1e-12));
  CHECK(ks_pvalue(ks_statistic(q, unif, n), n) > 0.99);

  // Known critical point: D = 1.358/sqrt(n) sits near p = 0.05.
  const double p = ks_pvalue(1.358 / std::sqrt(double(n)), n);
  CHECK(p > 0.03);
  CHECK(p < 0.07);

  // A sample crammed into [0, 1/2] against uniform is strongly rejected.
  std::vector<double> bad;
  for (std::size_t i = 0; i < n; ++i) bad.push_back(0.5 * (i + 0.5) / n);
  CHECK(ks_pvalue(ks_statistic(bad, unif, n), n) < 1e-6);
}

TEST_CASE("KS with an atom above the data (defective CDF)") {
  // Half the sample sits in an atom at the top; cdf covers only [0, 1/2] of
  // the mass over the recorded points.
  std::vector<double> data;
  const std::size_t n_cont = 50, n_total = 100;
  for (std::size_t i = 0; i < n_cont; ++i) data.push_back((i + 0.5) / n_cont);
  const auto cdf = [](double x) { return 0.5 * x; };  // defective: tops out at 1/2
  const double d = ks_statistic(data, cdf, n_total);
  CHECK(d <= 0.02);
}

TEST_CASE("wilson interval") {
  const WilsonInterval w = wilson_interval(50, 100);
  CHECK(w.p_hat == 0.5);
  CHECK(w.lo == doctest::Approx(0.404).epsilon(0.005));
  CHECK(w.hi == doctest::Approx(0.596).epsilon(0.005));
  CHECK(w.lo < w.p_hat);
  CHECK(w.hi > w.p_hat);
  const WilsonInterval all = wilson_interval(100, 100);
  CHECK(all.hi == 1.0);
  CHECK(all.lo > 0.9);
  CHECK_THROWS_AS(wilson_interval(0, 0), std::invalid_argument);
}

TEST_CASE("pearson correlation") {
  std::vector<double> x = {1, 2, 3, 4, 5};
  std::vector<double> y = {2, 4, 6, 8, 10};
  CHECK(pearson_correlation(x, y) == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<double> z = {5, 4, 3, 2, 1};
  CHECK(pearson_correlation(x, z) == doctest::Approx(-1.0).epsilon(1e-12));
  std::vector<double> c = {1, 1, 1, 1, 1};
  CHECK(pearson_correlation(x, c) == 0.0);
}

TEST_CASE("mean_var basics") {
  const MeanVar mv = mean_var({1.0, 2.0, 3.0, 4.0});
  CHECK(mv.mean == doctest::Approx(2.5));
  CHECK(mv.variance == doctest::Approx(5.0 / 3.0));
  CHECK(mv.stderr_mean() == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
}
