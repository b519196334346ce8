#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "spikes/discrete.hpp"

using namespace spikes;

namespace {

DiscreteModelParams random_params(std::uint64_t id, std::size_t n) {
  RngStream g(424242, id);
  DiscreteModelParams p;
  p.epsilon = 0.05 + 0.9 * g.uniform();
  p.lambda = 0.5 * g.uniform();
  p.n_steps = n;
  p.Q0 = g.uniform();
  return p;
}

std::vector<std::int8_t> random_delta(std::uint64_t id, std::size_t n) {
  RngStream g(515151, id);
  std::vector<std::int8_t> d(n);
  for (auto& x : d) x = g.uniform() < 0.5 ? std::int8_t{1} : std::int8_t{-1};
  return d;
}

}  // namespace

TEST_CASE("hidden chain flip statistics") {
  DiscreteModelParams p;
  p.lambda = 0.0;
  p.n_steps = 1000;
  p.R0 = 1;
  RngStream s(1, 0);
  auto R = simulate_hidden_chain(p, s);
  for (auto r : R) CHECK(r == 1);

  p.lambda = 0.01;
  p.n_steps = 1000000;
  p.R0 = 0;
  RngStream s2(1, 1);
  R = simulate_hidden_chain(p, s2);
  std::size_t flips = 0;
  for (std::size_t k = 1; k < R.size(); ++k)
    if (R[k] != R[k - 1]) ++flips;
  CHECK(std::abs(double(flips) / p.n_steps - 0.01) < 3e-4);

  p.lambda = 0.5;
  RngStream s3(1, 2);
  R = simulate_hidden_chain(p, s3);
  flips = 0;
  for (std::size_t k = 1; k < R.size(); ++k)
    if (R[k] != R[k - 1]) ++flips;
  CHECK(std::abs(double(flips) / p.n_steps - 0.5) < 3.0 / (2.0 * std::sqrt(double(p.n_steps))));
}

TEST_CASE("measurement outcomes follow the precision law") {
  // R constant 0: fraction of +1 should be (1-eps)/2.
  std::vector<std::uint8_t> R(100001, 0);
  RngStream s(7, 0);
  auto delta = sample_measurements(R, 0.5, s);
  std::size_t plus = 0;
  for (auto d : delta)
    if (d == 1) ++plus;
  const double frac = double(plus) / delta.size();
  CHECK(std::abs(frac - 0.25) < 3.0 * std::sqrt(0.25 * 0.75 / delta.size()));

  // Nearly perfect precision: delta tracks R.
  DiscreteModelParams p;
  p.epsilon = 0.999;
  p.lambda = 0.3;
  p.n_steps = 100000;
  RngStream s2(7, 1);
  auto R2 = simulate_hidden_chain(p, s2);
  auto d2 = sample_measurements(R2, p.epsilon, s2);
  std::size_t mismatch = 0;
  for (std::size_t k = 0; k < d2.size(); ++k)
    if ((d2[k] == 1) != (R2[k + 1] == 1)) ++mismatch;
  CHECK(double(mismatch) / d2.size() < 0.002);
}

TEST_CASE("filter_step hand values") {
  CHECK(filter_step(0.0, +1, 0.7, 0.0) == 0.0);
  CHECK(filter_step(0.0, -1, 0.7, 0.0) == 0.0);
  // eps = 0: pure prior propagation.
  CHECK(filter_step(0.3, +1, 0.0, 0.2) == doctest::Approx(0.8 * 0.3 + 0.2 * 0.7).epsilon(1e-15));
  // Q=1/2, lambda=0, delta=+1, eps=0.4: (1.4*0.5)/1 = 0.7.
  CHECK(filter_step(0.5, +1, 0.4, 0.0) == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("run_filter basics") {
  DiscreteModelParams p;
  p.epsilon = 0.5;
  p.lambda = 0.0;
  p.n_steps = 0;
  p.Q0 = 0.37;
  CHECK(run_filter({}, p) == std::vector<double>{0.37});

  p.Q0 = 0.5;
  p.n_steps = 10;
  std::vector<std::int8_t> delta(10, 1);
  auto Q = run_filter(delta, p);
  for (std::size_t k = 1; k < Q.size(); ++k) CHECK(Q[k] > Q[k - 1]);
  CHECK(Q.back() < 1.0);
}

TEST_CASE("two-path oracle value for n=1") {
  DiscreteModelParams p;
  p.epsilon = 0.5;
  p.lambda = 0.1;
  p.n_steps = 1;
  p.Q0 = 0.5;
  auto q = brute_force_posterior({1}, p, PosteriorMode::filtered);
  CHECK(q[0] == 0.5);
  CHECK(q[1] == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("filter and smoother match the path-enumeration oracle") {
  for (std::uint64_t i = 0; i < 30; ++i) {
    auto p = random_params(i, 12);
    auto delta = random_delta(i, 12);
    auto fast_f = run_filter(delta, p);
    auto exact_f = brute_force_posterior(delta, p, PosteriorMode::filtered);
    auto fast_s = smooth(delta, p);
    auto exact_s = brute_force_posterior(delta, p, PosteriorMode::smoothed);
    for (std::size_t k = 0; k <= 12; ++k) {
      CHECK(std::abs(fast_f[k] - exact_f[k]) <= 1e-12);
      CHECK(std::abs(fast_s[k] - exact_s[k]) <= 1e-12);
    }
  }
}

TEST_CASE("oracle refuses long sequences") {
  DiscreteModelParams p;
  p.n_steps = 21;
  CHECK_THROWS_AS(brute_force_posterior(random_delta(0, 21), p, PosteriorMode::filtered),
                  std::length_error);
}

TEST_CASE("smoother on a frozen chain is constant under uniform evidence") {
  DiscreteModelParams p;
  p.epsilon = 0.6;
  p.lambda = 0.0;
  p.n_steps = 8;
  p.Q0 = 0.5;
  auto Qs = smooth(std::vector<std::int8_t>(8, 1), p);
  for (std::size_t k = 1; k < Qs.size(); ++k)
    CHECK(Qs[k] == doctest::Approx(Qs[0]).epsilon(1e-12));
}

TEST_CASE("smoother with vanishing precision reduces to prior propagation") {
  DiscreteModelParams p;
  p.epsilon = 1e-9;  // evidence carries O(eps) weight
  p.lambda = 0.2;
  p.n_steps = 6;
  p.Q0 = 0.9;
  auto delta = random_delta(3, 6);
  auto Qs = smooth(delta, p);
  auto Qf = run_filter(delta, p);
  for (std::size_t k = 0; k < Qs.size(); ++k)
    CHECK(Qs[k] == doctest::Approx(Qf[k]).epsilon(1e-6));
}

TEST_CASE("one-step update is a martingale under the predictive law (lambda=0)") {
  for (std::uint64_t i = 0; i < 50; ++i) {
    RngStream g(606060, i);
    const double Q = g.uniform();
    const double eps = 0.05 + 0.9 * g.uniform();
    // P(delta=+1) under the predictive distribution with prior Q.
    const double p_plus = (1.0 + eps * (2.0 * Q - 1.0)) / 2.0;
    const double mean = p_plus * filter_step(Q, +1, eps, 0.0) +
                        (1.0 - p_plus) * filter_step(Q, -1, eps, 0.0);
    CHECK(mean == doctest::Approx(Q).epsilon(1e-13));
  }
}

TEST_CASE("outputs stay inside [0,1] for random inputs") {
  for (std::uint64_t i = 0; i < 20; ++i) {
    auto p = random_params(i + 100, 200);
    auto delta = random_delta(i + 100, 200);
    for (double q : run_filter(delta, p)) {
      CHECK(q >= 0.0);
      CHECK(q <= 1.0);
    }
    for (double q : smooth(delta, p)) {
      CHECK(q >= 0.0);
      CHECK(q <= 1.0);
    }
  }
}

TEST_CASE("spikes appear at fixed epsilon in long runs") {
  DiscreteModelParams p;
  p.epsilon = 0.9;
  p.lambda = 1e-4;
  p.n_steps = 1000000;
  p.master_seed = 2718;
  const DiscreteTrace trace = simulate_trace(p, false);
  std::size_t excursions = 0;
  for (std::size_t k = 1; k < trace.Q.size(); ++k) {
    if (trace.R[k] != trace.R[k - 1]) continue;
    if (trace.R[k] == 0 && trace.Q[k] > 0.2 && trace.Q[k - 1] <= 0.2) ++excursions;
  }
  CHECK(excursions >= 1);
}

TEST_CASE("trace serialization shape") {
  DiscreteModelParams p;
  p.epsilon = 0.4;
  p.lambda = 0.1;
  p.n_steps = 5;
  const DiscreteTrace t = simulate_trace(p, true);
  CHECK(t.R.size() == 6);
  CHECK(t.delta.size() == 5);
  CHECK(t.Q.size() == 6);
  CHECK(t.Qs.size() == 6);
  std::ostringstream os;
  write_csv(os, t);
  CHECK(os.str().substr(0, 17) == "step,R,delta,Q,Qs");
}
