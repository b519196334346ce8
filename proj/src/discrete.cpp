#include "spikes/discrete.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "spikes/path.hpp"

namespace spikes {

namespace {

// P(delta | state): (1 + eps*delta)/2 for state 1, (1 - eps*delta)/2 for state 0.
inline double emission(int state, int delta, double eps) {
  return 0.5 * (1.0 + eps * delta * (state == 1 ? 1.0 : -1.0));
}

}  // namespace

void DiscreteModelParams::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("DiscreteModelParams: epsilon must lie in (0,1)");
  if (!(lambda >= 0.0 && lambda <= 0.5))
    throw std::invalid_argument("DiscreteModelParams: lambda must lie in [0,1/2]");
  if (!(Q0 >= 0.0 && Q0 <= 1.0))
    throw std::invalid_argument("DiscreteModelParams: Q0 must lie in [0,1]");
  if (!(R0 == -1 || R0 == 0 || R0 == 1))
    throw std::invalid_argument("DiscreteModelParams: R0 must be 0, 1 or -1");
}

std::vector<std::uint8_t> simulate_hidden_chain(const DiscreteModelParams& params,
                                                RngStream& stream) {
  std::vector<std::uint8_t> R(params.n_steps + 1);
  std::uint8_t r = params.R0 == -1
                       ? static_cast<std::uint8_t>(stream.uniform() < 0.5)
                       : static_cast<std::uint8_t>(params.R0);
  R[0] = r;
  for (std::size_t n = 0; n < params.n_steps; ++n) {
    if (stream.uniform() < params.lambda) r ^= 1u;
    R[n + 1] = r;
  }
  return R;
}

std::vector<std::int8_t> sample_measurements(const std::vector<std::uint8_t>& R,
                                             double epsilon, RngStream& stream) {
  if (R.empty()) throw std::invalid_argument("sample_measurements: R is empty");
  std::vector<std::int8_t> delta(R.size() - 1);
  for (std::size_t k = 0; k + 1 < R.size(); ++k) {
    const double p_plus = emission(R[k + 1], +1, epsilon);
    delta[k] = static_cast<std::int8_t>(bernoulli_pm1(stream, p_plus));
  }
  return delta;
}

double filter_step(double Q, int delta, double epsilon, double lambda) {
  const double M = (1.0 - lambda) * Q + lambda * (1.0 - Q);
  const double den = 1.0 + 2.0 * epsilon * delta * (M - 0.5);
  assert(den > 0.0);
  const double out = (1.0 + epsilon * delta) * M / den;
  return std::clamp(out, 0.0, 1.0);
}

std::vector<double> run_filter(const std::vector<std::int8_t>& delta,
                               const DiscreteModelParams& params) {
  params.validate();
  std::vector<double> Q(delta.size() + 1);
  Q[0] = params.Q0;
  for (std::size_t n = 0; n < delta.size(); ++n)
    Q[n + 1] = filter_step(Q[n], delta[n], params.epsilon, params.lambda);
  return Q;
}

std::vector<double> smooth(const std::vector<std::int8_t>& delta,
                           const DiscreteModelParams& params) {
  params.validate();
  const std::size_t N = delta.size();
  const double lam = params.lambda, eps = params.epsilon;

  // Forward messages alpha[n] ~ P(R_n, delta_1..n), normalized per step.
  std::vector<double> a0(N + 1), a1(N + 1);
  a0[0] = 1.0 - params.Q0;
  a1[0] = params.Q0;
  for (std::size_t n = 0; n < N; ++n) {
    const int d = delta[n];
    double p0 = ((1.0 - lam) * a0[n] + lam * a1[n]) * emission(0, d, eps);
    double p1 = ((1.0 - lam) * a1[n] + lam * a0[n]) * emission(1, d, eps);
    const double s = p0 + p1;
    a0[n + 1] = p0 / s;
    a1[n + 1] = p1 / s;
  }

  // Backward messages beta[n] ~ P(delta_{n+1}..N | R_n), normalized per step.
  std::vector<double> out(N + 1);
  double b0 = 1.0, b1 = 1.0;
  out[N] = a1[N] * b1 / (a0[N] * b0 + a1[N] * b1);
  for (std::size_t n = N; n-- > 0;) {
    const int d = delta[n];
    const double e0 = emission(0, d, eps), e1 = emission(1, d, eps);
    double nb0 = (1.0 - lam) * e0 * b0 + lam * e1 * b1;
    double nb1 = (1.0 - lam) * e1 * b1 + lam * e0 * b0;
    const double s = nb0 + nb1;
    b0 = nb0 / s;
    b1 = nb1 / s;
    out[n] = a1[n] * b1 / (a0[n] * b0 + a1[n] * b1);
  }
  return out;
}

std::vector<double> brute_force_posterior(const std::vector<std::int8_t>& delta,
                                          const DiscreteModelParams& params,
                                          PosteriorMode mode) {
  params.validate();
  const std::size_t N = delta.size();
  if (N > 20)
    throw std::length_error("brute_force_posterior: n_steps > 20 refused (cost 2^(n+1))");
  const double lam = params.lambda, eps = params.epsilon;

  // w[mask] = joint weight of the hidden prefix encoded bitwise, extended one
  // step at a time.  The filtered marginal at step n reads off the current
  // prefix weights; the smoothed marginals come from the full-length weights.
  std::vector<double> w(2);
  w[0] = 1.0 - params.Q0;
  w[1] = params.Q0;
  std::vector<double> filtered(N + 1);
  {
    const double s = w[0] + w[1];
    filtered[0] = w[1] / s;
  }
  for (std::size_t n = 0; n < N; ++n) {
    const int d = delta[n];
    const double e0 = emission(0, d, eps), e1 = emission(1, d, eps);
    std::vector<double> nw(w.size() * 2);
    for (std::size_t mask = 0; mask < w.size(); ++mask) {
      const int prev = (mask >> n) & 1u;
      const double stay = (1.0 - lam) * w[mask];
      const double flip = lam * w[mask];
      if (prev == 1) {
        nw[mask | (1ull << (n + 1))] = stay * e1;
        nw[mask] = flip * e0;
      } else {
        nw[mask] = stay * e0;
        nw[mask | (1ull << (n + 1))] = flip * e1;
      }
    }
    w.swap(nw);
    double tot = 0.0, on = 0.0;
    for (std::size_t mask = 0; mask < w.size(); ++mask) {
      tot += w[mask];
      if ((mask >> (n + 1)) & 1u) on += w[mask];
    }
    filtered[n + 1] = on / tot;
  }
  if (mode == PosteriorMode::filtered) return filtered;

  std::vector<double> smoothed(N + 1);
  double tot = 0.0;
  for (double x : w) tot += x;
  for (std::size_t n = 0; n <= N; ++n) {
    double on = 0.0;
    for (std::size_t mask = 0; mask < w.size(); ++mask)
      if ((mask >> n) & 1u) on += w[mask];
    smoothed[n] = on / tot;
  }
  return smoothed;
}

DiscreteTrace simulate_trace(const DiscreteModelParams& params, bool with_smoother) {
  params.validate();
  RngStream stream(params.master_seed, params.stream_id);
  DiscreteTrace trace;
  trace.R = simulate_hidden_chain(params, stream);
  trace.delta = sample_measurements(trace.R, params.epsilon, stream);
  trace.Q = run_filter(trace.delta, params);
  if (with_smoother) trace.Qs = smooth(trace.delta, params);
  return trace;
}

void write_csv(std::ostream& os, const DiscreteTrace& trace, std::size_t stride) {
  if (stride == 0) stride = 1;
  const bool has_s = !trace.Qs.empty();
  os << "step,R,delta,Q" << (has_s ? ",Qs" : "") << '\n';
  for (std::size_t n = 0; n < trace.Q.size(); n += stride) {
    os << n << ',' << int(trace.R[n]) << ','
       << (n == 0 ? 0 : int(trace.delta[n - 1])) << ','
       << format_double(trace.Q[n]);
    if (has_s) os << ',' << format_double(trace.Qs[n]);
    os << '\n';
  }
}

std::string to_json(const DiscreteTrace& trace) {
  nlohmann::json j;
  j["R"] = trace.R;
  j["delta"] = trace.delta;
  j["Q"] = trace.Q;
  if (!trace.Qs.empty()) j["Qs"] = trace.Qs;
  return j.dump();
}

}  // namespace spikes
