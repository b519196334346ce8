#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "spikes/rng.hpp"

namespace spikes {

// Two-state hidden chain observed through blurry binary outcomes.
// epsilon is the measurement precision, lambda the per-step flip probability.
struct DiscreteModelParams {
  double epsilon = 0.5;
  double lambda = 0.0;
  std::size_t n_steps = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;
  int R0 = -1;      // hidden start in {0,1}; -1 draws it uniformly
  double Q0 = 0.5;  // prior probability of state 1

  void validate() const;
};

struct DiscreteTrace {
  std::vector<std::uint8_t> R;   // n_steps+1 hidden states
  std::vector<std::int8_t> delta;  // n_steps outcomes, +-1; delta[k] reflects R[k+1]
  std::vector<double> Q;           // n_steps+1 filtered estimates
  std::vector<double> Qs;          // empty, or n_steps+1 smoothed estimates
};

enum class PosteriorMode { filtered, smoothed };

std::vector<std::uint8_t> simulate_hidden_chain(const DiscreteModelParams& params,
                                                RngStream& stream);

// delta[k] is drawn conditionally on R[k+1]: the photo taken after the
// (k+1)-th hop reflects the state after that hop, matching the filter's
// propagate-then-condition order.
std::vector<std::int8_t> sample_measurements(const std::vector<std::uint8_t>& R,
                                             double epsilon, RngStream& stream);

// One Bayes update: propagate the prior through the flip kernel, then
// condition on one outcome.  Exact rational form; the denominator cannot
// vanish for epsilon < 1.
double filter_step(double Q, int delta, double epsilon, double lambda);

std::vector<double> run_filter(const std::vector<std::int8_t>& delta,
                               const DiscreteModelParams& params);

// Forward-backward smoother, messages normalized per step so that 1e6-step
// sequences do not underflow.
std::vector<double> smooth(const std::vector<std::int8_t>& delta,
                           const DiscreteModelParams& params);

// Exact posterior marginals by enumerating all 2^(n+1) hidden paths.
// Test oracle; refuses n_steps > 20.
std::vector<double> brute_force_posterior(const std::vector<std::int8_t>& delta,
                                          const DiscreteModelParams& params,
                                          PosteriorMode mode);

DiscreteTrace simulate_trace(const DiscreteModelParams& params, bool with_smoother);

// Columns: step,R,delta,Q[,Qs].  delta at step 0 is written as 0 (no outcome).
void write_csv(std::ostream& os, const DiscreteTrace& trace, std::size_t stride = 1);
std::string to_json(const DiscreteTrace& trace);

}  // namespace spikes
