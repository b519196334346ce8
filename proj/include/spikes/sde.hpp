#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "spikes/grid.hpp"
#include "spikes/path.hpp"
#include "spikes/rng.hpp"

namespace spikes {

enum class SdeMode { innovation, physical };

// Continuum toy model: hidden telegraph R_t (flip rate lambda_tilde/2 per
// direction), signal X_t, and the filter Q_t.
struct SdeParams {
  double lambda_tilde = 1.0;
  double gamma = 1.0;
  double dt = 1e-3;
  double T = 1.0;
  double Q0 = 0.5;
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;
  int R0 = -1;  // -1 draws uniformly
  SdeMode mode = SdeMode::physical;

  void validate() const;
  std::size_t n_steps() const;
  TimeGrid grid() const { return TimeGrid(0.0, dt, n_steps()); }
  // Spike-resolving runs need gamma*dt <= 0.05 (excursions live on the
  // 1/gamma time scale).
  bool resolves_spikes() const { return gamma * dt <= 0.05; }
};

struct CoupledTrace {
  TimeGrid grid;
  std::vector<std::uint8_t> R;  // telegraph, n_steps+1
  std::vector<double> X;        // integrated signal, n_steps+1
  std::vector<double> Q;        // filter, n_steps+1
  double clamp_mass = 0.0;      // total distance the filter was clamped into [0,1]
};

// Fixed-grid telegraph: per-step flip probability flip_rate*dt.
// Refuses coarse grids with flip_rate*dt > 0.1.
std::vector<std::uint8_t> simulate_telegraph(double flip_rate, const TimeGrid& grid,
                                             int R0, RngStream& stream);

struct InnovationResult {
  ScalarPath q;
  double clamp_mass = 0.0;
};

// Euler-Maruyama path of
//   dQ = lambda_tilde*(1/2 - Q) dt + sqrt(gamma)*Q*(1-Q) dW,
// clamped to [0,1] after each step; clamp distance is accumulated.
InnovationResult integrate_innovation(const SdeParams& params);

// Joint physical simulation: the telegraph drives the signal
//   dX = (sqrt(gamma)/2)*(2R-1) dt + dB
// and the filter reads X alone:
//   dQ = lambda_tilde*(1/2 - Q) dt
//        + sqrt(gamma)*Q*(1-Q)*(dX - (sqrt(gamma)/2)*(2Q-1) dt).
CoupledTrace simulate_joint(const SdeParams& params);

// Same as simulate_joint but R follows a deterministic flip schedule while the
// filter still assumes rate lambda_tilde.  flip_times must be strictly
// increasing and lie within [0,T].
CoupledTrace simulate_joint_scheduled(const SdeParams& params,
                                      const std::vector<double>& flip_times);

// Runs the filter over a recorded signal path (n_steps+1 cumulative values).
// The filter is a deterministic functional of X alone; simulate_joint produces
// exactly this path given its own X.
std::vector<double> filter_on_signal(const std::vector<double>& X, const SdeParams& params);

// Incremental joint stepper for long runs that must not store the whole path.
class JointStepper {
 public:
  JointStepper(const SdeParams& params, RngStream stream);
  // Advances one step; returns the new Q.  The telegraph flips with
  // probability (lambda_tilde/2)*dt per step unless a schedule is set.
  double step();
  void set_schedule(std::vector<double> flip_times);  // consumed in order

  int r() const { return r_; }
  double q() const { return q_; }
  double x() const { return x_; }
  double t() const { return static_cast<double>(k_) * p_.dt; }
  double clamp_mass() const { return clamp_mass_; }

 private:
  SdeParams p_;
  RngStream rng_;
  int r_;
  double q_;
  double x_ = 0.0;
  std::uint64_t k_ = 0;
  double clamp_mass_ = 0.0;
  bool scheduled_ = false;
  std::vector<double> schedule_;
  std::size_t next_flip_ = 0;
};

// Columns: time,R,X,Q.
void write_csv(std::ostream& os, const CoupledTrace& trace, std::size_t stride = 1);

}  // namespace spikes
