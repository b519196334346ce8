#include "spikes/sde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spikes {

void SdeParams::validate() const {
  if (!(lambda_tilde >= 0.0)) throw std::invalid_argument("SdeParams: lambda_tilde must be >= 0");
  if (!(gamma >= 0.0)) throw std::invalid_argument("SdeParams: gamma must be >= 0");
  if (!(dt > 0.0)) throw std::invalid_argument("SdeParams: dt must be > 0");
  if (!(T > 0.0)) throw std::invalid_argument("SdeParams: T must be > 0");
  if (!(Q0 >= 0.0 && Q0 <= 1.0)) throw std::invalid_argument("SdeParams: Q0 must lie in [0,1]");
  if (!(R0 == -1 || R0 == 0 || R0 == 1)) throw std::invalid_argument("SdeParams: R0 must be 0, 1 or -1");
}

std::size_t SdeParams::n_steps() const {
  return static_cast<std::size_t>(std::llround(T / dt));
}

std::vector<std::uint8_t> simulate_telegraph(double flip_rate, const TimeGrid& grid,
                                             int R0, RngStream& stream) {
  if (!(flip_rate >= 0.0)) throw std::invalid_argument("simulate_telegraph: flip_rate must be >= 0");
  if (flip_rate * grid.dt > 0.1)
    throw std::invalid_argument("simulate_telegraph: flip_rate*dt > 0.1, grid too coarse");
  const double p = flip_rate * grid.dt;
  std::vector<std::uint8_t> R(grid.n_points());
  std::uint8_t r = R0 == -1 ? static_cast<std::uint8_t>(stream.uniform() < 0.5)
                            : static_cast<std::uint8_t>(R0);
  R[0] = r;
  for (std::size_t k = 0; k < grid.n_steps; ++k) {
    if (stream.uniform() < p) r ^= 1u;
    R[k + 1] = r;
  }
  return R;
}

InnovationResult integrate_innovation(const SdeParams& params) {
  params.validate();
  RngStream stream(params.master_seed, params.stream_id);
  const TimeGrid grid = params.grid();
  const double sg = std::sqrt(params.gamma);
  const double sdt = std::sqrt(params.dt);
  std::vector<double> q(grid.n_points());
  double clamp_mass = 0.0;
  double Q = params.Q0;
  q[0] = Q;
  for (std::size_t k = 0; k < grid.n_steps; ++k) {
    const double dW = stream.normal() * sdt;
    Q += params.lambda_tilde * (0.5 - Q) * params.dt + sg * Q * (1.0 - Q) * dW;
    const double c = std::clamp(Q, 0.0, 1.0);
    clamp_mass += std::abs(Q - c);
    Q = c;
    q[k + 1] = Q;
  }
  return {ScalarPath(grid, std::move(q), "Q"), clamp_mass};
}

JointStepper::JointStepper(const SdeParams& params, RngStream stream)
    : p_(params), rng_(stream) {
  p_.validate();
  r_ = p_.R0 == -1 ? (rng_.uniform() < 0.5 ? 1 : 0) : p_.R0;
  q_ = p_.Q0;
}

void JointStepper::set_schedule(std::vector<double> flip_times) {
  for (std::size_t i = 0; i + 1 < flip_times.size(); ++i)
    if (!(flip_times[i] < flip_times[i + 1]))
      throw std::invalid_argument("JointStepper: flip times must be strictly increasing");
  for (double t : flip_times)
    if (!(t >= 0.0 && t <= p_.T))
      throw std::invalid_argument("JointStepper: flip times must lie within [0,T]");
  scheduled_ = true;
  schedule_ = std::move(flip_times);
  next_flip_ = 0;
}

double JointStepper::step() {
  const double dt = p_.dt;
  const double sg = std::sqrt(p_.gamma);
  const double t_next = static_cast<double>(k_ + 1) * dt;
  if (scheduled_) {
    while (next_flip_ < schedule_.size() && schedule_[next_flip_] <= t_next) {
      r_ ^= 1;
      ++next_flip_;
    }
  } else {
    if (rng_.uniform() < 0.5 * p_.lambda_tilde * dt) r_ ^= 1;
  }
  const double dB = rng_.normal() * std::sqrt(dt);
  const double dX = 0.5 * sg * (2.0 * r_ - 1.0) * dt + dB;
  const double innov = dX - 0.5 * sg * (2.0 * q_ - 1.0) * dt;
  double Q = q_ + p_.lambda_tilde * (0.5 - q_) * dt + sg * q_ * (1.0 - q_) * innov;
  const double c = std::clamp(Q, 0.0, 1.0);
  clamp_mass_ += std::abs(Q - c);
  q_ = c;
  x_ += dX;
  ++k_;
  return q_;
}

namespace {

CoupledTrace run_joint(const SdeParams& params, const std::vector<double>* schedule) {
  params.validate();
  const TimeGrid grid = params.grid();
  JointStepper stepper(params, RngStream(params.master_seed, params.stream_id));
  if (schedule) stepper.set_schedule(*schedule);
  CoupledTrace trace;
  trace.grid = grid;
  trace.R.resize(grid.n_points());
  trace.X.resize(grid.n_points());
  trace.Q.resize(grid.n_points());
  trace.R[0] = static_cast<std::uint8_t>(stepper.r());
  trace.X[0] = 0.0;
  trace.Q[0] = stepper.q();
  for (std::size_t k = 0; k < grid.n_steps; ++k) {
    stepper.step();
    trace.R[k + 1] = static_cast<std::uint8_t>(stepper.r());
    trace.X[k + 1] = stepper.x();
    trace.Q[k + 1] = stepper.q();
  }
  trace.clamp_mass = stepper.clamp_mass();
  return trace;
}

}  // namespace

CoupledTrace simulate_joint(const SdeParams& params) { return run_joint(params, nullptr); }

std::vector<double> filter_on_signal(const std::vector<double>& X, const SdeParams& params) {
  params.validate();
  if (X.empty()) throw std::invalid_argument("filter_on_signal: X is empty");
  const double dt = params.dt;
  const double sg = std::sqrt(params.gamma);
  std::vector<double> q(X.size());
  double Q = params.Q0;
  q[0] = Q;
  for (std::size_t k = 0; k + 1 < X.size(); ++k) {
    const double dX = X[k + 1] - X[k];
    const double innov = dX - 0.5 * sg * (2.0 * Q - 1.0) * dt;
    Q += params.lambda_tilde * (0.5 - Q) * dt + sg * Q * (1.0 - Q) * innov;
    Q = std::clamp(Q, 0.0, 1.0);
    q[k + 1] = Q;
  }
  return q;
}

CoupledTrace simulate_joint_scheduled(const SdeParams& params,
                                      const std::vector<double>& flip_times) {
  return run_joint(params, &flip_times);
}

void write_csv(std::ostream& os, const CoupledTrace& trace, std::size_t stride) {
  if (stride == 0) stride = 1;
  os << "time,R,X,Q\n";
  for (std::size_t k = 0; k < trace.Q.size(); k += stride) {
    os << format_double(trace.grid.time(k)) << ',' << int(trace.R[k]) << ','
       << format_double(trace.X[k]) << ',' << format_double(trace.Q[k]) << '\n';
  }
}

}  // namespace spikes
