#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "spikes/grid.hpp"
#include "spikes/rng.hpp"

namespace spikes {

struct BlochVector {
  double x = 0.0, y = 0.0, z = 0.0;
};

// 2x2 Hermitian state [[a, cr+i*ci], [cr-i*ci, d]].  Stored as a matrix, not
// as a Bloch angle, so purity (det rho) is a measured diagnostic.
struct DensityMatrix {
  double a = 1.0, d = 0.0, cr = 0.0, ci = 0.0;

  static DensityMatrix from_bloch(const BlochVector& b);
  BlochVector bloch() const;
  double trace() const { return a + d; }
  double det() const { return a * d - cr * cr - ci * ci; }
  bool valid(double tol = 1e-12) const;
};

enum class OmegaMode { scaled, affine };

struct QubitParams {
  double gamma = 1.0;
  double omega = 1.0;                      // reduced Rabi parameter
  OmegaMode omega_mode = OmegaMode::scaled;  // scaled: Omega = sqrt(gamma)*omega
                                             // affine: Omega = 2 + sqrt(gamma)
  double dt = 1e-4;
  double T = 1.0;
  BlochVector rho0{0.0, 0.0, 1.0};
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  void validate() const;
  double Omega() const;
  double omega_reduced() const;  // Omega/sqrt(gamma)
  std::size_t n_steps() const;
  TimeGrid grid() const { return TimeGrid(0.0, dt, n_steps()); }
  bool resolves_spikes() const { return gamma * dt <= 0.05; }
};

// One Euler-Maruyama step of
//   drho = -i*(Omega/2)[sigma_y,rho] dt - (gamma/2)[sigma_z,[sigma_z,rho]] dt
//          + sqrt(gamma)(sigma_z rho + rho sigma_z - 2 tr(sigma_z rho) rho) dW,
// followed by exact trace renormalization and, if needed, a positivity
// projection whose distance is accumulated into *projection_distance.
DensityMatrix sme_step(const DensityMatrix& rho, double dW, const QubitParams& params,
                       double* projection_distance = nullptr);

struct QubitTrajectory {
  TimeGrid grid;
  std::vector<double> Q;       // <+|rho|+> in the z basis
  std::vector<double> Y;       // sqrt(gamma) * Re<+|rho|->
  std::vector<double> purity;  // det rho
  std::vector<double> X;       // integrated signal, dX = 2*sqrt(gamma)*tr(sigma_z rho) dt + dW
  double projection_mass = 0.0;
  double max_abs_ci = 0.0;     // imaginary part of the coherence stays ~0 for real rho0
};

QubitTrajectory integrate_sme(const QubitParams& params);

struct ReducedState {
  double Q = 0.0;
  double Y = 0.0;
};

// Euler-Maruyama of the (Q,Y) system obtained by expanding the SME:
//   dQ = -omega*Y dt + 4*sqrt(gamma)*Q*(1-Q) dW
//   dY = gamma*[(omega/2)*(2Q-1) - 2Y] dt + 2*sqrt(gamma)*Y*(1-2Q) dW
// driven by an externally supplied noise path (one dW per step), so it can be
// paired against integrate_sme on identical noise.
std::vector<ReducedState> integrate_reduced(const QubitParams& params,
                                            const std::vector<double>& dW,
                                            ReducedState initial);

// Noise-free master equation solved in closed form on the Bloch components
// (2x2 matrix exponential for the x-z block, exact decay for y).
DensityMatrix lindblad_mean(const QubitParams& params, double t);

// Incremental integrator for long runs.
class SmeStepper {
 public:
  SmeStepper(const QubitParams& params, RngStream stream);
  double step();  // advances one step, returns the new Q

  const DensityMatrix& rho() const { return rho_; }
  double q() const { return rho_.a; }
  double y() const { return y_scale_ * rho_.cr; }
  double x() const { return x_; }
  double t() const { return static_cast<double>(k_) * p_.dt; }
  double projection_mass() const { return projection_mass_; }
  double max_abs_ci() const { return max_abs_ci_; }

 private:
  QubitParams p_;
  RngStream rng_;
  DensityMatrix rho_;
  double y_scale_;
  double x_ = 0.0;
  std::uint64_t k_ = 0;
  double projection_mass_ = 0.0;
  double max_abs_ci_ = 0.0;
};

// Columns: time,Q,Y,purity,X.
void write_csv(std::ostream& os, const QubitTrajectory& traj, std::size_t stride = 1);

}  // namespace spikes
