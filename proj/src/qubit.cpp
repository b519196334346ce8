#include "spikes/qubit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spikes/path.hpp"

namespace spikes {

DensityMatrix DensityMatrix::from_bloch(const BlochVector& b) {
  DensityMatrix rho;
  rho.a = 0.5 * (1.0 + b.z);
  rho.d = 0.5 * (1.0 - b.z);
  rho.cr = 0.5 * b.x;
  rho.ci = -0.5 * b.y;
  return rho;
}

BlochVector DensityMatrix::bloch() const {
  return {2.0 * cr, -2.0 * ci, a - d};
}

bool DensityMatrix::valid(double tol) const {
  return std::abs(trace() - 1.0) <= tol && det() >= -tol && a >= -tol && d >= -tol;
}

void QubitParams::validate() const {
  // gamma = 0 is admitted as a test mode (pure Rabi rotation).
  if (!(gamma >= 0.0)) throw std::invalid_argument("QubitParams: gamma must be >= 0");
  if (!(dt > 0.0)) throw std::invalid_argument("QubitParams: dt must be > 0");
  if (!(T > 0.0)) throw std::invalid_argument("QubitParams: T must be > 0");
  const double r2 = rho0.x * rho0.x + rho0.y * rho0.y + rho0.z * rho0.z;
  if (r2 > 1.0 + 1e-12) throw std::invalid_argument("QubitParams: rho0 outside the Bloch ball");
}

double QubitParams::Omega() const {
  return omega_mode == OmegaMode::scaled ? std::sqrt(gamma) * omega
                                         : 2.0 + std::sqrt(gamma);
}

double QubitParams::omega_reduced() const { return Omega() / std::sqrt(gamma); }

std::size_t QubitParams::n_steps() const {
  return static_cast<std::size_t>(std::llround(T / dt));
}

namespace {

// Euler step in matrix components, then trace renormalization and a
// coherence-shrinking positivity projection.
inline void raw_step(DensityMatrix& rho, double dW, double dt, double Omega,
                     double gamma, double sg, double* projection_distance) {
  const double a = rho.a, d = rho.d, cr = rho.cr, ci = rho.ci;
  const double m = a - d;  // tr(sigma_z rho)

  const double da = (-Omega * cr) * dt + sg * (2.0 * a - 2.0 * m * a) * dW;
  const double dd = (Omega * cr) * dt + sg * (-2.0 * d - 2.0 * m * d) * dW;
  const double dcr = (0.5 * Omega * m - 2.0 * gamma * cr) * dt - 2.0 * sg * m * cr * dW;
  const double dci = (-2.0 * gamma * ci) * dt - 2.0 * sg * m * ci * dW;

  double na = a + da, nd = d + dd, ncr = cr + dcr, nci = ci + dci;

  const double tr = na + nd;
  na /= tr;
  nd /= tr;
  ncr /= tr;
  nci /= tr;

  // Positivity projection: clip the negative eigenvalue by shrinking the
  // Bloch vector back to the unit ball.  Direction is preserved, so a pure
  // state undergoing a unitary step is nudged radially, not frozen.
  const double bz = na - nd;
  const double r2 = bz * bz + 4.0 * (ncr * ncr + nci * nci);
  if (r2 > 1.0) {
    const double r = std::sqrt(r2);
    if (projection_distance) *projection_distance += 0.5 * (r - 1.0);
    const double scale = 1.0 / r;
    const double sz = bz * scale;
    na = 0.5 * (1.0 + sz);
    nd = 0.5 * (1.0 - sz);
    ncr *= scale;
    nci *= scale;
  }

  rho.a = na;
  rho.d = nd;
  rho.cr = ncr;
  rho.ci = nci;
}

}  // namespace

DensityMatrix sme_step(const DensityMatrix& rho, double dW, const QubitParams& params,
                       double* projection_distance) {
  DensityMatrix out = rho;
  raw_step(out, dW, params.dt, params.Omega(), params.gamma, std::sqrt(params.gamma),
           projection_distance);
  return out;
}

SmeStepper::SmeStepper(const QubitParams& params, RngStream stream)
    : p_(params), rng_(stream), rho_(DensityMatrix::from_bloch(params.rho0)),
      y_scale_(std::sqrt(params.gamma)) {
  p_.validate();
}

double SmeStepper::step() {
  const double sdt = std::sqrt(p_.dt);
  const double sg = y_scale_;
  const double dW = rng_.normal() * sdt;
  x_ += 2.0 * sg * (rho_.a - rho_.d) * p_.dt + dW;
  raw_step(rho_, dW, p_.dt, p_.Omega(), p_.gamma, sg, &projection_mass_);
  max_abs_ci_ = std::max(max_abs_ci_, std::abs(rho_.ci));
  ++k_;
  return rho_.a;
}

QubitTrajectory integrate_sme(const QubitParams& params) {
  params.validate();
  const TimeGrid grid = params.grid();
  SmeStepper stepper(params, RngStream(params.master_seed, params.stream_id));
  QubitTrajectory traj;
  traj.grid = grid;
  traj.Q.resize(grid.n_points());
  traj.Y.resize(grid.n_points());
  traj.purity.resize(grid.n_points());
  traj.X.resize(grid.n_points());
  traj.Q[0] = stepper.rho().a;
  traj.Y[0] = stepper.y();
  traj.purity[0] = stepper.rho().det();
  traj.X[0] = 0.0;
  for (std::size_t k = 0; k < grid.n_steps; ++k) {
    stepper.step();
    traj.Q[k + 1] = stepper.q();
    traj.Y[k + 1] = stepper.y();
    traj.purity[k + 1] = stepper.rho().det();
    traj.X[k + 1] = stepper.x();
  }
  traj.projection_mass = stepper.projection_mass();
  traj.max_abs_ci = stepper.max_abs_ci();
  return traj;
}

std::vector<ReducedState> integrate_reduced(const QubitParams& params,
                                            const std::vector<double>& dW,
                                            ReducedState initial) {
  params.validate();
  const double dt = params.dt;
  const double g = params.gamma;
  const double sg = std::sqrt(g);
  const double om = params.omega_reduced();
  std::vector<ReducedState> out(dW.size() + 1);
  out[0] = initial;
  double Q = initial.Q, Y = initial.Y;
  for (std::size_t k = 0; k < dW.size(); ++k) {
    const double w = dW[k];
    const double nQ = Q - om * Y * dt + 4.0 * sg * Q * (1.0 - Q) * w;
    const double nY = Y + g * (0.5 * om * (2.0 * Q - 1.0) - 2.0 * Y) * dt +
                      2.0 * sg * Y * (1.0 - 2.0 * Q) * w;
    Q = std::clamp(nQ, 0.0, 1.0);
    Y = nY;
    out[k + 1] = {Q, Y};
  }
  return out;
}

DensityMatrix lindblad_mean(const QubitParams& params, double t) {
  params.validate();
  if (!(t >= 0.0)) throw std::invalid_argument("lindblad_mean: t must be >= 0");
  const double g = params.gamma;
  const double Om = params.Omega();

  // d/dt (x,z) = M (x,z) with M = [[-2g, Om], [-Om, 0]]; y decays at 2g.
  // exp(tM) in closed form: M = tau*I + N with tr(N)=0, N^2 = s^2 I.
  const double tau = -g;
  const double n11 = -2.0 * g - tau, n12 = Om, n21 = -Om, n22 = -tau;
  const double s2 = n11 * n11 + n12 * n21;  // N^2 = s2 * I
  double ch, shs;                            // cosh(s*t), sinh(s*t)/s
  const double a2 = s2 * t * t;
  if (std::abs(a2) < 1e-24) {
    ch = 1.0 + 0.5 * a2;
    shs = t * (1.0 + a2 / 6.0);
  } else if (s2 > 0.0) {
    const double s = std::sqrt(s2);
    ch = std::cosh(s * t);
    shs = std::sinh(s * t) / s;
  } else {
    const double s = std::sqrt(-s2);
    ch = std::cos(s * t);
    shs = std::sin(s * t) / s;
  }
  const double e = std::exp(tau * t);
  const double m11 = e * (ch + shs * n11);
  const double m12 = e * (shs * n12);
  const double m21 = e * (shs * n21);
  const double m22 = e * (ch + shs * n22);

  BlochVector b;
  b.x = m11 * params.rho0.x + m12 * params.rho0.z;
  b.z = m21 * params.rho0.x + m22 * params.rho0.z;
  b.y = std::exp(-2.0 * g * t) * params.rho0.y;
  return DensityMatrix::from_bloch(b);
}

void write_csv(std::ostream& os, const QubitTrajectory& traj, std::size_t stride) {
  if (stride == 0) stride = 1;
  os << "time,Q,Y,purity,X\n";
  for (std::size_t k = 0; k < traj.Q.size(); k += stride) {
    os << format_double(traj.grid.time(k)) << ',' << format_double(traj.Q[k]) << ','
       << format_double(traj.Y[k]) << ',' << format_double(traj.purity[k]) << ','
       << format_double(traj.X[k]) << '\n';
  }
}

}  // namespace spikes
