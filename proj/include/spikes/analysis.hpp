#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "spikes/detect.hpp"
#include "spikes/sde.hpp"
#include "spikes/stats.hpp"

namespace spikes {

// Rectangle in the (t, height) plane; open at height 1 so complete jumps
// never fall inside.
struct RectDomain {
  double t_lo = 0.0, t_hi = 0.0;
  double Q_lo = 0.0, Q_hi = 1.0;
  void validate() const;
  bool contains(double t, double h) const {
    return t >= t_lo && t < t_hi && h >= Q_lo && h < Q_hi;
  }
};

// mu = prefactor * (t_hi - t_lo) * (1/Q_lo - 1/Q_hi): the 1/Q^2 intensity
// integrated over the rectangle.
double expected_count(const RectDomain& domain, double intensity_prefactor);

std::size_t count_in_domain(const std::vector<SpikeEvent>& events, const RectDomain& domain);

struct PoissonDomainRecord {
  RectDomain domain;
  std::size_t observed = 0;
  double mu = 0.0;
  double p_value = 1.0;
};

struct PoissonReport {
  std::vector<PoissonDomainRecord> domains;
  double chi_square = 0.0;        // valid only when chi_square_valid
  double chi_square_p = 1.0;
  bool chi_square_valid = false;  // requires every mu >= 5
  double window_lag_corr = 0.0;   // lag-1 correlation of counts in time windows
  bool independence_ok = true;
};

PoissonReport poisson_test(const std::vector<SpikeEvent>& events,
                           const std::vector<RectDomain>& domains, double prefactor);

// Conditional excursion-maximum law: given height >= q0, survival q0/Q on
// [q0, 1) with the remaining q0 mass carried by complete jumps (the atom at
// 1).  Complete events enter the sample as that atom.
struct MaxLawReport {
  std::size_t n_events = 0;    // qualifying events, atom included
  std::size_t n_complete = 0;
  double ks_d = 0.0;
  double p_value = 0.0;
  bool insufficient_data = false;  // fewer than 50 qualifying events
  bool degenerate = false;         // no spread in the heights
};

MaxLawReport max_law_test(const std::vector<SpikeEvent>& events, double q0);

// Probability that the filter makes a wrong prediction (|Q - R| > 1/2)
// somewhere in the open interval between two scheduled flips of R at t1 and
// t2.  Checking starts once Q has settled onto the new plateau (within
// settle_level); the deterministic relaxation right after t1 is not a
// prediction error.  Trajectories that never settle count as wrong.
struct WrongPredictionReport {
  std::size_t n = 0;
  std::size_t n_wrong = 0;
  std::size_t n_never_settled = 0;
  WilsonInterval interval;
};

WrongPredictionReport wrong_prediction_probability(const SdeParams& base, double t1,
                                                   double t2, std::size_t n_traj,
                                                   double settle_level = 0.02);

struct ScaleInvarianceReport {
  RectDomain domain, scaled_domain;
  std::size_t count = 0, scaled_count = 0;
  double tolerance = 0.0;  // 3*sqrt(2*mu_hat)
  bool pass = false;
};

ScaleInvarianceReport scale_invariance_test(const std::vector<SpikeEvent>& events,
                                            const RectDomain& domain, double A);

// Counts excursions of |estimate - R| above `level` that open and close
// inside a constant-R stretch, for the filtered and smoothed estimates on a
// shared grid.  Deviations touching a flip (estimator lag or anticipation)
// belong to the transition itself and are excluded.
struct SpikelessnessReport {
  std::size_t filtered_count = 0;
  std::size_t smoothed_count = 0;
  double ratio = 0.0;  // smoothed/filtered; 0 when filtered_count = 0
};

SpikelessnessReport spikelessness_comparison(const std::vector<double>& filtered,
                                             const std::vector<double>& smoothed,
                                             const std::vector<std::uint8_t>& R,
                                             double level);

// Prefactor-free shape test: counts across height bands must be proportional
// to 1/Q_lo - 1/Q_hi, each band within 3 sigma of the fitted common rate.
struct BandShapeRecord {
  double Q_lo = 0.0, Q_hi = 0.0;
  std::size_t observed = 0;
  double expected = 0.0;
  double z = 0.0;  // (observed - expected)/sqrt(expected)
};

struct BandShapeReport {
  std::vector<BandShapeRecord> bands;
  double fitted_rate = 0.0;  // counts per unit weight
  bool pass = false;         // every |z| <= 3
};

BandShapeReport band_shape_test(const std::vector<SpikeEvent>& events,
                                const std::vector<std::pair<double, double>>& bands);

// Spike-intensity prefactor from counts with height in [q0, 1) over an
// accumulated plateau time, under the 1/Q^2 density.
double fit_prefactor(const std::vector<SpikeEvent>& events, double q0,
                     double plateau_time);

}  // namespace spikes
