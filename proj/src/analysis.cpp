#include "spikes/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spikes {

void RectDomain::validate() const {
  if (!(t_lo < t_hi)) throw std::invalid_argument("RectDomain: need t_lo < t_hi");
  if (!(0.0 < Q_lo && Q_lo < Q_hi && Q_hi <= 1.0))
    throw std::invalid_argument("RectDomain: need 0 < Q_lo < Q_hi <= 1");
}

double expected_count(const RectDomain& domain, double intensity_prefactor) {
  if (!(intensity_prefactor >= 0.0))
    throw std::invalid_argument("expected_count: prefactor must be >= 0");
  if (domain.t_lo == domain.t_hi) return 0.0;  // zero-duration window
  domain.validate();
  return intensity_prefactor * (domain.t_hi - domain.t_lo) * (1.0 / domain.Q_lo - 1.0 / domain.Q_hi);
}

std::size_t count_in_domain(const std::vector<SpikeEvent>& events, const RectDomain& domain) {
  std::size_t n = 0;
  for (const SpikeEvent& e : events)
    if (!e.complete && domain.contains(e.t_max, e.height)) ++n;
  return n;
}

namespace {

bool overlaps(const RectDomain& a, const RectDomain& b) {
  return a.t_lo < b.t_hi && b.t_lo < a.t_hi && a.Q_lo < b.Q_hi && b.Q_lo < a.Q_hi;
}

}  // namespace

PoissonReport poisson_test(const std::vector<SpikeEvent>& events,
                           const std::vector<RectDomain>& domains, double prefactor) {
  for (const RectDomain& d : domains) d.validate();
  for (std::size_t i = 0; i < domains.size(); ++i)
    for (std::size_t j = i + 1; j < domains.size(); ++j)
      if (overlaps(domains[i], domains[j]))
        throw std::invalid_argument("poisson_test: domains overlap");

  PoissonReport report;
  bool all_large = !domains.empty();
  double chi2 = 0.0;
  for (const RectDomain& d : domains) {
    PoissonDomainRecord rec;
    rec.domain = d;
    rec.observed = count_in_domain(events, d);
    rec.mu = expected_count(d, prefactor);
    rec.p_value = poisson_two_sided_p(rec.observed, rec.mu);
    if (rec.mu >= 5.0) {
      const double diff = static_cast<double>(rec.observed) - rec.mu;
      chi2 += diff * diff / rec.mu;
    } else {
      all_large = false;
    }
    report.domains.push_back(rec);
  }
  if (all_large) {
    report.chi_square = chi2;
    report.chi_square_p = chi_square_tail(chi2, static_cast<double>(domains.size()));
    report.chi_square_valid = true;
  }

  // Independence probe: lag-1 correlation of counts in equal time windows
  // spanning the tested range.
  if (!domains.empty()) {
    double t_lo = domains[0].t_lo, t_hi = domains[0].t_hi, q_lo = domains[0].Q_lo;
    for (const RectDomain& d : domains) {
      t_lo = std::min(t_lo, d.t_lo);
      t_hi = std::max(t_hi, d.t_hi);
      q_lo = std::min(q_lo, d.Q_lo);
    }
    const std::size_t n_win = 20;
    std::vector<double> counts(n_win, 0.0);
    const double w = (t_hi - t_lo) / static_cast<double>(n_win);
    for (const SpikeEvent& e : events) {
      if (e.complete || e.height < q_lo || e.t_max < t_lo || e.t_max >= t_hi) continue;
      const std::size_t i = std::min(
          n_win - 1, static_cast<std::size_t>((e.t_max - t_lo) / w));
      counts[i] += 1.0;
    }
    std::vector<double> a(counts.begin(), counts.end() - 1);
    std::vector<double> b(counts.begin() + 1, counts.end());
    report.window_lag_corr = pearson_correlation(a, b);
    report.independence_ok =
        std::abs(report.window_lag_corr) < 4.0 / std::sqrt(static_cast<double>(a.size()));
  }
  return report;
}

MaxLawReport max_law_test(const std::vector<SpikeEvent>& events, double q0) {
  if (!(q0 > 0.0 && q0 < 1.0)) throw std::invalid_argument("max_law_test: q0 must be in (0,1)");
  MaxLawReport report;
  std::vector<double> heights;
  for (const SpikeEvent& e : events) {
    if (e.complete)
      ++report.n_complete;  // the Dirac atom at Q=1
    else if (e.height >= q0)
      heights.push_back(e.height);
  }
  report.n_events = heights.size() + report.n_complete;
  if (report.n_events < 50) {
    report.insufficient_data = true;
    return report;
  }
  std::sort(heights.begin(), heights.end());
  if (!heights.empty() && report.n_complete == 0 &&
      heights.back() - heights.front() < 1e-12) {
    report.degenerate = true;
    return report;
  }
  // Conditional law given height >= q0: survival q0/Q on [q0,1), mass q0 at 1.
  const auto cdf = [q0](double x) { return 1.0 - q0 / x; };
  report.ks_d = ks_statistic(heights, cdf, report.n_events);
  report.p_value = ks_pvalue(report.ks_d, report.n_events);
  return report;
}

WrongPredictionReport wrong_prediction_probability(const SdeParams& base, double t1,
                                                   double t2, std::size_t n_traj,
                                                   double settle_level) {
  if (!(0.0 < t1 && t1 < t2 && t2 <= base.T))
    throw std::invalid_argument("wrong_prediction_probability: need 0 < t1 < t2 <= T");
  if (n_traj == 0) throw std::invalid_argument("wrong_prediction_probability: empty ensemble");

  WrongPredictionReport report;
  report.n = n_traj;
  const std::size_t k2 = static_cast<std::size_t>(std::llround(t2 / base.dt));
  for (std::size_t i = 0; i < n_traj; ++i) {
    SdeParams p = base;
    p.stream_id = base.stream_id + i;
    p.R0 = 0;
    JointStepper stepper(p, RngStream(p.master_seed, p.stream_id));
    stepper.set_schedule({t1});
    bool settled = false, wrong = false;
    for (std::size_t k = 0; k < k2; ++k) {
      const double q = stepper.step();
      if (stepper.t() <= t1) continue;
      if (!settled) {
        if (q > 1.0 - settle_level) settled = true;
      } else if (q < 0.5) {
        wrong = true;
        break;
      }
    }
    if (!settled) {
      ++report.n_never_settled;
      wrong = true;  // the filter never committed to the right plateau at all
    }
    if (wrong) ++report.n_wrong;
  }
  report.interval = wilson_interval(report.n_wrong, report.n);
  return report;
}

ScaleInvarianceReport scale_invariance_test(const std::vector<SpikeEvent>& events,
                                            const RectDomain& domain, double A) {
  domain.validate();
  if (!(A > 0.0)) throw std::invalid_argument("scale_invariance_test: A must be > 0");
  RectDomain scaled{A * domain.t_lo, A * domain.t_hi, A * domain.Q_lo, A * domain.Q_hi};
  if (scaled.Q_hi > 1.0)
    throw std::invalid_argument("scale_invariance_test: scaled domain leaves [0,1)");
  scaled.validate();

  ScaleInvarianceReport report;
  report.domain = domain;
  report.scaled_domain = scaled;
  report.count = count_in_domain(events, domain);
  report.scaled_count = count_in_domain(events, scaled);
  const double mu_hat = 0.5 * static_cast<double>(report.count + report.scaled_count);
  report.tolerance = std::max(3.0, 3.0 * std::sqrt(2.0 * mu_hat));
  const double diff = std::abs(static_cast<double>(report.count) -
                               static_cast<double>(report.scaled_count));
  report.pass = diff <= report.tolerance;
  return report;
}

namespace {

// An excursion counts only when it opens and closes strictly inside a
// constant-R stretch.  Deviations touching a stretch boundary are the
// estimator catching up with (or anticipating) a genuine flip, not spikes.
std::size_t count_excursions(const std::vector<double>& est,
                             const std::vector<std::uint8_t>& R, double level) {
  std::size_t count = 0;
  bool above = false;  // inside a candidate excursion
  bool armed = false;  // seen an in-band sample since the stretch began
  for (std::size_t k = 0; k < est.size(); ++k) {
    if (k > 0 && R[k] != R[k - 1]) {
      above = false;  // open excursion dies at the boundary
      armed = false;
      continue;
    }
    const double d = std::abs(est[k] - static_cast<double>(R[k]));
    if (d > level) {
      if (armed) above = true;  // lag from the boundary stays unarmed
    } else {
      if (above) ++count;  // closed inside the stretch
      above = false;
      armed = true;
    }
  }
  return count;
}

}  // namespace

SpikelessnessReport spikelessness_comparison(const std::vector<double>& filtered,
                                             const std::vector<double>& smoothed,
                                             const std::vector<std::uint8_t>& R,
                                             double level) {
  if (filtered.size() != R.size() || smoothed.size() != R.size())
    throw std::invalid_argument("spikelessness_comparison: paths must share the grid");
  SpikelessnessReport report;
  report.filtered_count = count_excursions(filtered, R, level);
  report.smoothed_count = count_excursions(smoothed, R, level);
  report.ratio = report.filtered_count == 0
                     ? 0.0
                     : static_cast<double>(report.smoothed_count) /
                           static_cast<double>(report.filtered_count);
  return report;
}

BandShapeReport band_shape_test(const std::vector<SpikeEvent>& events,
                                const std::vector<std::pair<double, double>>& bands) {
  if (bands.empty()) throw std::invalid_argument("band_shape_test: no bands");
  BandShapeReport report;
  double total_w = 0.0;
  std::size_t total_n = 0;
  for (const auto& [lo, hi] : bands) {
    if (!(0.0 < lo && lo < hi && hi <= 1.0))
      throw std::invalid_argument("band_shape_test: bad band");
    BandShapeRecord rec;
    rec.Q_lo = lo;
    rec.Q_hi = hi;
    for (const SpikeEvent& e : events)
      if (!e.complete && e.height >= lo && e.height < hi) ++rec.observed;
    total_w += 1.0 / lo - 1.0 / hi;
    total_n += rec.observed;
    report.bands.push_back(rec);
  }
  report.fitted_rate = static_cast<double>(total_n) / total_w;
  report.pass = true;
  for (BandShapeRecord& rec : report.bands) {
    rec.expected = report.fitted_rate * (1.0 / rec.Q_lo - 1.0 / rec.Q_hi);
    rec.z = rec.expected > 0.0
                ? (static_cast<double>(rec.observed) - rec.expected) / std::sqrt(rec.expected)
                : 0.0;
    if (std::abs(rec.z) > 3.0) report.pass = false;
  }
  return report;
}

double fit_prefactor(const std::vector<SpikeEvent>& events, double q0, double plateau_time) {
  if (!(q0 > 0.0 && q0 < 1.0)) throw std::invalid_argument("fit_prefactor: q0 must be in (0,1)");
  if (!(plateau_time > 0.0)) throw std::invalid_argument("fit_prefactor: plateau_time must be > 0");
  std::size_t n = 0;
  for (const SpikeEvent& e : events)
    if (!e.complete && e.height >= q0) ++n;
  return static_cast<double>(n) / (plateau_time * (1.0 / q0 - 1.0));
}

}  // namespace spikes
