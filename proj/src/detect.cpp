#include "spikes/detect.hpp"

#include <cmath>
#include <stdexcept>

namespace spikes {

void DetectionThresholds::validate() const {
  if (!(0.0 < q_exit && q_exit < q_enter && q_enter < 1.0))
    throw std::invalid_argument("DetectionThresholds: need 0 < q_exit < q_enter < 1");
  if (!(jump_level > 0.0 && q_enter < 1.0 - jump_level + 1e-15))
    throw std::invalid_argument("DetectionThresholds: need q_enter < 1 - jump_level");
}

void DetectionThresholds::validate_against(double lambda_tilde, double gamma) const {
  validate();
  if (!(gamma > 0.0)) throw std::invalid_argument("DetectionThresholds: gamma must be > 0");
  if (q_exit < 50.0 * lambda_tilde / gamma * (1.0 - 1e-9))
    throw std::invalid_argument(
        "DetectionThresholds: q_exit below 50*lambda_tilde/gamma, plateau noise "
        "would masquerade as excursions");
}

SpikeDetector::SpikeDetector(const DetectionThresholds& thresholds, double t0, double dt,
                             double q_initial)
    : th_(thresholds), t0_(t0), dt_(dt) {
  th_.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("SpikeDetector: dt must be > 0");
  plateau_ = q_initial > 0.5 ? 1 : 0;
  seg_start_ = t0;
  k_ = 1;
}

void SpikeDetector::push(double q) {
  if (finished_) throw std::logic_error("SpikeDetector: push after finish");
  const double t = t0_ + static_cast<double>(k_) * dt_;
  ++k_;
  plateau_time_[plateau_] += dt_;

  const double d = plateau_ == 0 ? q : 1.0 - q;

  if (!in_excursion_ && d > th_.q_enter) {
    in_excursion_ = true;
    cur_ = SpikeEvent{};
    cur_.plateau = plateau_;
    cur_.t_start = t;
    cur_.t_max = t;
    cur_.height = d;
  }

  if (in_excursion_) {
    if (d > cur_.height) {
      cur_.height = d;
      cur_.t_max = t;
    }
    if (d >= 1.0 - th_.jump_level) {
      // Crossed onto the far plateau: complete jump.
      cur_.t_end = t;
      cur_.complete = true;
      events_.push_back(cur_);
      jump_times_.push_back(t);
      segments_.push_back({plateau_, seg_start_, t});
      plateau_ ^= 1;
      seg_start_ = t;
      in_excursion_ = false;
    } else if (d < th_.q_exit) {
      cur_.t_end = t;
      events_.push_back(cur_);
      in_excursion_ = false;
    }
  }
}

void SpikeDetector::finish() {
  if (finished_) return;
  finished_ = true;
  const double t_last = t0_ + static_cast<double>(k_ - 1) * dt_;
  segments_.push_back({plateau_, seg_start_, t_last});
  // An excursion still open at the end of the record is dropped: its height
  // is right-censored and would bias the maximum law.
  in_excursion_ = false;
}

DetectionResult detect_path(const std::vector<double>& Q, const TimeGrid& grid,
                            const DetectionThresholds& thresholds) {
  if (Q.size() != grid.n_points())
    throw std::invalid_argument("detect_path: path length does not match grid");
  SpikeDetector det(thresholds, grid.t0, grid.dt, Q[0]);
  for (std::size_t k = 1; k < Q.size(); ++k) det.push(Q[k]);
  det.finish();
  DetectionResult res;
  res.events = det.events();
  res.segments = det.segments();
  res.jump_times = det.jump_times();
  res.plateau_time[0] = det.plateau_time(0);
  res.plateau_time[1] = det.plateau_time(1);
  return res;
}

std::vector<PlateauSegment> segment_plateaus(const std::vector<double>& Q,
                                             const TimeGrid& grid,
                                             const DetectionThresholds& thresholds) {
  return detect_path(Q, grid, thresholds).segments;
}

std::vector<SpikeEvent> extract_spikes(const std::vector<double>& Q, const TimeGrid& grid,
                                       const DetectionThresholds& thresholds) {
  return detect_path(Q, grid, thresholds).events;
}

std::size_t count_complete_jumps(const std::vector<double>& Q, const TimeGrid& grid,
                                 const DetectionThresholds& thresholds,
                                 std::vector<double>* jump_times) {
  DetectionResult res = detect_path(Q, grid, thresholds);
  if (jump_times) *jump_times = res.jump_times;
  return res.jump_times.size();
}

}  // namespace spikes
