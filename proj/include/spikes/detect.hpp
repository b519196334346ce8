#pragma once

#include <cstddef>
#include <vector>

#include "spikes/grid.hpp"

namespace spikes {

struct DetectionThresholds {
  double q_enter = 0.1;    // excursion opens when |Q - plateau| crosses above this
  double q_exit = 0.005;   // ...and closes on return below this; a deep retrace
                           // keeps one physical spike from fragmenting into
                           // several recorded events
  double jump_level = 0.1;  // reaching beyond 1 - jump_level flips the plateau

  void validate() const;
  // Threshold hierarchy against the model: q_exit must dominate the
  // plateau-width scale lambda_tilde/gamma (enforced as q_exit >= 50*l/g).
  void validate_against(double lambda_tilde, double gamma) const;
};

struct SpikeEvent {
  int plateau = 0;       // which plateau the excursion left (0 or 1)
  double t_start = 0.0;
  double t_max = 0.0;
  double t_end = 0.0;
  double height = 0.0;   // max distance of Q from the plateau
  bool complete = false; // reached past 1 - jump_level: a complete jump
};

struct PlateauSegment {
  int plateau = 0;
  double t_start = 0.0;
  double t_end = 0.0;
};

// Streaming hysteresis detector.  Feed samples in grid order; plateau label
// flips when Q crosses beyond 1 - jump_level on the far side, which also
// closes the running excursion as a complete jump.  Excursions still open at
// finish() are dropped (right-censored).
class SpikeDetector {
 public:
  SpikeDetector(const DetectionThresholds& thresholds, double t0, double dt,
                double q_initial);

  void push(double q);  // next sample, at time t0 + k*dt for the k-th call
  void finish();

  const std::vector<SpikeEvent>& events() const { return events_; }
  const std::vector<PlateauSegment>& segments() const { return segments_; }
  const std::vector<double>& jump_times() const { return jump_times_; }
  // Time accumulated on each plateau, excursions included.
  double plateau_time(int plateau) const { return plateau_time_[plateau]; }
  std::size_t n_complete_jumps() const { return jump_times_.size(); }

 private:
  DetectionThresholds th_;
  double t0_, dt_;
  std::size_t k_ = 0;
  int plateau_;
  double seg_start_;
  bool in_excursion_ = false;
  SpikeEvent cur_;
  bool finished_ = false;
  std::vector<SpikeEvent> events_;
  std::vector<PlateauSegment> segments_;
  std::vector<double> jump_times_;
  double plateau_time_[2] = {0.0, 0.0};
};

// Batch wrappers over the streaming detector.
struct DetectionResult {
  std::vector<SpikeEvent> events;
  std::vector<PlateauSegment> segments;
  std::vector<double> jump_times;
  double plateau_time[2] = {0.0, 0.0};
};

DetectionResult detect_path(const std::vector<double>& Q, const TimeGrid& grid,
                            const DetectionThresholds& thresholds);

std::vector<PlateauSegment> segment_plateaus(const std::vector<double>& Q,
                                             const TimeGrid& grid,
                                             const DetectionThresholds& thresholds);

std::vector<SpikeEvent> extract_spikes(const std::vector<double>& Q, const TimeGrid& grid,
                                       const DetectionThresholds& thresholds);

std::size_t count_complete_jumps(const std::vector<double>& Q, const TimeGrid& grid,
                                 const DetectionThresholds& thresholds,
                                 std::vector<double>* jump_times = nullptr);

}  // namespace spikes
