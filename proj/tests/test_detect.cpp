#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "spikes/detect.hpp"
#include "spikes/sde.hpp"

using namespace spikes;

namespace {

std::vector<double> constant_path(std::size_t n, double v) {
  return std::vector<double>(n, v);
}

}  // namespace

TEST_CASE("threshold validation") {
  DetectionThresholds th;
  CHECK_NOTHROW(th.validate());
  th.q_exit = 0.2;  // above q_enter
  CHECK_THROWS_AS(th.validate(), std::invalid_argument);
  th = DetectionThresholds{};
  th.q_enter = 0.95;  // collides with 1 - jump_level
  CHECK_THROWS_AS(th.validate(), std::invalid_argument);
  th = DetectionThresholds{};
  CHECK_THROWS_AS(th.validate_against(10.0, 100.0), std::invalid_argument);  // q_exit too small
  CHECK_NOTHROW(th.validate_against(1.0, 1e4));
}

TEST_CASE("constant path: one segment, nothing detected") {
  TimeGrid grid(0.0, 0.1, 99);
  const auto res = detect_path(constant_path(100, 0.0), grid, DetectionThresholds{});
  CHECK(res.events.empty());
  CHECK(res.jump_times.empty());
  REQUIRE(res.segments.size() == 1);
  CHECK(res.segments[0].plateau == 0);
  CHECK(res.plateau_time[0] == doctest::Approx(9.9));
  CHECK(res.plateau_time[1] == 0.0);
}

TEST_CASE("square wave produces jumps and segments") {
  // 0 -> 1 -> 0 with instant transitions.
  std::vector<double> q;
  for (int k = 0; k < 100; ++k) q.push_back(0.0);
  for (int k = 0; k < 100; ++k) q.push_back(1.0);
  for (int k = 0; k < 100; ++k) q.push_back(0.0);
  TimeGrid grid(0.0, 1.0, q.size() - 1);
  const auto res = detect_path(q, grid, DetectionThresholds{});
  CHECK(res.jump_times.size() == 2);
  CHECK(res.segments.size() == 3);
  CHECK(res.segments[0].plateau == 0);
  CHECK(res.segments[1].plateau == 1);
  CHECK(res.segments[2].plateau == 0);
  REQUIRE(res.events.size() == 2);
  CHECK(res.events[0].complete);
  CHECK(res.events[1].complete);
}

TEST_CASE("sub-threshold ramp is ignored") {
  std::vector<double> q;
  for (int k = 0; k <= 50; ++k) q.push_back(0.05 * k / 50.0);  // peak q_enter/2
  for (int k = 49; k >= 0; --k) q.push_back(0.05 * k / 50.0);
  TimeGrid grid(0.0, 1.0, q.size() - 1);
  CHECK(extract_spikes(q, grid, DetectionThresholds{}).empty());
}

TEST_CASE("triangular excursion: height and apex time") {
  std::vector<double> q(10, 0.0);
  for (int k = 1; k <= 40; ++k) q.push_back(0.4 * k / 40.0);
  for (int k = 39; k >= 0; --k) q.push_back(0.4 * k / 40.0);
  q.insert(q.end(), 10, 0.0);
  TimeGrid grid(0.0, 1.0, q.size() - 1);
  const auto events = extract_spikes(q, grid, DetectionThresholds{});
  REQUIRE(events.size() == 1);
  CHECK(events[0].height == doctest::Approx(0.4));
  CHECK(events[0].t_max == doctest::Approx(49.0));  // apex sample
  CHECK_FALSE(events[0].complete);
  CHECK(events[0].plateau == 0);
  CHECK(events[0].t_start <= events[0].t_max);
  CHECK(events[0].t_max <= events[0].t_end);
}

TEST_CASE("hysteresis keeps one event across a shallow dip") {
  // Rise to 0.3, dip to 0.05 (below q_enter but above q_exit), rise to 0.5,
  // then return to the plateau: a single event of height 0.5.
  std::vector<double> q = {0.0, 0.15, 0.3, 0.05, 0.05, 0.3, 0.5, 0.15, 0.01, 0.0};
  TimeGrid grid(0.0, 1.0, q.size() - 1);
  const auto events = extract_spikes(q, grid, DetectionThresholds{});
  REQUIRE(events.size() == 1);
  CHECK(events[0].height == doctest::Approx(0.5));
}

TEST_CASE("excursions from the upper plateau measure distance from 1") {
  std::vector<double> q(10, 1.0);
  q.push_back(0.7);  // distance 0.3
  q.push_back(0.99);
  q.insert(q.end(), 10, 1.0);
  TimeGrid grid(0.0, 1.0, q.size() - 1);
  const auto events = extract_spikes(q, grid, DetectionThresholds{});
  REQUIRE(events.size() == 1);
  CHECK(events[0].plateau == 1);
  CHECK(events[0].height == doctest::Approx(0.3));
}

TEST_CASE("open excursion at the end of the record is dropped") {
  std::vector<double> q(10, 0.0);
  for (int k = 1; k <= 20; ++k) q.push_back(0.5 * k / 20.0);  // still rising at the end
  TimeGrid grid(0.0, 1.0, q.size() - 1);
  CHECK(extract_spikes(q, grid, DetectionThresholds{}).empty());
}

TEST_CASE("detector is deterministic") {
  SdeParams p;
  p.lambda_tilde = 1.0;
  p.gamma = 1e3;
  p.dt = 1e-5;
  p.T = 5.0;
  p.Q0 = 0.0;
  p.R0 = 0;
  p.master_seed = 31;
  const CoupledTrace trace = simulate_joint(p);
  const auto a = detect_path(trace.Q, trace.grid, DetectionThresholds{});
  const auto b = detect_path(trace.Q, trace.grid, DetectionThresholds{});
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    CHECK(a.events[i].t_start == b.events[i].t_start);
    CHECK(a.events[i].height == b.events[i].height);
  }
}

TEST_CASE("streaming and batch detection agree") {
  SdeParams p;
  p.lambda_tilde = 1.0;
  p.gamma = 1e3;
  p.dt = 1e-5;
  p.T = 5.0;
  p.Q0 = 0.0;
  p.R0 = 0;
  p.master_seed = 32;
  const CoupledTrace trace = simulate_joint(p);
  SpikeDetector det(DetectionThresholds{}, 0.0, p.dt, trace.Q[0]);
  for (std::size_t k = 1; k < trace.Q.size(); ++k) det.push(trace.Q[k]);
  det.finish();
  const auto batch = detect_path(trace.Q, trace.grid, DetectionThresholds{});
  CHECK(det.events().size() == batch.events.size());
  CHECK(det.n_complete_jumps() == batch.jump_times.size());
  CHECK(det.plateau_time(0) == doctest::Approx(batch.plateau_time[0]));
}

TEST_CASE("spike counts are robust to the exit threshold") {
  // In the scaling regime, halving q_exit barely changes the number of big
  // spikes: excursions above 0.2 almost surely retrace below any small exit
  // level before re-arming matters.
  SdeParams p;
  p.lambda_tilde = 1.0;
  p.gamma = 1e4;
  p.dt = 1e-6;
  p.T = 20.0;
  p.Q0 = 0.0;
  p.R0 = 0;
  p.master_seed = 33;
  const CoupledTrace trace = simulate_joint(p);
  auto count_big = [&](double q_exit) {
    DetectionThresholds th;
    th.q_exit = q_exit;
    std::size_t n = 0;
    for (const SpikeEvent& e : extract_spikes(trace.Q, trace.grid, th))
      if (!e.complete && e.height >= 0.2) ++n;
    return n;
  };
  const double n1 = double(count_big(0.02));
  const double n2 = double(count_big(0.01));
  REQUIRE(n1 > 20);
  CHECK(std::abs(n1 - n2) / n1 < 0.10);
}

TEST_CASE("count_complete_jumps on a synthetic multi-jump path") {
  std::vector<double> q;
  for (int rep = 0; rep < 3; ++rep) {
    q.insert(q.end(), 50, 0.0);
    q.insert(q.end(), 50, 1.0);
  }
  q.insert(q.end(), 50, 0.0);
  TimeGrid grid(0.0, 1.0, q.size() - 1);
  std::vector<double> times;
  CHECK(count_complete_jumps(q, grid, DetectionThresholds{}, &times) == 6);
  CHECK(times.size() == 6);
  for (std::size_t i = 1; i < times.size(); ++i) CHECK(times[i] > times[i - 1]);
}
