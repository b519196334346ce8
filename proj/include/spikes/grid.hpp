#pragma once

#include <cstddef>
#include <stdexcept>

namespace spikes {

// Uniform time grid.  Point k sits at t0 + k*dt (computed by multiplication,
// never by repeated addition, so there is no accumulated rounding).
struct TimeGrid {
  double t0 = 0.0;
  double dt = 1.0;
  std::size_t n_steps = 1;

  TimeGrid() = default;
  TimeGrid(double t0_, double dt_, std::size_t n_steps_)
      : t0(t0_), dt(dt_), n_steps(n_steps_) {
    if (!(dt > 0.0)) throw std::invalid_argument("TimeGrid: dt must be > 0");
    if (n_steps < 1) throw std::invalid_argument("TimeGrid: n_steps must be >= 1");
  }

  std::size_t n_points() const { return n_steps + 1; }
  double time(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
  double t_end() const { return time(n_steps); }
};

inline TimeGrid make_time_grid(double t0, double dt, std::size_t n_steps) {
  return TimeGrid(t0, dt, n_steps);
}

}  // namespace spikes
