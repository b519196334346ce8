#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "spikes/grid.hpp"

namespace spikes {

// A sampled real-valued path on a uniform grid; values has n_steps+1 entries.
struct ScalarPath {
  TimeGrid grid;
  std::vector<double> values;
  std::string label;

  ScalarPath() = default;
  ScalarPath(TimeGrid g, std::vector<double> v, std::string lab);
};

// CSV with a "time,<label>,..." header, one row per grid point, full double
// precision.  All paths must share the same grid.
void write_csv(std::ostream& os, const std::vector<const ScalarPath*>& paths,
               std::size_t stride = 1);
void write_csv(std::ostream& os, const ScalarPath& path, std::size_t stride = 1);

// Grid metadata plus value array.
std::string to_json(const ScalarPath& path);

// Formats a double with enough digits to round-trip.
std::string format_double(double x);

}  // namespace spikes
