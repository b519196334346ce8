#include "spikes/path.hpp"

#include <cstdio>
#include <stdexcept>

#include "json.hpp"

namespace spikes {

ScalarPath::ScalarPath(TimeGrid g, std::vector<double> v, std::string lab)
    : grid(g), values(std::move(v)), label(std::move(lab)) {
  if (values.size() != grid.n_points())
    throw std::invalid_argument("ScalarPath: values must have n_steps+1 entries");
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_csv(std::ostream& os, const std::vector<const ScalarPath*>& paths,
               std::size_t stride) {
  if (paths.empty()) throw std::invalid_argument("write_csv: no paths");
  if (stride == 0) stride = 1;
  const TimeGrid& grid = paths.front()->grid;
  os << "time";
  for (const ScalarPath* p : paths) {
    if (p->values.size() != grid.n_points())
      throw std::invalid_argument("write_csv: paths must share one grid");
    os << ',' << p->label;
  }
  os << '\n';
  for (std::size_t k = 0; k < grid.n_points(); k += stride) {
    os << format_double(grid.time(k));
    for (const ScalarPath* p : paths) os << ',' << format_double(p->values[k]);
    os << '\n';
  }
}

void write_csv(std::ostream& os, const ScalarPath& path, std::size_t stride) {
  write_csv(os, std::vector<const ScalarPath*>{&path}, stride);
}

std::string to_json(const ScalarPath& path) {
  nlohmann::json j;
  j["grid"] = {{"t0", path.grid.t0},
               {"dt", path.grid.dt},
               {"n_steps", path.grid.n_steps}};
  j["label"] = path.label;
  j["values"] = path.values;
  return j.dump();
}

}  // namespace spikes
