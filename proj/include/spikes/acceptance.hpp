#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace spikes::acceptance {

struct Options {
  std::size_t workers = 1;
  std::string scenario_dir = "scenarios";   // needed by criterion 12
  std::string out_dir = "acceptance_out";   // scratch space for artifact checks
};

// Runs the numbered acceptance criteria (1..12), printing one PASS/FAIL line
// per criterion.  Returns true iff every requested criterion passed.
bool run(const std::vector<int>& ids, const Options& options, std::ostream& os);

inline std::vector<int> all_ids() {
  return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
}

}  // namespace spikes::acceptance
