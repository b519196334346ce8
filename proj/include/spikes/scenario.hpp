#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "spikes/analysis.hpp"
#include "spikes/detect.hpp"
#include "spikes/discrete.hpp"
#include "spikes/qubit.hpp"
#include "spikes/sde.hpp"

namespace spikes {

inline constexpr const char* kVersion = "0.1.0";

// exit_code follows the CLI contract: 2 = config/usage error, 3 = resource
// guard.
struct ScenarioError : std::runtime_error {
  ScenarioError(const std::string& what, int exit_code_)
      : std::runtime_error(what), exit_code(exit_code_) {}
  int exit_code;
};

enum class ScenarioKind { discrete_toy, classical_sde, qubit };

struct Scenario {
  std::string name;
  ScenarioKind kind = ScenarioKind::classical_sde;

  DiscreteModelParams discrete;
  SdeParams sde;
  QubitParams qubit;

  std::size_t n_trajectories = 1;
  std::uint64_t base_stream_id = 0;
  std::uint64_t master_seed = 0;
  double budget = 2.5e9;  // max total integration steps across the ensemble

  DetectionThresholds thresholds;
  double q0 = 0.1;
  std::vector<std::pair<double, double>> bands = {{0.1, 0.2}, {0.2, 0.4}, {0.4, 0.8}};
  std::vector<std::string> tests;  // shape,max_law,prefactor,poisson,scale,
                                   // jump_rate,wrong_prediction,spikeless
  double prefactor = -1.0;         // poisson-test intensity; <0 = model default
  RectDomain scale_domain{0.0, 0.0, 0.1, 0.2};  // t_hi=0 = first half of the run
  double scale_A = 2.0;
  double t1 = 0.05;   // wrong-prediction schedule
  double gap = -1.0;  // <0 = ln2/lambda_tilde
  double level = 0.5; // spikelessness excursion level

  std::string out_dir = ".";
  bool csv_output = true;
  bool json_output = true;
  std::size_t stride = 1;

  std::vector<std::pair<std::string, std::string>> echo;  // section.key = value

  double projected_steps() const;
  void validate() const;
};

Scenario parse_scenario(const std::string& path);

// Runs the scenario: simulates the ensemble, writes events.csv (and a sample
// trajectory CSV) into out_dir, runs the requested tests, and returns the
// report.  Deterministic for fixed config + seed, independent of workers.
nlohmann::json run_scenario(const Scenario& scenario, std::size_t workers);

}  // namespace spikes
