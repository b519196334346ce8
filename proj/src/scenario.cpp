#include "spikes/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spikes/ensemble.hpp"
#include "spikes/path.hpp"

namespace spikes {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void config_error(const std::string& msg, std::size_t line) {
  std::ostringstream os;
  os << "config error (line " << line << "): " << msg;
  throw ScenarioError(os.str(), 2);
}

double parse_double(const std::string& v, std::size_t line) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    config_error("expected a number, got '" + v + "'", line);
  }
}

std::uint64_t parse_u64(const std::string& v, std::size_t line) {
  try {
    std::size_t pos = 0;
    const std::uint64_t x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    config_error("expected a non-negative integer, got '" + v + "'", line);
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

}  // namespace

double Scenario::projected_steps() const {
  double per_traj = 0.0;
  switch (kind) {
    case ScenarioKind::discrete_toy:
      per_traj = static_cast<double>(discrete.n_steps);
      break;
    case ScenarioKind::classical_sde:
      per_traj = sde.T / sde.dt;
      break;
    case ScenarioKind::qubit:
      per_traj = qubit.T / qubit.dt;
      break;
  }
  return per_traj * static_cast<double>(n_trajectories);
}

void Scenario::validate() const {
  try {
    switch (kind) {
      case ScenarioKind::discrete_toy:
        discrete.validate();
        break;
      case ScenarioKind::classical_sde:
        sde.validate();
        break;
      case ScenarioKind::qubit:
        qubit.validate();
        break;
    }
    thresholds.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(std::string("invalid scenario: ") + e.what(), 2);
  }
  if (n_trajectories == 0) throw ScenarioError("invalid scenario: n_trajectories must be >= 1", 2);
}

Scenario parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open config file: " + path, 2);

  Scenario s;
  s.name = std::filesystem::path(path).stem().string();
  std::string section;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') config_error("unterminated section header", lineno);
      section = trim(line.substr(1, line.size() - 2));
      if (section != "model" && section != "grid" && section != "ensemble" &&
          section != "analysis" && section != "output" && section != "qubit")
        config_error("unknown section [" + section + "]", lineno);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) config_error("expected key = value", lineno);
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (section.empty()) config_error("key '" + key + "' outside any section", lineno);
    s.echo.emplace_back(section + "." + key, val);

    if (section == "model") {
      if (key == "kind") {
        if (val == "discrete-toy") s.kind = ScenarioKind::discrete_toy;
        else if (val == "classical-sde") s.kind = ScenarioKind::classical_sde;
        else if (val == "qubit") s.kind = ScenarioKind::qubit;
        else config_error("unknown kind '" + val + "'", lineno);
      } else if (key == "epsilon") s.discrete.epsilon = parse_double(val, lineno);
      else if (key == "lambda") s.discrete.lambda = parse_double(val, lineno);
      else if (key == "lambda_tilde") s.sde.lambda_tilde = parse_double(val, lineno);
      else if (key == "gamma") s.sde.gamma = parse_double(val, lineno);
      else if (key == "mode") {
        if (val == "innovation") s.sde.mode = SdeMode::innovation;
        else if (val == "physical") s.sde.mode = SdeMode::physical;
        else config_error("unknown mode '" + val + "'", lineno);
      } else if (key == "Q0") {
        s.discrete.Q0 = s.sde.Q0 = parse_double(val, lineno);
      } else if (key == "R0") {
        const double r = parse_double(val, lineno);
        s.discrete.R0 = s.sde.R0 = static_cast<int>(r);
      } else config_error("unknown key '" + key + "' in [model]", lineno);
    } else if (section == "grid") {
      if (key == "dt") s.sde.dt = s.qubit.dt = parse_double(val, lineno);
      else if (key == "T") s.sde.T = s.qubit.T = parse_double(val, lineno);
      else if (key == "n_steps") s.discrete.n_steps = parse_u64(val, lineno);
      else config_error("unknown key '" + key + "' in [grid]", lineno);
    } else if (section == "ensemble") {
      if (key == "n_trajectories") s.n_trajectories = parse_u64(val, lineno);
      else if (key == "base_stream_id") s.base_stream_id = parse_u64(val, lineno);
      else if (key == "master_seed") s.master_seed = parse_u64(val, lineno);
      else if (key == "budget") s.budget = parse_double(val, lineno);
      else config_error("unknown key '" + key + "' in [ensemble]", lineno);
    } else if (section == "analysis") {
      if (key == "q_enter") s.thresholds.q_enter = parse_double(val, lineno);
      else if (key == "q_exit") s.thresholds.q_exit = parse_double(val, lineno);
      else if (key == "jump_level") s.thresholds.jump_level = parse_double(val, lineno);
      else if (key == "q0") s.q0 = parse_double(val, lineno);
      else if (key == "bands") {
        s.bands.clear();
        for (const std::string& b : split(val, ',')) {
          const auto parts = split(b, ':');
          if (parts.size() != 2) config_error("band must be lo:hi, got '" + b + "'", lineno);
          s.bands.emplace_back(parse_double(parts[0], lineno), parse_double(parts[1], lineno));
        }
      } else if (key == "tests") s.tests = split(val, ',');
      else if (key == "prefactor") s.prefactor = parse_double(val, lineno);
      else if (key == "scale_t_lo") s.scale_domain.t_lo = parse_double(val, lineno);
      else if (key == "scale_t_hi") s.scale_domain.t_hi = parse_double(val, lineno);
      else if (key == "scale_q_lo") s.scale_domain.Q_lo = parse_double(val, lineno);
      else if (key == "scale_q_hi") s.scale_domain.Q_hi = parse_double(val, lineno);
      else if (key == "scale_A") s.scale_A = parse_double(val, lineno);
      else if (key == "t1") s.t1 = parse_double(val, lineno);
      else if (key == "gap") s.gap = parse_double(val, lineno);
      else if (key == "level") s.level = parse_double(val, lineno);
      else config_error("unknown key '" + key + "' in [analysis]", lineno);
    } else if (section == "output") {
      if (key == "directory") s.out_dir = val;
      else if (key == "formats") {
        s.csv_output = s.json_output = false;
        for (const std::string& f : split(val, ',')) {
          if (f == "csv") s.csv_output = true;
          else if (f == "json") s.json_output = true;
          else config_error("unknown format '" + f + "'", lineno);
        }
      } else if (key == "stride") s.stride = parse_u64(val, lineno);
      else config_error("unknown key '" + key + "' in [output]", lineno);
    } else if (section == "qubit") {
      if (key == "gamma") s.qubit.gamma = parse_double(val, lineno);
      else if (key == "omega") s.qubit.omega = parse_double(val, lineno);
      else if (key == "omega_mode") {
        if (val == "scaled") s.qubit.omega_mode = OmegaMode::scaled;
        else if (val == "affine") s.qubit.omega_mode = OmegaMode::affine;
        else config_error("unknown omega_mode '" + val + "'", lineno);
      } else if (key == "dt") s.qubit.dt = parse_double(val, lineno);
      else if (key == "T") s.qubit.T = parse_double(val, lineno);
      else if (key == "rho0") {
        const auto parts = split(val, ',');
        if (parts.size() != 3) config_error("rho0 must be x,y,z", lineno);
        s.qubit.rho0 = {parse_double(parts[0], lineno), parse_double(parts[1], lineno),
                        parse_double(parts[2], lineno)};
      } else config_error("unknown key '" + key + "' in [qubit]", lineno);
    }
  }
  if (s.stride == 0) s.stride = 1;
  return s;
}

namespace {

struct TrajResult {
  std::vector<SpikeEvent> events;
  double plateau_time[2] = {0.0, 0.0};
  std::size_t n_jumps = 0;
  std::size_t jumps_from_0 = 0;
  double diagnostic_mass = 0.0;  // clamp mass (classical) / projection mass (qubit)
  std::size_t filtered_excursions = 0, smoothed_excursions = 0;  // spikelessness
};

void harvest(const SpikeDetector& det, TrajResult& out) {
  out.events = det.events();
  out.plateau_time[0] = det.plateau_time(0);
  out.plateau_time[1] = det.plateau_time(1);
  out.n_jumps = det.n_complete_jumps();
  for (const SpikeEvent& e : out.events)
    if (e.complete && e.plateau == 0) ++out.jumps_from_0;
}

nlohmann::json domain_json(const RectDomain& d) {
  return {{"t_lo", d.t_lo}, {"t_hi", d.t_hi}, {"Q_lo", d.Q_lo}, {"Q_hi", d.Q_hi}};
}

nlohmann::json to_json(const BandShapeReport& r) {
  nlohmann::json bands = nlohmann::json::array();
  for (const auto& b : r.bands)
    bands.push_back({{"Q_lo", b.Q_lo}, {"Q_hi", b.Q_hi}, {"observed", b.observed},
                     {"expected", b.expected}, {"z", b.z}});
  return {{"bands", bands}, {"fitted_rate", r.fitted_rate}, {"pass", r.pass}};
}

nlohmann::json to_json(const MaxLawReport& r) {
  return {{"n_events", r.n_events}, {"n_complete", r.n_complete}, {"ks_d", r.ks_d},
          {"p_value", r.p_value}, {"insufficient_data", r.insufficient_data},
          {"degenerate", r.degenerate}};
}

nlohmann::json to_json(const PoissonReport& r) {
  nlohmann::json domains = nlohmann::json::array();
  for (const auto& d : r.domains)
    domains.push_back({{"domain", domain_json(d.domain)}, {"observed", d.observed},
                       {"mu", d.mu}, {"p_value", d.p_value}});
  return {{"domains", domains}, {"chi_square", r.chi_square},
          {"chi_square_p", r.chi_square_p}, {"chi_square_valid", r.chi_square_valid},
          {"window_lag_corr", r.window_lag_corr}, {"independence_ok", r.independence_ok}};
}

nlohmann::json to_json(const ScaleInvarianceReport& r) {
  return {{"domain", domain_json(r.domain)}, {"scaled_domain", domain_json(r.scaled_domain)},
          {"count", r.count}, {"scaled_count", r.scaled_count},
          {"tolerance", r.tolerance}, {"pass", r.pass}};
}

nlohmann::json to_json(const WrongPredictionReport& r) {
  return {{"n", r.n}, {"n_wrong", r.n_wrong}, {"n_never_settled", r.n_never_settled},
          {"p_hat", r.interval.p_hat}, {"ci_lo", r.interval.lo}, {"ci_hi", r.interval.hi}};
}

bool wants(const Scenario& s, const std::string& test) {
  return std::find(s.tests.begin(), s.tests.end(), test) != s.tests.end();
}

}  // namespace

nlohmann::json run_scenario(const Scenario& scenario, std::size_t workers) {
  scenario.validate();
  const double projected = scenario.projected_steps();
  if (projected > scenario.budget) {
    std::ostringstream os;
    os << "resource guard: projected " << projected << " steps exceeds budget "
       << scenario.budget;
    throw ScenarioError(os.str(), 3);
  }
  std::filesystem::create_directories(scenario.out_dir);
  const auto t_begin = std::chrono::steady_clock::now();

  const bool needs_ensemble =
      scenario.tests.empty() || wants(scenario, "shape") || wants(scenario, "max_law") ||
      wants(scenario, "prefactor") || wants(scenario, "poisson") ||
      wants(scenario, "scale") || wants(scenario, "jump_rate") || wants(scenario, "spikeless");

  const std::size_t n = scenario.n_trajectories;
  std::vector<TrajResult> results(needs_ensemble ? n : 0);
  double T_traj = 1.0;  // per-trajectory time span (steps for the discrete model)
  std::ostringstream traj_csv;  // sample trajectory (index 0), strided

  if (needs_ensemble) {
    switch (scenario.kind) {
      case ScenarioKind::discrete_toy: {
        const bool with_smoother = wants(scenario, "spikeless");
        T_traj = static_cast<double>(scenario.discrete.n_steps);
        parallel_for(n, workers, [&](std::size_t i) {
          DiscreteModelParams p = scenario.discrete;
          p.master_seed = scenario.master_seed;
          p.stream_id = scenario.base_stream_id + i;
          DiscreteTrace trace = simulate_trace(p, with_smoother);
          SpikeDetector det(scenario.thresholds, 0.0, 1.0, trace.Q[0]);
          for (std::size_t k = 1; k < trace.Q.size(); ++k) det.push(trace.Q[k]);
          det.finish();
          harvest(det, results[i]);
          if (with_smoother) {
            SpikelessnessReport rep =
                spikelessness_comparison(trace.Q, trace.Qs, trace.R, scenario.level);
            results[i].filtered_excursions = rep.filtered_count;
            results[i].smoothed_excursions = rep.smoothed_count;
          }
          if (i == 0 && scenario.csv_output) {
            std::ostringstream os;
            write_csv(os, trace, scenario.stride);
            traj_csv.str(os.str());
          }
        });
        break;
      }
      case ScenarioKind::classical_sde: {
        T_traj = scenario.sde.T;
        parallel_for(n, workers, [&](std::size_t i) {
          SdeParams p = scenario.sde;
          p.master_seed = scenario.master_seed;
          p.stream_id = scenario.base_stream_id + i;
          const std::size_t n_steps = p.n_steps();
          std::ostringstream os;
          const bool dump = i == 0 && scenario.csv_output &&
                            n_steps / scenario.stride <= 5000000;
          if (p.mode == SdeMode::physical) {
            JointStepper stepper(p, RngStream(p.master_seed, p.stream_id));
            SpikeDetector det(scenario.thresholds, 0.0, p.dt, stepper.q());
            if (dump)
              os << "time,R,X,Q\n" << format_double(0.0) << ',' << stepper.r() << ','
                 << format_double(0.0) << ',' << format_double(stepper.q()) << '\n';
            for (std::size_t k = 0; k < n_steps; ++k) {
              det.push(stepper.step());
              if (dump && (k + 1) % scenario.stride == 0)
                os << format_double(stepper.t()) << ',' << stepper.r() << ','
                   << format_double(stepper.x()) << ',' << format_double(stepper.q()) << '\n';
            }
            det.finish();
            harvest(det, results[i]);
            results[i].diagnostic_mass = stepper.clamp_mass();
          } else {
            RngStream rng(p.master_seed, p.stream_id);
            const double sg = std::sqrt(p.gamma), sdt = std::sqrt(p.dt);
            double Q = p.Q0, clamp = 0.0;
            SpikeDetector det(scenario.thresholds, 0.0, p.dt, Q);
            if (dump) os << "time,Q\n" << format_double(0.0) << ',' << format_double(Q) << '\n';
            for (std::size_t k = 0; k < n_steps; ++k) {
              Q += p.lambda_tilde * (0.5 - Q) * p.dt + sg * Q * (1.0 - Q) * rng.normal() * sdt;
              const double c = std::clamp(Q, 0.0, 1.0);
              clamp += std::abs(Q - c);
              Q = c;
              det.push(Q);
              if (dump && (k + 1) % scenario.stride == 0)
                os << format_double(static_cast<double>(k + 1) * p.dt) << ','
                   << format_double(Q) << '\n';
            }
            det.finish();
            harvest(det, results[i]);
            results[i].diagnostic_mass = clamp;
          }
          if (dump) traj_csv.str(os.str());
        });
        break;
      }
      case ScenarioKind::qubit: {
        T_traj = scenario.qubit.T;
        parallel_for(n, workers, [&](std::size_t i) {
          QubitParams p = scenario.qubit;
          p.master_seed = scenario.master_seed;
          p.stream_id = scenario.base_stream_id + i;
          const std::size_t n_steps = p.n_steps();
          SmeStepper stepper(p, RngStream(p.master_seed, p.stream_id));
          SpikeDetector det(scenario.thresholds, 0.0, p.dt, stepper.q());
          std::ostringstream os;
          const bool dump = i == 0 && scenario.csv_output &&
                            n_steps / scenario.stride <= 5000000;
          if (dump)
            os << "time,Q,Y,purity,X\n" << format_double(0.0) << ','
               << format_double(stepper.q()) << ',' << format_double(stepper.y()) << ','
               << format_double(stepper.rho().det()) << ',' << format_double(0.0) << '\n';
          for (std::size_t k = 0; k < n_steps; ++k) {
            det.push(stepper.step());
            if (dump && (k + 1) % scenario.stride == 0)
              os << format_double(stepper.t()) << ',' << format_double(stepper.q()) << ','
                 << format_double(stepper.y()) << ',' << format_double(stepper.rho().det())
                 << ',' << format_double(stepper.x()) << '\n';
          }
          det.finish();
          harvest(det, results[i]);
          results[i].diagnostic_mass = stepper.projection_mass();
          if (dump) traj_csv.str(os.str());
        });
        break;
      }
    }
  }

  // Deterministic merge ordered by trajectory index.
  std::vector<SpikeEvent> all_events;
  double plateau_time[2] = {0.0, 0.0};
  std::size_t total_jumps = 0, jumps_from_0 = 0;
  double diagnostic_mass = 0.0;
  std::size_t filtered_exc = 0, smoothed_exc = 0;
  for (const TrajResult& r : results) {
    all_events.insert(all_events.end(), r.events.begin(), r.events.end());
    plateau_time[0] += r.plateau_time[0];
    plateau_time[1] += r.plateau_time[1];
    total_jumps += r.n_jumps;
    jumps_from_0 += r.jumps_from_0;
    diagnostic_mass += r.diagnostic_mass;
    filtered_exc += r.filtered_excursions;
    smoothed_exc += r.smoothed_excursions;
  }

  if (needs_ensemble && scenario.csv_output) {
    std::ofstream ev(std::filesystem::path(scenario.out_dir) / "events.csv");
    ev << "trajectory,plateau,t_start,t_max,t_end,height,complete\n";
    std::size_t i = 0;
    for (const TrajResult& r : results) {
      for (const SpikeEvent& e : r.events)
        ev << i << ',' << e.plateau << ',' << format_double(e.t_start) << ','
           << format_double(e.t_max) << ',' << format_double(e.t_end) << ','
           << format_double(e.height) << ',' << (e.complete ? 1 : 0) << '\n';
      ++i;
    }
    if (!traj_csv.str().empty()) {
      std::ofstream tf(std::filesystem::path(scenario.out_dir) / "trajectory.csv");
      tf << traj_csv.str();
    }
  }

  nlohmann::json report;
  report["name"] = scenario.name;
  report["version"] = kVersion;
  report["master_seed"] = scenario.master_seed;
  report["n_trajectories"] = n;
  report["projected_steps"] = projected;
  nlohmann::json echo = nlohmann::json::object();
  for (const auto& [k, v] : scenario.echo) echo[k] = v;
  report["config"] = echo;
  if (needs_ensemble) {
    report["totals"] = {{"events", all_events.size()},
                        {"complete_jumps", total_jumps},
                        {"plateau_time_0", plateau_time[0]},
                        {"plateau_time_1", plateau_time[1]},
                        {"diagnostic_mass", diagnostic_mass}};
  }

  const double model_prefactor =
      scenario.kind == ScenarioKind::qubit
          ? scenario.qubit.omega * scenario.qubit.omega
          : (scenario.kind == ScenarioKind::classical_sde ? scenario.sde.lambda_tilde
                                                          : 2.0 * scenario.discrete.lambda);
  const double prefactor = scenario.prefactor >= 0.0 ? scenario.prefactor : model_prefactor;

  nlohmann::json tests = nlohmann::json::object();
  if (wants(scenario, "shape")) tests["shape"] = to_json(band_shape_test(all_events, scenario.bands));
  if (wants(scenario, "max_law")) tests["max_law"] = to_json(max_law_test(all_events, scenario.q0));
  if (wants(scenario, "prefactor")) {
    const double T_total = plateau_time[0] + plateau_time[1];
    tests["prefactor"] = {{"fitted", fit_prefactor(all_events, scenario.q0, T_total)},
                          {"reference", model_prefactor},
                          {"plateau_time", T_total}};
  }
  if (wants(scenario, "poisson")) {
    std::vector<RectDomain> domains;
    for (const auto& [lo, hi] : scenario.bands) domains.push_back({0.0, T_traj, lo, hi});
    tests["poisson"] =
        to_json(poisson_test(all_events, domains, prefactor * static_cast<double>(n)));
  }
  if (wants(scenario, "scale")) {
    RectDomain d = scenario.scale_domain;
    if (d.t_hi <= d.t_lo) d.t_hi = T_traj / scenario.scale_A;
    tests["scale"] = to_json(scale_invariance_test(all_events, d, scenario.scale_A));
  }
  if (wants(scenario, "jump_rate")) {
    const double total_time = static_cast<double>(n) * T_traj;
    tests["jump_rate"] = {{"jumps_total", total_jumps},
                          {"jumps_from_0", jumps_from_0},
                          {"rate_total", static_cast<double>(total_jumps) / total_time},
                          {"rate_per_direction",
                           static_cast<double>(jumps_from_0) / total_time},
                          {"reference", model_prefactor}};
  }
  if (wants(scenario, "spikeless")) {
    tests["spikeless"] = {{"filtered_excursions", filtered_exc},
                          {"smoothed_excursions", smoothed_exc},
                          {"ratio", filtered_exc == 0
                                        ? 0.0
                                        : static_cast<double>(smoothed_exc) /
                                              static_cast<double>(filtered_exc)}};
  }
  if (wants(scenario, "wrong_prediction")) {
    SdeParams base = scenario.sde;
    base.master_seed = scenario.master_seed;
    base.stream_id = scenario.base_stream_id;
    const double gap = scenario.gap > 0.0 ? scenario.gap
                                          : std::log(2.0) / base.lambda_tilde;
    tests["wrong_prediction"] =
        to_json(wrong_prediction_probability(base, scenario.t1, scenario.t1 + gap, n));
    tests["wrong_prediction"]["gap"] = gap;
  }
  report["tests"] = tests;

  const auto t_end = std::chrono::steady_clock::now();
  report["wall_clock_s"] =
      std::chrono::duration<double>(t_end - t_begin).count();

  if (scenario.json_output) {
    std::ofstream rf(std::filesystem::path(scenario.out_dir) / "report.json");
    rf << report.dump(2) << '\n';
  }
  return report;
}

}  // namespace spikes
