#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spikes/acceptance.hpp"
#include "spikes/analysis.hpp"
#include "spikes/path.hpp"
#include "spikes/qubit.hpp"
#include "spikes/scenario.hpp"
#include "spikes/sde.hpp"

namespace {

using namespace spikes;

struct CommonOpts {
  std::string config;
  std::int64_t seed = -1;
  std::size_t workers = 1;
  std::string out;
  std::string format;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required) {
  auto* c = cmd->add_option("--config", opts.config, "scenario config file");
  if (config_required) c->required();
  cmd->add_option("--seed", opts.seed, "override the master seed");
  cmd->add_option("--workers", opts.workers, "worker threads");
  cmd->add_option("--out", opts.out, "output directory");
  cmd->add_option("--format", opts.format, "output formats, e.g. csv,json");
}

Scenario load(const CommonOpts& opts) {
  Scenario s = parse_scenario(opts.config);
  if (opts.seed >= 0) s.master_seed = static_cast<std::uint64_t>(opts.seed);
  if (!opts.out.empty()) s.out_dir = opts.out;
  if (!opts.format.empty()) {
    s.csv_output = opts.format.find("csv") != std::string::npos;
    s.json_output = opts.format.find("json") != std::string::npos;
  }
  return s;
}

// Streams a classical joint trajectory to CSV without holding the path.
void stream_classical(const SdeParams& params, std::size_t stride, std::ostream& os) {
  JointStepper stepper(params, RngStream(params.master_seed, params.stream_id));
  os << "# time,R,X,Q  (hidden telegraph, integrated signal, filter)\n";
  os << "time,R,X,Q\n";
  os << format_double(0.0) << ',' << stepper.r() << ',' << format_double(0.0) << ','
     << format_double(stepper.q()) << '\n';
  const std::size_t n_steps = params.n_steps();
  for (std::size_t k = 0; k < n_steps; ++k) {
    stepper.step();
    if ((k + 1) % stride == 0)
      os << format_double(stepper.t()) << ',' << stepper.r() << ','
         << format_double(stepper.x()) << ',' << format_double(stepper.q()) << '\n';
  }
}

void stream_qubit(const QubitParams& params, std::size_t stride, std::ostream& os) {
  SmeStepper stepper(params, RngStream(params.master_seed, params.stream_id));
  os << "# time,Q,Y,purity,X  (Q = <+|rho|+>, Y = sqrt(gamma) Re<+|rho|->, det rho, signal)\n";
  os << "time,Q,Y,purity,X\n";
  os << format_double(0.0) << ',' << format_double(stepper.q()) << ','
     << format_double(stepper.y()) << ',' << format_double(stepper.rho().det()) << ','
     << format_double(0.0) << '\n';
  const std::size_t n_steps = params.n_steps();
  for (std::size_t k = 0; k < n_steps; ++k) {
    stepper.step();
    if ((k + 1) % stride == 0)
      os << format_double(stepper.t()) << ',' << format_double(stepper.q()) << ','
         << format_double(stepper.y()) << ',' << format_double(stepper.rho().det()) << ','
         << format_double(stepper.x()) << '\n';
  }
}

std::size_t stride_for(std::size_t n_steps) {
  return std::max<std::size_t>(1, n_steps / 20000);
}

int reproduce_figure(int figure, const std::string& out_dir, std::uint64_t seed,
                     std::size_t workers) {
  (void)workers;
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::vector<double> gammas = {1e-2, 1.0, 1e2, 1e4};
  switch (figure) {
    case 2: {
      for (double g : gammas) {
        SdeParams p;
        p.lambda_tilde = 1.0;
        p.gamma = g;
        p.dt = std::min(1e-3, 0.01 / g);
        p.T = 10.0;
        p.Q0 = 0.5;
        p.master_seed = seed;
        std::ostringstream name;
        name << "fig2_gamma_" << g << ".csv";
        std::ofstream f(fs::path(out_dir) / name.str());
        stream_classical(p, stride_for(p.n_steps()), f);
      }
      return 0;
    }
    case 3: {
      // Spikes within a plateau-0 stretch, with the detected spike maxima as
      // an overlay file.
      SdeParams p;
      p.lambda_tilde = 1.0;
      p.gamma = 1e4;
      p.dt = 1e-6;
      p.T = 10.0;
      p.Q0 = 0.0;
      p.R0 = 0;
      p.master_seed = seed;
      CoupledTrace trace = simulate_joint_scheduled(p, {});
      {
        std::ofstream f(fs::path(out_dir) / "fig3_trajectory.csv");
        f << "# time,Q during a stretch with R = 0\n";
        f << "time,Q\n";
        const std::size_t stride = stride_for(p.n_steps());
        for (std::size_t k = 0; k < trace.Q.size(); k += stride)
          f << format_double(trace.grid.time(k)) << ',' << format_double(trace.Q[k]) << '\n';
      }
      {
        const auto events = extract_spikes(trace.Q, trace.grid, DetectionThresholds{});
        std::ofstream f(fs::path(out_dir) / "fig3_spikes.csv");
        f << "# spike maxima overlay: t_max,height\n";
        f << "t_max,height\n";
        for (const SpikeEvent& e : events)
          if (!e.complete)
            f << format_double(e.t_max) << ',' << format_double(e.height) << '\n';
      }
      return 0;
    }
    case 4: {
      for (double g : gammas) {
        QubitParams p;
        p.gamma = g;
        p.omega_mode = OmegaMode::affine;  // Omega = 2 + sqrt(gamma)
        p.dt = std::min(1e-3, 0.01 / g);
        p.T = 10.0;
        p.rho0 = {0.0, 0.0, 1.0};
        p.master_seed = seed;
        std::ostringstream name;
        name << "fig4_gamma_" << g << ".csv";
        std::ofstream f(fs::path(out_dir) / name.str());
        stream_qubit(p, stride_for(p.n_steps()), f);
      }
      return 0;
    }
    case 5: {
      DiscreteModelParams p;
      p.epsilon = 0.3;
      p.lambda = 5e-5;
      p.n_steps = 1000000;
      p.master_seed = seed;
      const DiscreteTrace trace = simulate_trace(p, /*with_smoother=*/true);
      std::ofstream f(fs::path(out_dir) / "fig5.csv");
      f << "# step,R,Q,Qs (hidden state, filtered estimate, smoothed estimate)\n";
      f << "step,R,Q,Qs\n";
      for (std::size_t k = 0; k < trace.Q.size(); k += 50)
        f << k << ',' << int(trace.R[k]) << ',' << format_double(trace.Q[k]) << ','
          << format_double(trace.Qs[k]) << '\n';
      return 0;
    }
    default:
      std::cerr << "unknown figure " << figure << " (supported: 2, 3, 4, 5)\n";
      return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spikes: simulation and statistics of monitored jump processes"};
  app.require_subcommand(1);

  CommonOpts sim_opts, ana_opts;
  auto* sim = app.add_subcommand("simulate", "run a scenario, write trajectories and events");
  add_common(sim, sim_opts, true);
  auto* ana = app.add_subcommand("analyze", "run a scenario including its statistical tests");
  add_common(ana, ana_opts, true);

  int figure = 0;
  std::string fig_out = "figures";
  std::uint64_t fig_seed = 7;
  std::size_t fig_workers = 1;
  auto* fig = app.add_subcommand("reproduce-figure",
                                 "emit plot-ready data for the built-in demo figures");
  fig->add_option("figure", figure, "figure number (2, 3, 4 or 5)")->required();
  fig->add_option("--out", fig_out, "output directory");
  fig->add_option("--seed", fig_seed, "master seed");
  fig->add_option("--workers", fig_workers, "worker threads");

  std::string acc_id = "all";
  spikes::acceptance::Options acc_opts;
  auto* acc = app.add_subcommand("acceptance", "run acceptance criteria");
  acc->add_option("id", acc_id, "criterion number or 'all'");
  acc->add_option("--workers", acc_opts.workers, "worker threads");
  acc->add_option("--scenarios", acc_opts.scenario_dir, "scenario config directory");
  acc->add_option("--out", acc_opts.out_dir, "scratch output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed()) {
      Scenario s = load(sim_opts);
      s.tests.clear();  // simulate only; analysis comes from `analyze`
      run_scenario(s, sim_opts.workers);
      return 0;
    }
    if (ana->parsed()) {
      Scenario s = load(ana_opts);
      const nlohmann::json report = run_scenario(s, ana_opts.workers);
      std::cout << report.dump(2) << '\n';
      return 0;
    }
    if (fig->parsed()) return reproduce_figure(figure, fig_out, fig_seed, fig_workers);
    if (acc->parsed()) {
      std::vector<int> ids;
      if (acc_id == "all") {
        ids = spikes::acceptance::all_ids();
      } else {
        try {
          ids.push_back(std::stoi(acc_id));
        } catch (...) {
          std::cerr << "acceptance: expected a criterion number or 'all'\n";
          return 2;
        }
      }
      return spikes::acceptance::run(ids, acc_opts, std::cout) ? 0 : 1;
    }
  } catch (const ScenarioError& e) {
    std::cerr << e.what() << '\n';
    return e.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
