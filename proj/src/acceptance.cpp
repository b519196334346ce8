#include "spikes/acceptance.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <optional>
#include <sstream>

#include "spikes/analysis.hpp"
#include "spikes/discrete.hpp"
#include "spikes/ensemble.hpp"
#include "spikes/qubit.hpp"
#include "spikes/scenario.hpp"
#include "spikes/sde.hpp"

namespace spikes::acceptance {

namespace {

struct Outcome {
  bool pass = false;
  std::string details;
};

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const std::vector<std::pair<double, double>> kBands = {{0.1, 0.2}, {0.2, 0.4}, {0.4, 0.8}};

// ---- classical toy-model ensemble (shared by criteria 4, 5, 6) ----

struct ToyEnsemble {
  std::vector<SpikeEvent> events;
  double plateau_time[2] = {0.0, 0.0};
  std::size_t jumps = 0;
  double elapsed = 0.0;
};

ToyEnsemble run_toy_ensemble(const SdeParams& base, std::size_t n_traj,
                             const DetectionThresholds& th, std::size_t workers) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<ToyEnsemble> parts(n_traj);
  parallel_for(n_traj, workers, [&](std::size_t i) {
    SdeParams p = base;
    p.stream_id = base.stream_id + i;
    JointStepper stepper(p, RngStream(p.master_seed, p.stream_id));
    SpikeDetector det(th, 0.0, p.dt, stepper.q());
    const std::size_t n_steps = p.n_steps();
    for (std::size_t k = 0; k < n_steps; ++k) det.push(stepper.step());
    det.finish();
    parts[i].events = det.events();
    parts[i].plateau_time[0] = det.plateau_time(0);
    parts[i].plateau_time[1] = det.plateau_time(1);
    parts[i].jumps = det.n_complete_jumps();
  });
  ToyEnsemble out;
  for (ToyEnsemble& p : parts) {
    out.events.insert(out.events.end(), p.events.begin(), p.events.end());
    out.plateau_time[0] += p.plateau_time[0];
    out.plateau_time[1] += p.plateau_time[1];
    out.jumps += p.jumps;
  }
  out.elapsed = seconds_since(t0);
  return out;
}

// Criterion 4's run: gamma=1e4, lambda_tilde=1, dt=1e-6, 16 trajectories of
// T=30 started on plateau 0 (480 time units total, ~half on each plateau).
const ToyEnsemble& toy_run4(std::size_t workers) {
  static std::optional<ToyEnsemble> cache;
  static std::mutex m;
  std::lock_guard<std::mutex> lock(m);
  if (!cache) {
    SdeParams base;
    base.lambda_tilde = 1.0;
    base.gamma = 1e4;
    base.dt = 1e-6;
    base.T = 30.0;
    base.Q0 = 0.0;
    base.R0 = 0;
    base.master_seed = 20240801;
    base.stream_id = 0;
    cache = run_toy_ensemble(base, 16, DetectionThresholds{}, workers);
  }
  return *cache;
}

std::vector<SpikeEvent> plateau0_events(const ToyEnsemble& run) {
  std::vector<SpikeEvent> out;
  for (const SpikeEvent& e : run.events)
    if (e.plateau == 0) out.push_back(e);
  return out;
}

// ---- qubit ensemble (shared by criteria 8, 9) ----

struct QubitEnsemble {
  std::vector<SpikeEvent> events;
  double plateau_time[2] = {0.0, 0.0};
  std::size_t jumps = 0;
  std::size_t jumps_from_0 = 0;
  double total_time = 0.0;
  double elapsed = 0.0;
};

QubitEnsemble run_qubit_ensemble(const QubitParams& base, std::size_t n_traj,
                                 const DetectionThresholds& th, std::size_t workers) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<QubitEnsemble> parts(n_traj);
  parallel_for(n_traj, workers, [&](std::size_t i) {
    QubitParams p = base;
    p.stream_id = base.stream_id + i;
    SmeStepper stepper(p, RngStream(p.master_seed, p.stream_id));
    SpikeDetector det(th, 0.0, p.dt, stepper.q());
    const std::size_t n_steps = p.n_steps();
    for (std::size_t k = 0; k < n_steps; ++k) det.push(stepper.step());
    det.finish();
    parts[i].events = det.events();
    parts[i].plateau_time[0] = det.plateau_time(0);
    parts[i].plateau_time[1] = det.plateau_time(1);
    parts[i].jumps = det.n_complete_jumps();
    for (const SpikeEvent& e : parts[i].events)
      if (e.complete && e.plateau == 0) ++parts[i].jumps_from_0;
  });
  QubitEnsemble out;
  for (QubitEnsemble& p : parts) {
    out.events.insert(out.events.end(), p.events.begin(), p.events.end());
    out.plateau_time[0] += p.plateau_time[0];
    out.plateau_time[1] += p.plateau_time[1];
    out.jumps += p.jumps;
    out.jumps_from_0 += p.jumps_from_0;
  }
  out.total_time = base.T * static_cast<double>(n_traj);
  out.elapsed = seconds_since(t0);
  return out;
}

// Criterion 8's main run: omega=1, gamma=1e4, dt=1e-6, 8 trajectories of
// T=37.5 (300 time units).
const QubitEnsemble& qubit_run8(std::size_t workers) {
  static std::optional<QubitEnsemble> cache;
  static std::mutex m;
  std::lock_guard<std::mutex> lock(m);
  if (!cache) {
    QubitParams base;
    base.gamma = 1e4;
    base.omega = 1.0;
    base.omega_mode = OmegaMode::scaled;
    base.dt = 1e-6;
    base.T = 37.5;
    base.rho0 = {0.0, 0.0, 1.0};
    base.master_seed = 31337;
    base.stream_id = 0;
    cache = run_qubit_ensemble(base, 8, DetectionThresholds{}, workers);
  }
  return *cache;
}

// ---- criteria ----

Outcome criterion_oracle(PosteriorMode mode) {
  const auto t0 = std::chrono::steady_clock::now();
  double max_diff = 0.0;
  for (int i = 0; i < 100; ++i) {
    RngStream g(987654321, static_cast<std::uint64_t>(i));
    DiscreteModelParams p;
    p.epsilon = 0.05 + 0.9 * g.uniform();
    p.lambda = 0.5 * g.uniform();
    p.n_steps = 12;
    p.Q0 = g.uniform();
    std::vector<std::int8_t> delta(p.n_steps);
    for (auto& d : delta) d = g.uniform() < 0.5 ? std::int8_t{1} : std::int8_t{-1};
    const std::vector<double> fast =
        mode == PosteriorMode::filtered ? run_filter(delta, p) : smooth(delta, p);
    const std::vector<double> exact = brute_force_posterior(delta, p, mode);
    for (std::size_t k = 0; k < fast.size(); ++k)
      max_diff = std::max(max_diff, std::abs(fast[k] - exact[k]));
  }
  const double elapsed = seconds_since(t0);
  std::ostringstream os;
  os << "max |diff| = " << max_diff << " over 100 instances (n=12), " << std::fixed
     << std::setprecision(2) << elapsed << " s";
  return {max_diff <= 1e-12 && elapsed < 5.0, os.str()};
}

Outcome criterion3(std::size_t workers) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t N = 10000;
  SdeParams base;
  base.lambda_tilde = 1.0;
  base.gamma = 100.0;
  base.dt = 1e-4;
  base.T = 1.0;
  base.Q0 = 1.0;
  base.mode = SdeMode::innovation;
  base.master_seed = 42;
  std::vector<double> finals(N);
  parallel_for(N, workers, [&](std::size_t i) {
    RngStream rng(base.master_seed, i);
    const double sg = std::sqrt(base.gamma), sdt = std::sqrt(base.dt);
    double Q = base.Q0;
    const std::size_t n_steps = base.n_steps();
    for (std::size_t k = 0; k < n_steps; ++k) {
      Q += base.lambda_tilde * (0.5 - Q) * base.dt +
           sg * Q * (1.0 - Q) * rng.normal() * sdt;
      Q = std::clamp(Q, 0.0, 1.0);
    }
    finals[i] = Q;
  });
  const MeanVar mv = mean_var(finals);
  const double target = 0.5 + 0.5 * std::exp(-1.0);
  const double tol = 3.0 * mv.stderr_mean();
  const double elapsed = seconds_since(t0);
  std::ostringstream os;
  os << "mean Q(1) = " << std::setprecision(6) << mv.mean << ", target " << target
     << ", tol " << tol << ", " << std::setprecision(2) << std::fixed << elapsed << " s";
  return {std::abs(mv.mean - target) <= tol && elapsed < 120.0, os.str()};
}

Outcome criterion4(std::size_t workers) {
  const ToyEnsemble& run = toy_run4(workers);
  const std::vector<SpikeEvent> ev0 = plateau0_events(run);
  const BandShapeReport shape = band_shape_test(ev0, kBands);
  std::ostringstream os;
  os << "plateau-0 time " << std::setprecision(4) << run.plateau_time[0] << ", counts";
  for (const auto& b : shape.bands) os << ' ' << b.observed;
  os << " (z";
  for (const auto& b : shape.bands) os << ' ' << std::setprecision(2) << b.z;
  os << "), " << std::fixed << std::setprecision(1) << run.elapsed << " s";
  const bool pass =
      run.plateau_time[0] >= 200.0 && shape.pass && run.elapsed < 1200.0;
  return {pass, os.str()};
}

Outcome criterion5(std::size_t workers) {
  const ToyEnsemble& run = toy_run4(workers);
  const std::vector<SpikeEvent> ev0 = plateau0_events(run);
  const double lambda_tilde = 1.0;
  const double fitted = fit_prefactor(ev0, 0.1, run.plateau_time[0]);
  std::ostringstream os;
  os << "fitted prefactor " << std::setprecision(4) << fitted << " vs lambda_tilde "
     << lambda_tilde << " (band [0.4, 1.2])";
  return {fitted >= 0.4 * lambda_tilde && fitted <= 1.2 * lambda_tilde, os.str()};
}

Outcome criterion6(std::size_t workers) {
  const ToyEnsemble& run = toy_run4(workers);
  const MaxLawReport rep = max_law_test(plateau0_events(run), 0.1);
  std::ostringstream os;
  os << rep.n_events << " events (" << rep.n_complete << " complete), KS d = "
     << std::setprecision(4) << rep.ks_d << ", p = " << rep.p_value;
  return {rep.n_events >= 500 && !rep.insufficient_data && rep.p_value > 0.01, os.str()};
}

Outcome criterion7() {
  const auto t0 = std::chrono::steady_clock::now();
  SdeParams base;
  base.lambda_tilde = 1.0;
  base.gamma = 1e4;
  base.dt = 1e-6;
  base.Q0 = 0.0;
  base.R0 = 0;
  base.master_seed = 777;
  const double t1 = 0.05;
  const double t2 = t1 + std::log(2.0);  // gap = ln2 / lambda_tilde
  base.T = t2;
  const WrongPredictionReport rep = wrong_prediction_probability(base, t1, t2, 2000);
  const double elapsed = seconds_since(t0);
  std::ostringstream os;
  os << "estimate " << std::setprecision(4) << rep.interval.p_hat << " (95% CI ["
     << rep.interval.lo << ", " << rep.interval.hi << "], " << rep.n_wrong << "/"
     << rep.n << " wrong, " << rep.n_never_settled << " never settled), " << std::fixed
     << std::setprecision(1) << elapsed << " s";
  const bool pass =
      rep.interval.p_hat >= 0.45 && rep.interval.p_hat <= 0.55 && elapsed < 900.0;
  return {pass, os.str()};
}

Outcome criterion8(std::size_t workers) {
  const QubitEnsemble& main = qubit_run8(workers);
  const double rate_total = static_cast<double>(main.jumps) / main.total_time;
  const double rate_dir = static_cast<double>(main.jumps_from_0) / main.total_time;
  const double omega2 = 1.0;
  const bool main_ok =
      (rate_total >= 0.85 * omega2 && rate_total <= 1.15 * omega2) ||
      (rate_dir >= 0.85 * omega2 && rate_dir <= 1.15 * omega2);

  // Scaling check at omega = 0.5 on a cheaper grid (gamma = 2500, dt = 4e-6,
  // still gamma*dt = 0.01): the rate ratio should be 0.25 +- 20%.
  QubitParams base;
  base.gamma = 2500.0;
  base.omega = 1.0;
  base.omega_mode = OmegaMode::scaled;
  base.dt = 4e-6;
  base.T = 150.0;
  base.rho0 = {0.0, 0.0, 1.0};
  base.master_seed = 424242;
  const QubitEnsemble r1 = run_qubit_ensemble(base, 8, DetectionThresholds{}, workers);
  base.omega = 0.5;
  base.T = 600.0;
  base.master_seed = 424243;
  const QubitEnsemble r05 = run_qubit_ensemble(base, 8, DetectionThresholds{}, workers);
  const double ratio = (static_cast<double>(r05.jumps) / r05.total_time) /
                       (static_cast<double>(r1.jumps) / r1.total_time);
  const bool ratio_ok = ratio >= 0.2 && ratio <= 0.3;

  std::ostringstream os;
  os << "rate total " << std::setprecision(4) << rate_total << ", per-direction "
     << rate_dir << " (target omega^2 = 1, band [0.85, 1.15]); scaling ratio "
     << ratio << " (band [0.2, 0.3]); jumps " << main.jumps << "/" << r1.jumps << "/"
     << r05.jumps;
  return {main_ok && ratio_ok, os.str()};
}

Outcome criterion9(std::size_t workers) {
  const QubitEnsemble& run = qubit_run8(workers);
  const BandShapeReport shape = band_shape_test(run.events, kBands);
  std::ostringstream os;
  os << "counts";
  for (const auto& b : shape.bands) os << ' ' << b.observed;
  os << " (z";
  for (const auto& b : shape.bands) os << ' ' << std::setprecision(2) << b.z;
  os << ")";
  return {shape.pass, os.str()};
}

Outcome criterion10(std::size_t workers) {
  // Part one: ensemble mean vs the noise-free master equation.
  QubitParams base;
  base.gamma = 10.0;
  base.omega = 1.0;
  base.omega_mode = OmegaMode::scaled;
  base.dt = 2e-5;
  base.T = 1.0;
  base.rho0 = {1.0, 0.0, 0.0};
  base.master_seed = 555;
  const std::size_t N = 10000;
  std::vector<double> xs(N), ys(N), zs(N);
  parallel_for(N, workers, [&](std::size_t i) {
    QubitParams p = base;
    p.stream_id = i;
    SmeStepper stepper(p, RngStream(p.master_seed, p.stream_id));
    const std::size_t n_steps = p.n_steps();
    for (std::size_t k = 0; k < n_steps; ++k) stepper.step();
    const BlochVector b = stepper.rho().bloch();
    xs[i] = b.x;
    ys[i] = b.y;
    zs[i] = b.z;
  });
  const BlochVector ref = lindblad_mean(base, base.T).bloch();
  const MeanVar mx = mean_var(xs), my = mean_var(ys), mz = mean_var(zs);
  const bool mean_ok = std::abs(mx.mean - ref.x) <= 3.0 * mx.stderr_mean() &&
                       std::abs(my.mean - ref.y) <= 3.0 * my.stderr_mean() &&
                       std::abs(mz.mean - ref.z) <= 3.0 * mz.stderr_mean();

  // Part two: det rho supermartingale trend from the maximally mixed state,
  // gamma*T = 20.
  QubitParams pb;
  pb.gamma = 10.0;
  pb.omega = 1.0;
  pb.omega_mode = OmegaMode::scaled;
  pb.dt = 1e-4;
  pb.T = 2.0;
  pb.rho0 = {0.0, 0.0, 0.0};
  pb.master_seed = 556;
  const std::size_t M = 200, n_check = 10;
  std::vector<std::array<double, 10>> dets(M);
  parallel_for(M, workers, [&](std::size_t i) {
    QubitParams p = pb;
    p.stream_id = i;
    SmeStepper stepper(p, RngStream(p.master_seed, p.stream_id));
    const std::size_t n_steps = p.n_steps();
    const std::size_t per = n_steps / n_check;
    for (std::size_t c = 0; c < n_check; ++c) {
      for (std::size_t k = 0; k < per; ++k) stepper.step();
      dets[i][c] = stepper.rho().det();
    }
  });
  std::array<double, 10> mean_det{};
  for (std::size_t i = 0; i < M; ++i)
    for (std::size_t c = 0; c < n_check; ++c) mean_det[c] += dets[i][c] / static_cast<double>(M);
  // Supermartingale trend via paired differences: each step down is allowed
  // sampling noise but no significant rise.
  bool monotone = 0.25 >= mean_det[0] - 1e-12;  // det of the maximally mixed start
  for (std::size_t c = 1; c < n_check; ++c) {
    double dm = 0.0, dv = 0.0;
    for (std::size_t i = 0; i < M; ++i) dm += (dets[i][c] - dets[i][c - 1]) / static_cast<double>(M);
    for (std::size_t i = 0; i < M; ++i) {
      const double d = dets[i][c] - dets[i][c - 1] - dm;
      dv += d * d / static_cast<double>(M - 1);
    }
    if (dm > 3.0 * std::sqrt(dv / static_cast<double>(M)) + 1e-12) monotone = false;
  }
  // The mean is dominated by rare slow purifiers, so the typical trajectory is
  // summarized by the median.
  std::vector<double> final_dets(M);
  for (std::size_t i = 0; i < M; ++i) final_dets[i] = dets[i][n_check - 1];
  std::nth_element(final_dets.begin(), final_dets.begin() + M / 2, final_dets.end());
  const double median_det = final_dets[M / 2];
  const bool purity_ok = monotone && median_det < 1e-3;

  std::ostringstream os;
  os << "mean (" << std::setprecision(4) << mx.mean << ", " << my.mean << ", " << mz.mean
     << ") vs lindblad (" << ref.x << ", " << ref.y << ", " << ref.z
     << "); median final det = " << std::scientific << std::setprecision(2)
     << median_det << (monotone ? ", mean monotone" : ", mean NOT monotone");
  return {mean_ok && purity_ok, os.str()};
}

Outcome criterion11() {
  DiscreteModelParams p;
  p.epsilon = 0.3;
  p.lambda = 5e-5;
  p.n_steps = 1000000;
  p.master_seed = 999;
  p.stream_id = 0;
  const DiscreteTrace trace = simulate_trace(p, /*with_smoother=*/true);
  const SpikelessnessReport rep = spikelessness_comparison(trace.Q, trace.Qs, trace.R, 0.5);
  std::ostringstream os;
  os << "filtered " << rep.filtered_count << ", smoothed " << rep.smoothed_count
     << ", ratio " << std::setprecision(4) << rep.ratio;
  return {rep.filtered_count > 0 && rep.ratio < 0.05, os.str()};
}

Outcome criterion12(const Options& opt) {
  const std::string cfg = opt.scenario_dir + "/AC4.cfg";
  Scenario s1 = parse_scenario(cfg);
  s1.out_dir = opt.out_dir + "/ac12_w1";
  run_scenario(s1, 1);
  Scenario s8 = parse_scenario(cfg);
  s8.out_dir = opt.out_dir + "/ac12_w8";
  run_scenario(s8, 8);

  const auto slurp = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  };
  const std::string a = slurp(s1.out_dir + "/events.csv");
  const std::string b = slurp(s8.out_dir + "/events.csv");
  std::ostringstream os;
  os << "events.csv " << a.size() << " bytes, workers 1 vs 8 "
     << (a == b && !a.empty() ? "identical" : "DIFFER");
  return {!a.empty() && a == b, os.str()};
}

}  // namespace

bool run(const std::vector<int>& ids, const Options& options, std::ostream& os) {
  bool all_pass = true;
  for (int id : ids) {
    Outcome out;
    switch (id) {
      case 1: out = criterion_oracle(PosteriorMode::filtered); break;
      case 2: out = criterion_oracle(PosteriorMode::smoothed); break;
      case 3: out = criterion3(options.workers); break;
      case 4: out = criterion4(options.workers); break;
      case 5: out = criterion5(options.workers); break;
      case 6: out = criterion6(options.workers); break;
      case 7: out = criterion7(); break;
      case 8: out = criterion8(options.workers); break;
      case 9: out = criterion9(options.workers); break;
      case 10: out = criterion10(options.workers); break;
      case 11: out = criterion11(); break;
      case 12: out = criterion12(options); break;
      default:
        out = {false, "unknown criterion"};
    }
    os << "AC" << id << ": " << (out.pass ? "PASS" : "FAIL") << "  " << out.details
       << '\n';
    os.flush();
    if (!out.pass) all_pass = false;
  }
  return all_pass;
}

}  // namespace spikes::acceptance
