// SPDX-License-Identifier: Apache-2.0

#include "mi_isac/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "mi_isac/comms.hpp"
#include "mi_isac/error.hpp"

namespace mi_isac::analysis {

std::string to_string(NoiseProfile profile) {
  return profile == NoiseProfile::Ideal ? "ideal" : "practical";
}

NoiseModel<double> Scenario::noise(NoiseProfile profile) const {
  NoiseModel<double> model{temperature_k, 0.0, 0.0, carrier.bandwidth_hz};
  if (profile == NoiseProfile::Practical) {
    model.noise_figure_db = noise_figure_db;
    model.insertion_loss_db = insertion_loss_db;
  }
  return model;
}

double Scenario::noise_variance(NoiseProfile profile) const {
  return effective_noise_variance(noise(profile));
}

LinkGeometry<double> Scenario::geometry(double range_m) const {
  return LinkGeometry<double>{range_m, theta_rad, phi_rad, tx_orientation, rx_orientation};
}

double Scenario::sqrt_crb(double range_m, NoiseProfile profile) const {
  return std::sqrt(crb_range_analytic(geometry(range_m), coil, carrier, frame, noise(profile)));
}

double tof_resolution(double bandwidth_hz) {
  detail::require(std::isfinite(bandwidth_hz) && bandwidth_hz > 0.0, ErrorCode::InvalidParameter,
                  "bandwidth must be positive");
  return constants::speed_of_light<double> / (2.0 * bandwidth_hz);
}

double crossover_range(const Scenario& scenario, double tof_bandwidth_hz, double lo, double hi,
                       double tolerance) {
  detail::require(lo > 0.0 && hi > lo && tolerance > 0.0, ErrorCode::InvalidParameter,
                  "invalid crossover bracket");
  const double target = tof_resolution(tof_bandwidth_hz);
  const auto excess = [&](double r) { return scenario.sqrt_crb(r) - target; };
  if (excess(lo) > 0.0) {
    throw Error(ErrorCode::NoCrossover, "MI bound is coarser than ToF over the whole bracket");
  }
  if (excess(hi) < 0.0) {
    throw Error(ErrorCode::NoCrossover, "MI bound is finer than ToF over the whole bracket");
  }
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<ResolutionRecord> resolution_sweep(std::span<const double> ranges,
                                               const Scenario& scenario,
                                               double reference_bandwidth_hz) {
  const double crossover = crossover_range(scenario, reference_bandwidth_hz);
  std::vector<ResolutionRecord> records;
  records.reserve(ranges.size());
  for (const double r : ranges) {
    records.push_back(ResolutionRecord{r, scenario.sqrt_crb(r),
                                       tof_resolution(scenario.carrier.bandwidth_hz),
                                       tof_resolution(reference_bandwidth_hz), crossover});
  }
  return records;
}

int independent_observations(AxisKind axes) { return axes == AxisKind::TriAxial ? 6 : 1; }

GainRecord isac_gain(double alpha, double snr_db, AxisKind axes) {
  detail::require(alpha > 0.0 && alpha < 1.0, ErrorCode::InvalidParameter,
                  "pilot fraction must lie in (0, 1)");
  detail::require(!std::isnan(snr_db) && snr_db != -std::numeric_limits<double>::infinity(),
                  ErrorCode::InvalidParameter, "SNR must be a number or +inf");
  GainRecord record;
  record.alpha = alpha;
  record.snr_db = snr_db;
  record.axes = axes;
  record.time_mux_gain_db = 10.0 * std::log10(1.0 / alpha);
  const double snr = std::isinf(snr_db) ? snr_db : std::pow(10.0, snr_db / 10.0);
  const double structural =
      comms::nda_efficiency(snr) * double(independent_observations(axes));
  record.structural_gain_db = std::max(0.0, 10.0 * std::log10(structural));
  record.total_gain_db = record.time_mux_gain_db + record.structural_gain_db;
  return record;
}

const SweepCell& MonteCarloSweep::cell(std::size_t cell_index, NoiseProfile profile) const {
  for (const SweepCell& c : cells) {
    if (c.cell_index == cell_index && c.profile == profile) return c;
  }
  throw Error(ErrorCode::InvalidParameter, "no such sweep cell");
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t cell_index) {
  return base_seed ^ mix64(std::uint64_t(cell_index));
}

std::uint64_t trial_seed(std::uint64_t cell, int trial) {
  return mix64(cell + std::uint64_t(trial) * 0x9e3779b97f4a7c15ULL);
}

namespace {

struct CellPair {
  SweepCell ideal;
  SweepCell practical;
};

CellPair run_cell(const SweepConfig& config, std::size_t index, std::uint64_t base_seed) {
  const Scenario& sc = config.scenario;
  const double range = config.ranges[index];
  const LinkGeometry<double> geometry = sc.geometry(range);
  const ChannelMatrix<double> channel = channel_matrix(geometry, sc.coil, sc.carrier, sc.medium);
  const LinkModel<double> model = make_link_model(geometry, sc.coil, sc.coil, sc.carrier, sc.medium);
  const comms::Frame frame =
      comms::make_frame(std::size_t(sc.frame.n_symbols), 1.0, 3, sc.frame.tx_power_w, 0);
  const Vector3<double> prior = geometry.direction();
  const std::uint64_t seed = cell_seed(base_seed, index);

  CellPair out;
  SweepCell* cells[2] = {&out.ideal, &out.practical};
  const NoiseProfile profiles[2] = {NoiseProfile::Ideal, NoiseProfile::Practical};
  double sum_sq[2] = {0.0, 0.0};
  double variance[2];
  for (int p = 0; p < 2; ++p) {
    cells[p]->cell_index = index;
    cells[p]->range_m = range;
    cells[p]->profile = profiles[p];
    cells[p]->trials = config.trials;
    cells[p]->sqrt_crb_m = sc.sqrt_crb(range, profiles[p]);
    variance[p] = sc.noise_variance(profiles[p]);
  }

  for (int t = 0; t < config.trials; ++t) {
    const std::uint64_t s = trial_seed(seed, t);
    for (int p = 0; p < 2; ++p) {
      const comms::RxObservation obs = comms::simulate_frame(frame, channel.entries, variance[p], s);
      const comms::Channel h_est = comms::estimate_channel_pilot(obs, frame);
      bool ok = false;
      double error = 0.0;
      try {
        const EstimationResult<double> est =
            estimate_link(h_est, model, sc.frame, variance[p], prior, config.mle);
        ok = est.converged && std::isfinite(est.range_m);
        error = est.range_m - range;
      } catch (const Error&) {
        ok = false;
      }
      if (ok) {
        sum_sq[p] += error * error;
      } else {
        ++cells[p]->nonconverged;
        cells[p]->excluded_trials.push_back(t);
      }
    }
  }
  for (int p = 0; p < 2; ++p) {
    const int used = cells[p]->trials - cells[p]->nonconverged;
    cells[p]->rmse_m = used > 0 ? std::sqrt(sum_sq[p] / double(used))
                                : std::numeric_limits<double>::quiet_NaN();
    cells[p]->efficiency = cells[p]->rmse_m / cells[p]->sqrt_crb_m;
  }
  return out;
}

}  // namespace

MonteCarloSweep run_crb_validation(const SweepConfig& config, std::uint64_t seed) {
  detail::require(config.trials >= config.min_trials, ErrorCode::InvalidParameter,
                  "trial count is below the configured minimum");
  detail::require(!config.ranges.empty(), ErrorCode::InvalidParameter, "range grid is empty");
  for (const double r : config.ranges) {
    detail::require(std::isfinite(r) && r > 0.0, ErrorCode::InvalidParameter,
                    "range grid must be positive");
  }
  detail::require(config.scenario.coil.axes == AxisKind::TriAxial, ErrorCode::NotIdentifiable,
                  "Monte Carlo validation needs tri-axial coils");

  const std::size_t n = config.ranges.size();
  std::vector<CellPair> results(n);
  unsigned workers = config.threads == 0 ? std::thread::hardware_concurrency() : config.threads;
  workers = std::clamp<unsigned>(workers, 1u, unsigned(n));

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> failures(n);
  const auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = run_cell(config, i, seed);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (const std::exception_ptr& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  MonteCarloSweep sweep;
  sweep.base_seed = seed;
  sweep.trials = config.trials;
  sweep.generator = "std::mt19937_64 + std::normal_distribution<double>; "
                    "cell seed = base ^ splitmix64(cell), trial seed = splitmix64(cell seed + trial * 0x9e3779b97f4a7c15)";
  for (CellPair& pair : results) {
    sweep.cells.push_back(std::move(pair.ideal));
    sweep.cells.push_back(std::move(pair.practical));
  }
  return sweep;
}

}  // namespace mi_isac::analysis
