// SPDX-License-Identifier: Apache-2.0

#ifndef MI_ISAC_ANALYSIS_HPP
#define MI_ISAC_ANALYSIS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mi_isac/estimation.hpp"
#include "mi_isac/physics.hpp"

namespace mi_isac::analysis {

/// Bandwidth of the wideband (UWB) ToF reference.
inline constexpr double kUwbBandwidthHz = 500e6;

enum class NoiseProfile { Ideal, Practical };

std::string to_string(NoiseProfile profile);

/// System parameters shared by the resolution, gain and Monte Carlo studies.
/// Defaults are the underground reference link: a = 0.15 m, N_t = 20,
/// f0 = 10 kHz, B = 1 kHz, N = 100, P = 1 W, T = 290 K, NF 6 dB + IL 3 dB.
struct Scenario {
  CoilSpec<double> coil = CoilSpec<double>::tri_axial(0.15, 20);
  CarrierSpec<double> carrier{10e3, 1e3};
  MediumModel<double> medium{};
  FrameSpec<double> frame{100, 1.0};
  double temperature_k = 290.0;
  double noise_figure_db = 6.0;     // practical profile only
  double insertion_loss_db = 3.0;   // practical profile only
  double theta_rad = constants::pi<double> / 4.0;
  double phi_rad = constants::pi<double> / 3.0;
  Matrix3<double> tx_orientation = Matrix3<double>::Identity();
  Matrix3<double> rx_orientation = Matrix3<double>::Identity();

  NoiseModel<double> noise(NoiseProfile profile) const;
  double noise_variance(NoiseProfile profile) const;
  LinkGeometry<double> geometry(double range_m) const;
  /// sqrt(CRB(r)) from the closed form.
  double sqrt_crb(double range_m, NoiseProfile profile = NoiseProfile::Ideal) const;
};

// ---------------------------------------------------------------------------
// Resolution

/// c / (2 B).
double tof_resolution(double bandwidth_hz);

struct ResolutionRecord {
  double range_m = 0.0;
  double mi_resolution_m = 0.0;    // sqrt(CRB(r)), ideal front end
  double tof_narrowband_m = 0.0;   // c / (2 B) at the link bandwidth
  double tof_reference_m = 0.0;    // c / (2 B_ref), B_ref = 500 MHz by default
  double crossover_m = 0.0;        // r* with sqrt(CRB(r*)) = tof_reference_m
};

/// Range where sqrt(CRB) reaches c / (2 B_tof), by bisection on [lo, hi] to
/// `tolerance` metres. Throws NoCrossover when the MI bound is coarser than
/// ToF across the whole bracket, or finer across all of it.
double crossover_range(const Scenario& scenario, double tof_bandwidth_hz, double lo = 0.1,
                       double hi = 1000.0, double tolerance = 1e-6);

std::vector<ResolutionRecord> resolution_sweep(std::span<const double> ranges,
                                               const Scenario& scenario,
                                               double reference_bandwidth_hz = kUwbBandwidthHz);

// ---------------------------------------------------------------------------
// ISAC gain over a TDMA baseline

struct GainRecord {
  double alpha = 0.0;
  double snr_db = 0.0;
  AxisKind axes = AxisKind::TriAxial;
  double time_mux_gain_db = 0.0;
  double structural_gain_db = 0.0;
  double total_gain_db = 0.0;
};

/// Independent coupling observations per symbol: 1 for single-axis links, 6
/// for tri-axial (the unique entries of the symmetric tensor).
int independent_observations(AxisKind axes);

/// time_mux = 10 log10(1 / alpha); structural = max(0, 10 log10(eta_NDA(SNR) * D)).
/// snr_db may be +inf.
GainRecord isac_gain(double alpha, double snr_db, AxisKind axes);

// ---------------------------------------------------------------------------
// Monte Carlo CRB validation

struct SweepConfig {
  Scenario scenario{};
  std::vector<double> ranges{1, 2, 5, 10, 20, 30};
  int trials = 1000;
  int min_trials = 500;
  unsigned threads = 0;  // 0 = hardware concurrency
  MleOptions<double> mle{};
};

struct SweepCell {
  std::size_t cell_index = 0;  // index into SweepConfig::ranges
  double range_m = 0.0;
  NoiseProfile profile = NoiseProfile::Ideal;
  int trials = 0;
  int nonconverged = 0;  // excluded from the RMSE
  std::vector<int> excluded_trials;
  double rmse_m = 0.0;
  double sqrt_crb_m = 0.0;
  double efficiency = 0.0;  // rmse / sqrt(crb)
};

struct MonteCarloSweep {
  std::vector<SweepCell> cells;  // sorted by (cell_index, profile)
  std::uint64_t base_seed = 0;
  int trials = 0;
  std::string generator;

  const SweepCell& cell(std::size_t cell_index, NoiseProfile profile) const;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);
/// base_seed XOR mix64(cell_index).
std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t cell_index);
/// Trial-th output of a SplitMix64 stream started at cell_seed:
/// mix64(cell_seed + trial * 0x9e3779b97f4a7c15).
std::uint64_t trial_seed(std::uint64_t cell_seed, int trial);

/// For every range and both noise profiles: simulate an all-pilot frame, run
/// closed-form init + Gauss-Newton refinement, and compare the range RMSE with
/// sqrt(CRB). Both profiles of a range cell share the trial noise streams.
MonteCarloSweep run_crb_validation(const SweepConfig& config, std::uint64_t seed);

}  // namespace mi_isac::analysis

#endif  // MI_ISAC_ANALYSIS_HPP
