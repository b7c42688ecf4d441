// SPDX-License-Identifier: Apache-2.0

#ifndef MI_ISAC_COMMS_HPP
#define MI_ISAC_COMMS_HPP

// Symbol-level MI link: BPSK frames, AWGN simulation, pilot least-squares
// channel estimation and decision-directed (non-data-aided) refinement.
//
// Excitation: every Tx axis is driven at amplitude sqrt(P / axes). Symbol i of
// a block of length L (the pilot block or the data block) carries the phase
// pattern exp(2 pi j * axis * i / L), so each block of length >= axes has an
// excitation Gram matrix of exactly (L P / axes) * I.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mi_isac/estimation.hpp"
#include "mi_isac/physics.hpp"

namespace mi_isac::comms {

using Complex = std::complex<double>;
using Channel = ChannelEntries<double>;

struct Frame {
  std::vector<Complex> pilot_symbols;  // known, unit energy
  std::vector<Complex> data_symbols;   // BPSK, +1 <-> bit 0, -1 <-> bit 1
  double pilot_fraction = 1.0;
  int tx_axes = 3;
  double tx_power_w = 1.0;

  std::size_t size() const { return pilot_symbols.size() + data_symbols.size(); }
  std::size_t pilot_count() const { return pilot_symbols.size(); }
  bool is_pilot(std::size_t k) const { return k < pilot_symbols.size(); }
  Complex symbol(std::size_t k) const;

  /// Unmodulated Tx vector of symbol k (the phase pattern times sqrt(P / axes)).
  Eigen::VectorXcd spatial_pattern(std::size_t k) const;
  /// symbol(k) * spatial_pattern(k).
  Eigen::VectorXcd excitation(std::size_t k) const;
};

struct RxObservation {
  Eigen::MatrixXcd samples;  // rx axes x N, column k is y_k
  Channel true_channel;
  std::uint64_t seed = 0;
  double noise_variance = 0.0;  // per real dimension

  std::size_t size() const { return std::size_t(samples.cols()); }
};

struct NdaResult {
  std::vector<std::uint8_t> bits;  // one per data symbol
  Channel refined;
  double ber_oracle = 0.0;  // mean Q(sqrt(2 snr_k)) over data symbols, from the pilot estimate
  double eta = 1.0;         // (1 - 2 BER)^2
  double effective_symbols = 0.0;
};

/// round(alpha * N).
std::size_t pilot_count(std::size_t n_symbols, double pilot_fraction);

/// Pilots first (all 1 + 0j), then BPSK data drawn from data_seed.
Frame make_frame(std::size_t n_symbols, double pilot_fraction, int tx_axes, double tx_power_w,
                 std::uint64_t data_seed);

std::vector<std::uint8_t> transmitted_bits(const Frame& frame);

/// y_k = H x_k + w_k, w_k complex with noise_variance per real dimension.
RxObservation simulate_frame(const Frame& frame, const Channel& channel, double noise_variance,
                             std::uint64_t seed);
RxObservation simulate_frame(const Frame& frame, const ChannelMatrix<double>& channel,
                             const NoiseModel<double>& noise, std::uint64_t seed);

/// Least squares Y_p X_p^H (X_p X_p^H)^-1 over the pilot block.
Channel estimate_channel_pilot(const RxObservation& obs, const Frame& frame);

NdaResult demodulate_and_nda_estimate(const RxObservation& obs, const Frame& frame,
                                      const Channel& pilot_estimate);

/// Q(x) = P(N(0,1) > x).
double q_function(double x);
/// Coherent BPSK error rate Q(sqrt(2 snr)) at linear Es/N0.
double bpsk_ber(double snr_linear);
/// Decision-directed efficiency (1 - 2 BER)^2.
double nda_efficiency(double snr_linear);

/// Mean over the frame of |H x_k|^2 / (2 sigma^2), i.e. Es/N0 with N0 = 2 sigma^2.
double mean_symbol_snr(const Frame& frame, const Channel& channel, double noise_variance);
/// sigma^2 that yields the requested mean_symbol_snr.
double noise_variance_for_snr(const Frame& frame, const Channel& channel, double snr_linear);

}  // namespace mi_isac::comms

#endif  // MI_ISAC_COMMS_HPP
