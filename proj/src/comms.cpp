// SPDX-License-Identifier: Apache-2.0

#include "mi_isac/comms.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mi_isac/error.hpp"

namespace mi_isac::comms {
namespace {

void validate_frame(const Frame& frame) {
  detail::require(frame.tx_axes == 1 || frame.tx_axes == 3, ErrorCode::InvalidParameter,
                  "frame must drive one or three Tx axes");
  detail::require(frame.tx_power_w > 0.0 && std::isfinite(frame.tx_power_w),
                  ErrorCode::InvalidParameter, "transmit power must be positive");
  detail::require(frame.size() > 0, ErrorCode::InvalidParameter, "frame is empty");
}

// Least squares H = Y X^H (X X^H)^-1; X is tx x n, Y is rx x n.
Channel least_squares(const Eigen::MatrixXcd& rx, const Eigen::MatrixXcd& tx) {
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(tx);
  const auto& sv = svd.singularValues();
  const Eigen::Index rank =
      sv.size() == 0 ? 0 : (sv.array() > 1e-10 * sv(0)).count();
  if (rank < tx.rows()) {
    throw Error(ErrorCode::RankDeficientPilots,
                "pilot excitations span fewer dimensions than Tx axes");
  }
  const Eigen::MatrixXcd gram = tx * tx.adjoint();
  const Eigen::MatrixXcd estimate_adjoint = gram.llt().solve(tx * rx.adjoint());
  return estimate_adjoint.adjoint();
}

Eigen::MatrixXcd excitation_matrix(const Frame& frame, std::size_t begin, std::size_t end) {
  Eigen::MatrixXcd x(frame.tx_axes, Eigen::Index(end - begin));
  for (std::size_t k = begin; k < end; ++k) x.col(Eigen::Index(k - begin)) = frame.excitation(k);
  return x;
}

}  // namespace

Complex Frame::symbol(std::size_t k) const {
  return is_pilot(k) ? pilot_symbols[k] : data_symbols[k - pilot_symbols.size()];
}

Eigen::VectorXcd Frame::spatial_pattern(std::size_t k) const {
  const bool pilot = is_pilot(k);
  const std::size_t block = pilot ? pilot_symbols.size() : data_symbols.size();
  const std::size_t index = pilot ? k : k - pilot_symbols.size();
  const double amplitude = std::sqrt(tx_power_w / double(tx_axes));
  Eigen::VectorXcd pattern(tx_axes);
  for (int axis = 0; axis < tx_axes; ++axis) {
    // Reduce the phase index first so the exponent stays exact for long blocks.
    const std::size_t step = (std::size_t(axis) * index) % block;
    const double angle = 2.0 * constants::pi<double> * double(step) / double(block);
    pattern(axis) = amplitude * std::polar(1.0, angle);
  }
  return pattern;
}

Eigen::VectorXcd Frame::excitation(std::size_t k) const { return symbol(k) * spatial_pattern(k); }

std::size_t pilot_count(std::size_t n_symbols, double pilot_fraction) {
  detail::require(pilot_fraction > 0.0 && pilot_fraction <= 1.0, ErrorCode::InvalidParameter,
                  "pilot fraction must lie in (0, 1]");
  return std::size_t(std::llround(pilot_fraction * double(n_symbols)));
}

Frame make_frame(std::size_t n_symbols, double pilot_fraction, int tx_axes, double tx_power_w,
                 std::uint64_t data_seed) {
  detail::require(n_symbols > 0, ErrorCode::InvalidParameter, "frame needs at least one symbol");
  Frame frame;
  frame.pilot_fraction = pilot_fraction;
  frame.tx_axes = tx_axes;
  frame.tx_power_w = tx_power_w;
  const std::size_t pilots = pilot_count(n_symbols, pilot_fraction);
  frame.pilot_symbols.assign(pilots, Complex(1.0, 0.0));
  std::mt19937_64 rng(data_seed);
  std::bernoulli_distribution coin(0.5);
  frame.data_symbols.reserve(n_symbols - pilots);
  for (std::size_t k = pilots; k < n_symbols; ++k) {
    frame.data_symbols.emplace_back(coin(rng) ? -1.0 : 1.0, 0.0);
  }
  validate_frame(frame);
  return frame;
}

std::vector<std::uint8_t> transmitted_bits(const Frame& frame) {
  std::vector<std::uint8_t> bits;
  bits.reserve(frame.data_symbols.size());
  for (const Complex& s : frame.data_symbols) bits.push_back(s.real() < 0.0 ? 1 : 0);
  return bits;
}

RxObservation simulate_frame(const Frame& frame, const Channel& channel, double noise_variance,
                             std::uint64_t seed) {
  validate_frame(frame);
  detail::require(channel.cols() == frame.tx_axes, ErrorCode::InvalidParameter,
                  "channel columns must match the frame's Tx axes");
  detail::require(noise_variance >= 0.0 && std::isfinite(noise_variance),
                  ErrorCode::InvalidParameter, "noise variance must be non-negative");

  RxObservation obs;
  obs.true_channel = channel;
  obs.seed = seed;
  obs.noise_variance = noise_variance;
  obs.samples.resize(channel.rows(), Eigen::Index(frame.size()));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(noise_variance));
  const Eigen::MatrixXcd h = channel;
  for (std::size_t k = 0; k < frame.size(); ++k) {
    auto y = obs.samples.col(Eigen::Index(k));
    y = h * frame.excitation(k);
    if (noise_variance > 0.0) {
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        y(i) += Complex(re, im);
      }
    }
  }
  return obs;
}

RxObservation simulate_frame(const Frame& frame, const ChannelMatrix<double>& channel,
                             const NoiseModel<double>& noise, std::uint64_t seed) {
  return simulate_frame(frame, channel.entries, effective_noise_variance(noise), seed);
}

Channel estimate_channel_pilot(const RxObservation& obs, const Frame& frame) {
  validate_frame(frame);
  detail::require(obs.size() == frame.size(), ErrorCode::InvalidParameter,
                  "observation length does not match the frame");
  const std::size_t pilots = frame.pilot_count();
  if (pilots < std::size_t(frame.tx_axes)) {
    throw Error(ErrorCode::RankDeficientPilots, "fewer pilots than Tx axes");
  }
  return least_squares(obs.samples.leftCols(Eigen::Index(pilots)),
                       excitation_matrix(frame, 0, pilots));
}

NdaResult demodulate_and_nda_estimate(const RxObservation& obs, const Frame& frame,
                                      const Channel& pilot_estimate) {
  validate_frame(frame);
  detail::require(obs.size() == frame.size(), ErrorCode::InvalidParameter,
                  "observation length does not match the frame");
  detail::require(pilot_estimate.cols() == frame.tx_axes &&
                      pilot_estimate.rows() == obs.samples.rows(),
                  ErrorCode::InvalidParameter, "pilot estimate shape does not match the link");

  const Eigen::MatrixXcd h_hat = pilot_estimate;
  const std::size_t pilots = frame.pilot_count();
  const std::size_t n = frame.size();
  const double sigma = std::sqrt(obs.noise_variance);

  NdaResult result;
  result.bits.reserve(n - pilots);
  Eigen::MatrixXcd decided = excitation_matrix(frame, 0, n);
  double ber_sum = 0.0;
  for (std::size_t k = pilots; k < n; ++k) {
    const Eigen::VectorXcd reference = h_hat * frame.spatial_pattern(k);
    const double metric = (reference.adjoint() * obs.samples.col(Eigen::Index(k)))(0).real();
    const double decision = metric < 0.0 ? -1.0 : 1.0;
    result.bits.push_back(decision < 0.0 ? 1 : 0);
    decided.col(Eigen::Index(k)) = decision * frame.spatial_pattern(k);
    if (sigma > 0.0) ber_sum += q_function(reference.norm() / sigma);
  }
  const std::size_t data = n - pilots;
  result.ber_oracle = data > 0 ? ber_sum / double(data) : 0.0;
  result.eta = (1.0 - 2.0 * result.ber_oracle) * (1.0 - 2.0 * result.ber_oracle);
  result.effective_symbols = double(pilots) + double(data) * result.eta;
  result.refined = least_squares(obs.samples, decided);
  return result;
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double bpsk_ber(double snr_linear) {
  if (std::isinf(snr_linear)) return 0.0;
  return q_function(std::sqrt(2.0 * std::max(snr_linear, 0.0)));
}

double nda_efficiency(double snr_linear) {
  const double ber = bpsk_ber(snr_linear);
  return (1.0 - 2.0 * ber) * (1.0 - 2.0 * ber);
}

double mean_symbol_snr(const Frame& frame, const Channel& channel, double noise_variance) {
  validate_frame(frame);
  const Eigen::MatrixXcd h = channel;
  double energy = 0.0;
  for (std::size_t k = 0; k < frame.size(); ++k) {
    energy += (h * frame.excitation(k)).squaredNorm();
  }
  return energy / double(frame.size()) / (2.0 * noise_variance);
}

double noise_variance_for_snr(const Frame& frame, const Channel& channel, double snr_linear) {
  detail::require(snr_linear > 0.0 && std::isfinite(snr_linear), ErrorCode::InvalidParameter,
                  "SNR must be positive and finite");
  return mean_symbol_snr(frame, channel, 1.0) / snr_linear;
}

}  // namespace mi_isac::comms
