// SPDX-License-Identifier: Apache-2.0

#ifndef MI_ISAC_ESTIMATION_HPP
#define MI_ISAC_ESTIMATION_HPP

// Fisher information, Cramer-Rao bounds and the channel-inversion sensing
// path (closed-form range, eigenvector direction, Gauss-Newton refinement).
//
// Observation convention: total transmit power P is split equally across the
// Tx axes and every Rx axis sees real additive white Gaussian noise of
// variance sigma^2 per real dimension. Complex channels contribute their real
// and imaginary parts as independent observations.

#include <cmath>
#include <algorithm>
#include <limits>
#include <tuple>

#include <Eigen/Dense>

#include "mi_isac/constants.hpp"
#include "mi_isac/error.hpp"
#include "mi_isac/physics.hpp"

namespace mi_isac {

template <typename Scalar = double>
struct NoiseModel {
  Scalar temperature_k = constants::reference_temperature_k<Scalar>;
  Scalar noise_figure_db = Scalar(0);
  Scalar insertion_loss_db = Scalar(0);
  Scalar bandwidth_hz = Scalar(1e3);

  static NoiseModel ideal(Scalar bandwidth_hz = Scalar(1e3)) {
    return NoiseModel{constants::reference_temperature_k<Scalar>, Scalar(0), Scalar(0),
                      bandwidth_hz};
  }

  /// NF 6 dB plus 3 dB finite-Q insertion loss.
  static NoiseModel practical(Scalar bandwidth_hz = Scalar(1e3)) {
    return NoiseModel{constants::reference_temperature_k<Scalar>, Scalar(6), Scalar(3),
                      bandwidth_hz};
  }

  Scalar penalty_db() const { return noise_figure_db + insertion_loss_db; }
};

template <typename Scalar = double>
struct FrameSpec {
  int n_symbols = 100;
  Scalar tx_power_w = Scalar(1);

  Scalar per_axis_power(int tx_axes) const { return tx_power_w / Scalar(tx_axes); }
};

template <typename Scalar = double>
struct FisherInfo {
  Matrix3<Scalar> matrix;               // parameter order (r, theta, phi)
  Vector3<Scalar> singular_values;      // descending
  int numeric_rank = 0;
  Scalar rank_tolerance = Scalar(1e-8);  // relative to the largest singular value
  bool pole_degenerate = false;         // theta at 0 or pi: phi unobservable

  /// [FIM^-1]_rr. Infinite when the information matrix is singular.
  Scalar range_crb() const {
    if (numeric_rank < 3) return std::numeric_limits<Scalar>::infinity();
    return matrix.inverse()(0, 0);
  }

  Matrix3<Scalar> crb() const { return matrix.inverse(); }
};

template <typename Scalar = double>
struct EstimationResult {
  Scalar range_m = Scalar(0);
  Scalar theta_rad = Scalar(0);
  Scalar phi_rad = Scalar(0);
  Matrix3<Scalar> covariance_proxy = Matrix3<Scalar>::Zero();
  int iterations = 0;
  bool converged = false;
  Scalar residual_norm = Scalar(0);
  Scalar gradient_norm = Scalar(0);  // scaled: max_j |J_j^T e| / (|J_j| |e|)
  Scalar step_norm = Scalar(0);      // last Gauss-Newton step
};

template <typename Scalar = double>
struct DirectionEstimate {
  Scalar theta_rad = Scalar(0);
  Scalar phi_rad = Scalar(0);
  Vector3<Scalar> direction = Vector3<Scalar>::UnitZ();
  Scalar eigengap = Scalar(0);  // lambda_1 - lambda_2 of the symmetrized tensor estimate
};

template <typename Scalar = double>
struct MleOptions {
  Scalar step_tolerance = Scalar(1e-10);
  Scalar gradient_tolerance = Scalar(1e-12);
  int max_iterations = 50;
  Scalar regularization = Scalar(1e-12);  // on the column-normalized curvature
};

template <typename Scalar>
void validate(const NoiseModel<Scalar>& noise) {
  detail::require(std::isfinite(noise.temperature_k) && noise.temperature_k > Scalar(0),
                  ErrorCode::InvalidParameter, "noise temperature must be positive");
  detail::require(std::isfinite(noise.noise_figure_db) && noise.noise_figure_db >= Scalar(0),
                  ErrorCode::InvalidParameter, "noise figure must be >= 0 dB");
  detail::require(std::isfinite(noise.insertion_loss_db) && noise.insertion_loss_db >= Scalar(0),
                  ErrorCode::InvalidParameter, "insertion loss must be >= 0 dB");
  detail::require(std::isfinite(noise.bandwidth_hz) && noise.bandwidth_hz > Scalar(0),
                  ErrorCode::InvalidParameter, "noise bandwidth must be positive");
}

template <typename Scalar>
void validate(const FrameSpec<Scalar>& frame) {
  detail::require(frame.n_symbols >= 1, ErrorCode::InvalidParameter,
                  "frame must carry at least one symbol");
  detail::require(std::isfinite(frame.tx_power_w) && frame.tx_power_w > Scalar(0),
                  ErrorCode::InvalidParameter, "transmit power must be positive");
}

/// k_B * T * B * 10^((NF + IL) / 10), per real dimension.
template <typename Scalar>
Scalar effective_noise_variance(const NoiseModel<Scalar>& noise) {
  validate(noise);
  return constants::boltzmann<Scalar> * noise.temperature_k * noise.bandwidth_hz *
         std::pow(Scalar(10), noise.penalty_db() / Scalar(10));
}

// ---------------------------------------------------------------------------
// Jacobians

template <typename Scalar>
using StackedVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, Eigen::ColMajor, 18, 1>;
template <typename Scalar>
using StackedJacobian = Eigen::Matrix<Scalar, Eigen::Dynamic, 3, Eigen::ColMajor, 18, 3>;

/// [Re vec(H); Im vec(H)].
template <typename Scalar>
StackedVector<Scalar> stack_real(const ChannelEntries<Scalar>& entries) {
  const Eigen::Index n = entries.size();
  StackedVector<Scalar> out(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out(i) = entries(i).real();
    out(n + i) = entries(i).imag();
  }
  return out;
}

/// Central-difference steps: 1e-6 relative in range, 1e-6 rad in the angles.
template <typename Scalar>
Vector3<Scalar> finite_difference_steps(const Vector3<Scalar>& params) {
  return Vector3<Scalar>(Scalar(1e-6) * params(0), Scalar(1e-6), Scalar(1e-6));
}

/// d[Re vec(H); Im vec(H)] / d(r, theta, phi) by central differences.
template <typename Scalar>
StackedJacobian<Scalar> channel_jacobian(const LinkModel<Scalar>& model,
                                         const Vector3<Scalar>& params) {
  const Scalar coil_const = model.constant();
  const Scalar skin_depth = model.medium.skin_depth(model.carrier);
  const Vector3<Scalar> steps = finite_difference_steps(params);
  StackedJacobian<Scalar> jacobian(2 * model.rx_axes() * model.tx_axes(), 3);
  for (int k = 0; k < 3; ++k) {
    Vector3<Scalar> plus = params;
    Vector3<Scalar> minus = params;
    plus(k) += steps(k);
    minus(k) -= steps(k);
    jacobian.col(k) = (stack_real<Scalar>(model.evaluate(plus, coil_const, skin_depth)) -
                       stack_real<Scalar>(model.evaluate(minus, coil_const, skin_depth))) /
                      (plus(k) - minus(k));
  }
  return jacobian;
}

// ---------------------------------------------------------------------------
// Fisher information and bounds

/// J^T J / entry_variance for observations of H with i.i.d. real noise of
/// variance entry_variance on every real component.
template <typename Scalar>
FisherInfo<Scalar> fisher_information(const LinkModel<Scalar>& model,
                                      const Vector3<Scalar>& params, Scalar entry_variance,
                                      Scalar rank_tolerance = Scalar(1e-8)) {
  detail::require(std::isfinite(entry_variance) && entry_variance > Scalar(0),
                  ErrorCode::InvalidParameter, "noise variance must be positive");
  const StackedJacobian<Scalar> jacobian = channel_jacobian(model, params);
  FisherInfo<Scalar> info;
  info.matrix = (jacobian.transpose() * jacobian) / entry_variance;
  info.matrix = (Scalar(0.5) * (info.matrix + info.matrix.transpose())).eval();
  const Eigen::JacobiSVD<Matrix3<Scalar>> svd(info.matrix);
  info.singular_values = svd.singularValues();
  info.rank_tolerance = rank_tolerance;
  const Scalar threshold = rank_tolerance * info.singular_values(0);
  info.numeric_rank = int((info.singular_values.array() > threshold).count());
  info.pole_degenerate = std::abs(std::sin(params(1))) < Scalar(1e-9);
  return info;
}

/// Per-entry variance of the observed channel after N symbols at P/axes per axis.
template <typename Scalar>
Scalar channel_entry_variance(const FrameSpec<Scalar>& frame, int tx_axes,
                              Scalar noise_variance) {
  validate(frame);
  return noise_variance / (Scalar(frame.n_symbols) * frame.per_axis_power(tx_axes));
}

/// FIM = (N / sigma^2) * (P / axes) * J^T J with orientations known.
template <typename Scalar>
FisherInfo<Scalar> fim_numeric(const LinkGeometry<Scalar>& geometry, const CoilSpec<Scalar>& tx,
                               const CoilSpec<Scalar>& rx, const CarrierSpec<Scalar>& carrier,
                               const FrameSpec<Scalar>& frame, const NoiseModel<Scalar>& noise,
                               const MediumModel<Scalar>& medium = {}) {
  validate(geometry);
  const LinkModel<Scalar> model = make_link_model(geometry, tx, rx, carrier, medium);
  const Vector3<Scalar> params(geometry.range_m, geometry.theta_rad, geometry.phi_rad);
  return fisher_information(
      model, params,
      channel_entry_variance(frame, model.tx_axes(), effective_noise_variance(noise)));
}

template <typename Scalar>
FisherInfo<Scalar> fim_numeric(const LinkGeometry<Scalar>& geometry,
                               const CoilSpec<Scalar>& coil, const CarrierSpec<Scalar>& carrier,
                               const FrameSpec<Scalar>& frame, const NoiseModel<Scalar>& noise) {
  return fim_numeric(geometry, coil, coil, carrier, frame, noise);
}

/// sigma^2 r^8 / (18 N P C^2) for a lossless tri-axial link.
template <typename Scalar>
Scalar crb_range_analytic(Scalar range_m, Scalar coil_const, const FrameSpec<Scalar>& frame,
                          Scalar noise_variance) {
  validate(frame);
  detail::require(std::isfinite(range_m) && range_m > Scalar(0), ErrorCode::NonFiniteGeometry,
                  "range must be finite and positive");
  const Scalar r2 = range_m * range_m;
  const Scalar r8 = (r2 * r2) * (r2 * r2);
  return noise_variance * r8 /
         (Scalar(18) * Scalar(frame.n_symbols) * frame.tx_power_w * coil_const * coil_const);
}

template <typename Scalar>
Scalar crb_range_analytic(const LinkGeometry<Scalar>& geometry, const CoilSpec<Scalar>& tx,
                          const CoilSpec<Scalar>& rx, const CarrierSpec<Scalar>& carrier,
                          const FrameSpec<Scalar>& frame, const NoiseModel<Scalar>& noise) {
  detail::require(tx.axes == AxisKind::TriAxial && rx.axes == AxisKind::TriAxial,
                  ErrorCode::NotIdentifiable, "closed-form range CRB needs tri-axial coils");
  validate(geometry);
  return crb_range_analytic(geometry.range_m, coil_constant(tx, rx, carrier), frame,
                            effective_noise_variance(noise));
}

template <typename Scalar>
Scalar crb_range_analytic(const LinkGeometry<Scalar>& geometry, const CoilSpec<Scalar>& coil,
                          const CarrierSpec<Scalar>& carrier, const FrameSpec<Scalar>& frame,
                          const NoiseModel<Scalar>& noise) {
  return crb_range_analytic(geometry, coil, coil, carrier, frame, noise);
}

// ---------------------------------------------------------------------------
// Sensing path

/// r = (C sqrt(6) / |H|_F)^(1/3); |G|_F = sqrt(6) for every orientation.
template <typename Scalar>
Scalar estimate_range_closed_form(const ChannelEntries<Scalar>& h_est, Scalar coil_const) {
  detail::require(h_est.rows() == 3 && h_est.cols() == 3, ErrorCode::NotIdentifiable,
                  "closed-form range needs a 3x3 channel");
  const Scalar norm = h_est.norm();
  detail::require(norm > std::numeric_limits<Scalar>::min(), ErrorCode::ZeroChannel,
                  "channel estimate is zero");
  return std::cbrt(coil_const * std::sqrt(Scalar(6)) / norm);
}

template <typename Scalar>
Scalar estimate_range_closed_form(const ChannelMatrix<Scalar>& h_est, const CoilSpec<Scalar>& coil,
                                  const CarrierSpec<Scalar>& carrier) {
  return estimate_range_closed_form(h_est.entries, coil_constant(coil, carrier));
}

/// Rebuilds G from the estimate, takes the eigenvector of the largest
/// eigenvalue and picks the sign nearest hemisphere_prior.
template <typename Scalar>
DirectionEstimate<Scalar> estimate_direction_eigen(const ChannelEntries<Scalar>& h_est,
                                                   const Matrix3<Scalar>& tx_orientation,
                                                   const Matrix3<Scalar>& rx_orientation,
                                                   Scalar coil_const, Scalar range_est,
                                                   const Vector3<Scalar>& hemisphere_prior,
                                                   Scalar gap_tolerance = Scalar(1)) {
  detail::require(h_est.rows() == 3 && h_est.cols() == 3, ErrorCode::NotIdentifiable,
                  "direction estimation needs a 3x3 channel");
  detail::require(std::isfinite(range_est) && range_est > Scalar(0),
                  ErrorCode::NonFiniteGeometry, "range estimate must be positive");
  const Matrix3<Scalar> h_real = h_est.real();
  const Scalar scale = range_est * range_est * range_est / coil_const;
  const Matrix3<Scalar> g_hat = scale * rx_orientation * h_real * tx_orientation.transpose();
  const Matrix3<Scalar> g_sym = Scalar(0.5) * (g_hat + g_hat.transpose());

  const Eigen::SelfAdjointEigenSolver<Matrix3<Scalar>> solver(g_sym);
  const Vector3<Scalar> values = solver.eigenvalues();  // ascending
  DirectionEstimate<Scalar> out;
  out.eigengap = values(2) - values(1);
  if (!(out.eigengap >= gap_tolerance)) {
    throw Error(ErrorCode::AmbiguousDirection, "radial and tangential modes are not separated");
  }
  Vector3<Scalar> radial = solver.eigenvectors().col(2);
  if (radial.dot(hemisphere_prior) < Scalar(0)) radial = -radial;
  out.direction = radial;
  std::tie(out.theta_rad, out.phi_rad) = angles_from_direction(radial);
  return out;
}

template <typename Scalar>
DirectionEstimate<Scalar> estimate_direction_eigen(const ChannelMatrix<Scalar>& h_est,
                                                   const Matrix3<Scalar>& tx_orientation,
                                                   const Matrix3<Scalar>& rx_orientation,
                                                   const CoilSpec<Scalar>& coil,
                                                   const CarrierSpec<Scalar>& carrier,
                                                   Scalar range_est,
                                                   const Vector3<Scalar>& hemisphere_prior) {
  return estimate_direction_eigen(h_est.entries, tx_orientation, rx_orientation,
                                  coil_constant(coil, carrier), range_est, hemisphere_prior);
}

namespace detail {

/// Folds (theta, phi) back into [0, pi] x [0, 2 pi).
template <typename Scalar>
void normalize_angles(Scalar& theta, Scalar& phi) {
  constexpr Scalar two_pi = Scalar(2) * constants::pi<Scalar>;
  theta = std::fmod(theta, two_pi);
  if (theta < Scalar(0)) theta += two_pi;
  if (theta > constants::pi<Scalar>) {
    theta = two_pi - theta;
    phi += constants::pi<Scalar>;
  }
  phi = std::fmod(phi, two_pi);
  if (phi < Scalar(0)) phi += two_pi;
  if (phi >= two_pi) phi = Scalar(0);
}

}  // namespace detail

/// Gauss-Newton on |vec(H_est) - vec(H(r, theta, phi))|^2 with column
/// normalization of the Jacobian. Returns the last iterate with
/// converged = false when the iteration cap is hit.
template <typename Scalar>
EstimationResult<Scalar> mle_refine(const ChannelEntries<Scalar>& h_est,
                                    const Vector3<Scalar>& initial,
                                    const LinkModel<Scalar>& model,
                                    const FrameSpec<Scalar>& frame, Scalar noise_variance,
                                    const MleOptions<Scalar>& options = {}) {
  detail::require(h_est.rows() == model.rx_axes() && h_est.cols() == model.tx_axes(),
                  ErrorCode::InvalidParameter, "channel estimate shape does not match the link");
  detail::require(initial.allFinite() && initial(0) > Scalar(0), ErrorCode::NonFiniteGeometry,
                  "initial range must be finite and positive");

  const Scalar coil_const = model.constant();
  const Scalar skin_depth = model.medium.skin_depth(model.carrier);
  const StackedVector<Scalar> observed = stack_real<Scalar>(h_est);

  EstimationResult<Scalar> result;
  Vector3<Scalar> params = initial;
  StackedJacobian<Scalar> jacobian;
  for (;;) {
    const StackedVector<Scalar> residual =
        observed - stack_real<Scalar>(model.evaluate(params, coil_const, skin_depth));
    jacobian = channel_jacobian(model, params);
    const Vector3<Scalar> column_norms = jacobian.colwise().norm().transpose();
    const Vector3<Scalar> gradient = jacobian.transpose() * residual;
    result.residual_norm = residual.norm();

    Scalar scaled_gradient = Scalar(0);
    if (result.residual_norm > Scalar(0)) {
      for (int k = 0; k < 3; ++k) {
        if (column_norms(k) > Scalar(0)) {
          scaled_gradient = std::max(
              scaled_gradient, std::abs(gradient(k)) / (column_norms(k) * result.residual_norm));
        }
      }
    }
    result.gradient_norm = scaled_gradient;
    if (scaled_gradient < options.gradient_tolerance) {
      result.converged = true;
      break;
    }
    if (result.iterations >= options.max_iterations) break;

    const Vector3<Scalar> scale =
        (column_norms.array() > Scalar(0)).select(column_norms, Vector3<Scalar>::Ones());
    const StackedJacobian<Scalar> normalized = jacobian * scale.cwiseInverse().asDiagonal();
    const Matrix3<Scalar> curvature = normalized.transpose() * normalized +
                                      options.regularization * Matrix3<Scalar>::Identity();
    const Vector3<Scalar> step =
        curvature.ldlt().solve(normalized.transpose() * residual).cwiseQuotient(scale);
    if (!step.allFinite()) {
      throw Error(ErrorCode::SingularCurvature, "Gauss-Newton curvature is singular");
    }
    params += step;
    if (params(0) <= Scalar(0)) params(0) = Scalar(0.5) * (params(0) - step(0));
    ++result.iterations;
    result.step_norm = step.norm();
    if (result.step_norm < options.step_tolerance) {
      result.converged = true;
      break;
    }
  }

  // Covariance proxy: entry variance times the inverse Gauss-Newton curvature.
  const Scalar entry_variance = channel_entry_variance(frame, model.tx_axes(), noise_variance);
  const Matrix3<Scalar> curvature = jacobian.transpose() * jacobian;
  const Scalar ridge = options.regularization * curvature.diagonal().maxCoeff();
  result.covariance_proxy =
      entry_variance * (curvature + ridge * Matrix3<Scalar>::Identity()).inverse();

  result.range_m = params(0);
  result.theta_rad = params(1);
  result.phi_rad = params(2);
  detail::normalize_angles(result.theta_rad, result.phi_rad);
  return result;
}

/// Closed-form range, eigenvector direction, then Gauss-Newton refinement.
/// Assumes a lossless (or attenuation-compensated) tri-axial link.
template <typename Scalar>
EstimationResult<Scalar> estimate_link(const ChannelEntries<Scalar>& h_est,
                                       const LinkModel<Scalar>& model,
                                       const FrameSpec<Scalar>& frame, Scalar noise_variance,
                                       const Vector3<Scalar>& hemisphere_prior,
                                       const MleOptions<Scalar>& options = {}) {
  const Scalar coil_const = model.constant();
  const Scalar range0 = estimate_range_closed_form(h_est, coil_const);
  const DirectionEstimate<Scalar> direction =
      estimate_direction_eigen(h_est, model.tx_orientation, model.rx_orientation, coil_const,
                               range0, hemisphere_prior);
  return mle_refine(h_est, Vector3<Scalar>(range0, direction.theta_rad, direction.phi_rad),
                    model, frame, noise_variance, options);
}

}  // namespace mi_isac

#endif  // MI_ISAC_ESTIMATION_HPP
