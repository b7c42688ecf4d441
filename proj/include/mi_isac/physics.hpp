// SPDX-License-Identifier: Apache-2.0

#ifndef MI_ISAC_PHYSICS_HPP
#define MI_ISAC_PHYSICS_HPP

// Magneto-inductive dipole channel: coupling tensor, coil constant, medium
// attenuation and the 3x3 (or degenerate) MI-MIMO channel matrix.
//
// Frame convention: rotations map a node's local frame to the global frame,
// and the channel is
//
//     H = attenuation * (C / r^3) * B_r^T * G(r_hat) * B_t,
//
// where B = R * E and E holds the coil normals in the local frame (I_3 for
// a tri-axial coil, the single normal otherwise). With identity
// orientations and tri-axial coils H is the bare tensor scaled by C/r^3.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include <Eigen/Dense>

#include "mi_isac/constants.hpp"
#include "mi_isac/error.hpp"

namespace mi_isac {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
/// Coil normals as columns: 3x1 for single-axis, 3x3 for tri-axial.
template <typename Scalar>
using AxisBasis = Eigen::Matrix<Scalar, 3, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;
/// Rx-axes x Tx-axes complex channel; at most 3x3.
template <typename Scalar>
using ChannelEntries =
    Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;

enum class AxisKind { SingleAxis, TriAxial };

template <typename Scalar = double>
struct CoilSpec {
  Scalar radius_m = Scalar(0.15);
  int turns = 20;
  AxisKind axes = AxisKind::TriAxial;
  Vector3<Scalar> normal = Vector3<Scalar>::UnitZ();  // used by SingleAxis only

  static CoilSpec tri_axial(Scalar radius_m, int turns) {
    return CoilSpec{radius_m, turns, AxisKind::TriAxial, Vector3<Scalar>::UnitZ()};
  }

  static CoilSpec single_axis(Scalar radius_m, int turns, const Vector3<Scalar>& normal) {
    return CoilSpec{radius_m, turns, AxisKind::SingleAxis, normal};
  }

  Scalar area() const { return constants::pi<Scalar> * radius_m * radius_m; }

  int axis_count() const { return axes == AxisKind::TriAxial ? 3 : 1; }

  AxisBasis<Scalar> local_axes() const {
    if (axes == AxisKind::TriAxial) return Matrix3<Scalar>::Identity();
    return normal;
  }
};

template <typename Scalar = double>
struct CarrierSpec {
  Scalar frequency_hz = Scalar(10e3);
  Scalar bandwidth_hz = Scalar(1e3);

  Scalar angular_frequency() const { return Scalar(2) * constants::pi<Scalar> * frequency_hz; }
};

template <typename Scalar = double>
struct MediumModel {
  Scalar conductivity_s_per_m = Scalar(0);

  static constexpr Scalar permeability = constants::mu0<Scalar>;

  /// Quasi-static skin depth; +inf for a lossless medium.
  Scalar skin_depth(const CarrierSpec<Scalar>& carrier) const {
    if (conductivity_s_per_m == Scalar(0)) return std::numeric_limits<Scalar>::infinity();
    return std::sqrt(Scalar(2) /
                     (permeability * carrier.angular_frequency() * conductivity_s_per_m));
  }
};

template <typename Scalar>
Vector3<Scalar> direction_from_angles(Scalar theta, Scalar phi) {
  using std::cos;
  using std::sin;
  return Vector3<Scalar>(sin(theta) * cos(phi), sin(theta) * sin(phi), cos(theta));
}

/// Polar angle in [0, pi] and azimuth in [0, 2*pi) of a (not necessarily unit) vector.
template <typename Scalar>
std::pair<Scalar, Scalar> angles_from_direction(const Vector3<Scalar>& v) {
  const Vector3<Scalar> u = v.normalized();
  const Scalar theta = std::acos(std::clamp(u.z(), Scalar(-1), Scalar(1)));
  Scalar phi = std::atan2(u.y(), u.x());
  if (phi < Scalar(0)) phi += Scalar(2) * constants::pi<Scalar>;
  if (phi >= Scalar(2) * constants::pi<Scalar>) phi = Scalar(0);
  return {theta, phi};
}

template <typename Scalar = double>
struct LinkGeometry {
  Scalar range_m = Scalar(10);
  Scalar theta_rad = Scalar(0);
  Scalar phi_rad = Scalar(0);
  Matrix3<Scalar> tx_orientation = Matrix3<Scalar>::Identity();
  Matrix3<Scalar> rx_orientation = Matrix3<Scalar>::Identity();

  Vector3<Scalar> direction() const { return direction_from_angles(theta_rad, phi_rad); }
};

template <typename Scalar = double>
struct CouplingTensor {
  Matrix3<Scalar> matrix;
};

template <typename Scalar = double>
struct Eigenmodes {
  Vector3<Scalar> eigenvalues;   // descending
  Matrix3<Scalar> eigenvectors;  // column i pairs with eigenvalues(i)
  Scalar condition_number;

  Vector3<Scalar> radial_mode() const { return eigenvectors.col(0); }
};

template <typename Scalar = double>
struct ChannelMatrix {
  ChannelEntries<Scalar> entries;
  Scalar coil_constant = Scalar(0);
  std::complex<Scalar> attenuation{Scalar(1), Scalar(0)};
  // Set when r < 5a; the dipole model is still applied.
  bool outside_dipole_regime = false;

  Eigen::Index rows() const { return entries.rows(); }
  Eigen::Index cols() const { return entries.cols(); }
  Scalar frobenius_norm() const { return entries.norm(); }
};

// ---------------------------------------------------------------------------
// Validation

template <typename Scalar>
void validate(const CoilSpec<Scalar>& coil) {
  detail::require(std::isfinite(coil.radius_m) && coil.radius_m > Scalar(0),
                  ErrorCode::InvalidParameter, "coil radius must be positive");
  detail::require(coil.turns >= 1, ErrorCode::InvalidParameter, "coil turns must be >= 1");
  if (coil.axes == AxisKind::SingleAxis) {
    detail::require(coil.normal.allFinite() &&
                        std::abs(coil.normal.norm() - Scalar(1)) <= Scalar(1e-12),
                    ErrorCode::InvalidParameter, "single-axis normal must be a unit vector");
  }
}

template <typename Scalar>
void validate(const CarrierSpec<Scalar>& carrier) {
  detail::require(std::isfinite(carrier.frequency_hz) && carrier.frequency_hz > Scalar(0),
                  ErrorCode::InvalidParameter, "carrier frequency must be positive");
  detail::require(std::isfinite(carrier.bandwidth_hz) && carrier.bandwidth_hz > Scalar(0),
                  ErrorCode::InvalidParameter, "bandwidth must be positive");
  detail::require(carrier.bandwidth_hz <= carrier.frequency_hz, ErrorCode::InvalidParameter,
                  "bandwidth must not exceed the carrier frequency");
}

template <typename Scalar>
void validate(const MediumModel<Scalar>& medium) {
  detail::require(std::isfinite(medium.conductivity_s_per_m) &&
                      medium.conductivity_s_per_m >= Scalar(0),
                  ErrorCode::InvalidParameter, "conductivity must be non-negative");
}

template <typename Scalar>
bool is_proper_rotation(const Matrix3<Scalar>& rotation, Scalar tolerance = Scalar(1e-10)) {
  if (!rotation.allFinite()) return false;
  const Scalar orthogonality =
      (rotation.transpose() * rotation - Matrix3<Scalar>::Identity()).cwiseAbs().maxCoeff();
  return orthogonality <= tolerance && std::abs(rotation.determinant() - Scalar(1)) <= tolerance;
}

template <typename Scalar>
void validate(const LinkGeometry<Scalar>& geometry) {
  detail::require(std::isfinite(geometry.range_m) && geometry.range_m > Scalar(0),
                  ErrorCode::NonFiniteGeometry, "range must be finite and positive");
  detail::require(std::isfinite(geometry.theta_rad) && geometry.theta_rad >= Scalar(0) &&
                      geometry.theta_rad <= constants::pi<Scalar>,
                  ErrorCode::NonFiniteGeometry, "theta must lie in [0, pi]");
  detail::require(std::isfinite(geometry.phi_rad) && geometry.phi_rad >= Scalar(0) &&
                      geometry.phi_rad < Scalar(2) * constants::pi<Scalar>,
                  ErrorCode::NonFiniteGeometry, "phi must lie in [0, 2*pi)");
  detail::require(is_proper_rotation(geometry.tx_orientation), ErrorCode::InvalidParameter,
                  "tx orientation is not a proper rotation");
  detail::require(is_proper_rotation(geometry.rx_orientation), ErrorCode::InvalidParameter,
                  "rx orientation is not a proper rotation");
}

// ---------------------------------------------------------------------------
// Operations

/// mu0 * w0 * N_t,tx * N_t,rx * A_tx * A_rx / (4 pi); identical coils give the
/// familiar mu0 * w0 * N_t^2 * A^2 / (4 pi).
template <typename Scalar>
Scalar coil_constant(const CoilSpec<Scalar>& tx, const CoilSpec<Scalar>& rx,
                     const CarrierSpec<Scalar>& carrier) {
  validate(tx);
  validate(rx);
  validate(carrier);
  return constants::mu0<Scalar> * carrier.angular_frequency() * Scalar(tx.turns) *
         Scalar(rx.turns) * tx.area() * rx.area() / (Scalar(4) * constants::pi<Scalar>);
}

template <typename Scalar>
Scalar coil_constant(const CoilSpec<Scalar>& coil, const CarrierSpec<Scalar>& carrier) {
  return coil_constant(coil, coil, carrier);
}

namespace detail {

template <typename Scalar>
Matrix3<Scalar> dipole_tensor(const Vector3<Scalar>& unit_direction) {
  return Scalar(3) * unit_direction * unit_direction.transpose() - Matrix3<Scalar>::Identity();
}

template <typename Scalar>
std::complex<Scalar> attenuation_unchecked(Scalar skin_depth, Scalar range_m) {
  if (std::isinf(skin_depth)) return {Scalar(1), Scalar(0)};
  const Scalar x = range_m / skin_depth;
  return std::exp(std::complex<Scalar>(-x, -x));
}

}  // namespace detail

/// G = 3 r r^T - I for a unit direction r.
template <typename Scalar>
CouplingTensor<Scalar> coupling_tensor(const Vector3<Scalar>& direction) {
  detail::require(direction.allFinite() &&
                      std::abs(direction.norm() - Scalar(1)) <= Scalar(1e-10),
                  ErrorCode::NonUnitDirection, "direction must be a unit vector");
  return {detail::dipole_tensor(direction)};
}

/// exp(-(1 + j) r / delta); exactly 1 for a lossless medium.
template <typename Scalar>
std::complex<Scalar> attenuation(const MediumModel<Scalar>& medium,
                                 const CarrierSpec<Scalar>& carrier, Scalar range_m) {
  validate(medium);
  validate(carrier);
  detail::require(std::isfinite(range_m) && range_m > Scalar(0), ErrorCode::NonFiniteGeometry,
                  "range must be finite and positive");
  return detail::attenuation_unchecked(medium.skin_depth(carrier), range_m);
}

template <typename Scalar>
Eigenmodes<Scalar> eigenmodes(const CouplingTensor<Scalar>& tensor) {
  const Eigen::SelfAdjointEigenSolver<Matrix3<Scalar>> solver(tensor.matrix);
  Eigenmodes<Scalar> modes;
  modes.eigenvalues = solver.eigenvalues().reverse();
  modes.eigenvectors = solver.eigenvectors().rowwise().reverse();
  const Vector3<Scalar> magnitudes = modes.eigenvalues.cwiseAbs();
  modes.condition_number = magnitudes.maxCoeff() / magnitudes.minCoeff();
  return modes;
}

/// Forward model with frames, coils, carrier and medium held fixed; the
/// estimator varies (r, theta, phi) through evaluate().
template <typename Scalar = double>
struct LinkModel {
  CoilSpec<Scalar> tx_coil;
  CoilSpec<Scalar> rx_coil;
  CarrierSpec<Scalar> carrier;
  MediumModel<Scalar> medium;
  Matrix3<Scalar> tx_orientation = Matrix3<Scalar>::Identity();
  Matrix3<Scalar> rx_orientation = Matrix3<Scalar>::Identity();

  int tx_axes() const { return tx_coil.axis_count(); }
  int rx_axes() const { return rx_coil.axis_count(); }
  bool tri_axial() const {
    return tx_coil.axes == AxisKind::TriAxial && rx_coil.axes == AxisKind::TriAxial;
  }

  Scalar constant() const { return coil_constant(tx_coil, rx_coil, carrier); }

  /// Channel at raw parameters (r, theta, phi). Angles are not range-checked so
  /// finite-difference stencils may step across the poles.
  ChannelEntries<Scalar> evaluate(const Vector3<Scalar>& params) const {
    return evaluate(params, constant(), medium.skin_depth(carrier));
  }

  ChannelEntries<Scalar> evaluate(const Vector3<Scalar>& params, Scalar coil_const,
                                  Scalar skin_depth) const {
    const Scalar range = params(0);
    const Matrix3<Scalar> tensor =
        detail::dipole_tensor(direction_from_angles(params(1), params(2)));
    const AxisBasis<Scalar> tx_basis = tx_orientation * tx_coil.local_axes();
    const AxisBasis<Scalar> rx_basis = rx_orientation * rx_coil.local_axes();
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 3> real =
        (coil_const / (range * range * range)) * (rx_basis.transpose() * tensor * tx_basis);
    return detail::attenuation_unchecked(skin_depth, range) *
           real.template cast<std::complex<Scalar>>();
  }
};

template <typename Scalar>
LinkModel<Scalar> make_link_model(const LinkGeometry<Scalar>& geometry,
                                  const CoilSpec<Scalar>& tx, const CoilSpec<Scalar>& rx,
                                  const CarrierSpec<Scalar>& carrier,
                                  const MediumModel<Scalar>& medium = {}) {
  validate(tx);
  validate(rx);
  validate(carrier);
  validate(medium);
  return LinkModel<Scalar>{tx, rx, carrier, medium, geometry.tx_orientation,
                           geometry.rx_orientation};
}

template <typename Scalar>
ChannelMatrix<Scalar> channel_matrix(const LinkGeometry<Scalar>& geometry,
                                     const CoilSpec<Scalar>& tx, const CoilSpec<Scalar>& rx,
                                     const CarrierSpec<Scalar>& carrier,
                                     const MediumModel<Scalar>& medium) {
  validate(geometry);
  const LinkModel<Scalar> model = make_link_model(geometry, tx, rx, carrier, medium);
  ChannelMatrix<Scalar> channel;
  channel.coil_constant = model.constant();
  channel.attenuation =
      detail::attenuation_unchecked(medium.skin_depth(carrier), geometry.range_m);
  channel.entries = model.evaluate(
      Vector3<Scalar>(geometry.range_m, geometry.theta_rad, geometry.phi_rad),
      channel.coil_constant, medium.skin_depth(carrier));
  channel.outside_dipole_regime =
      geometry.range_m < Scalar(5) * std::max(tx.radius_m, rx.radius_m);
  return channel;
}

template <typename Scalar>
ChannelMatrix<Scalar> channel_matrix(const LinkGeometry<Scalar>& geometry,
                                     const CoilSpec<Scalar>& coil,
                                     const CarrierSpec<Scalar>& carrier,
                                     const MediumModel<Scalar>& medium = {}) {
  return channel_matrix(geometry, coil, coil, carrier, medium);
}

/// Z-Y-X (yaw, pitch, roll) rotation, local -> global.
template <typename Scalar>
Matrix3<Scalar> rotation_zyx(Scalar yaw, Scalar pitch, Scalar roll) {
  using AngleAxis = Eigen::AngleAxis<Scalar>;
  return (AngleAxis(yaw, Vector3<Scalar>::UnitZ()) * AngleAxis(pitch, Vector3<Scalar>::UnitY()) *
          AngleAxis(roll, Vector3<Scalar>::UnitX()))
      .toRotationMatrix();
}

}  // namespace mi_isac

#endif  // MI_ISAC_PHYSICS_HPP
