#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mi_isac/error.hpp"
#include "mi_isac/physics.hpp"
#include "test_support.hpp"

using namespace mi_isac;
using test::random_rotation;
using test::random_unit;

namespace {

// mpmath, 30 digits: mu0 * 2 pi * 1e4 * 20^2 * (pi 0.15^2)^2 / (4 pi)
constexpr double kCoilConstantRef = 0.012557542055521426602815418764;
// sqrt(2 / (mu0 * 2 pi * 1e4 * 4))
constexpr double kSkinDepthSeawater = 2.51646060522435180874867345823;

const CarrierSpec<double> kCarrier{10e3, 1e3};
const CoilSpec<double> kTri = CoilSpec<double>::tri_axial(0.15, 20);

}  // namespace

TEST_CASE("coil constant at the reference coil") {
  CHECK(coil_constant(kTri, kCarrier) == doctest::Approx(kCoilConstantRef).epsilon(1e-14));
  CHECK(coil_constant(kTri, kCarrier) == doctest::Approx(1.257e-2).epsilon(1e-3));
}

TEST_CASE("coil constant scales with frequency and turns") {
  const double base = coil_constant(kTri, kCarrier);
  CHECK(coil_constant(kTri, CarrierSpec<double>{20e3, 1e3}) / base ==
        doctest::Approx(2.0).epsilon(1e-15));
  CHECK(coil_constant(CoilSpec<double>::tri_axial(0.15, 40), kCarrier) / base ==
        doctest::Approx(4.0).epsilon(1e-15));
  // Mixed coils: geometric mean of the two single-coil constants.
  const CoilSpec<double> small = CoilSpec<double>::tri_axial(0.1, 10);
  CHECK(coil_constant(kTri, small, kCarrier) ==
        doctest::Approx(std::sqrt(base * coil_constant(small, kCarrier))).epsilon(1e-14));
}

TEST_CASE("coil validation") {
  CHECK_THROWS_AS(coil_constant(CoilSpec<double>::tri_axial(0.0, 20), kCarrier), Error);
  CHECK_THROWS_AS(coil_constant(CoilSpec<double>::tri_axial(0.15, 0), kCarrier), Error);
  CHECK_THROWS_AS(coil_constant(kTri, CarrierSpec<double>{-1.0, 1e3}), Error);
  CoilSpec<double> bad_normal = CoilSpec<double>::single_axis(0.15, 20, {0.0, 0.0, 2.0});
  CHECK_THROWS_AS(validate(bad_normal), Error);
}

TEST_CASE("coupling tensor on the z axis") {
  const Matrix3<double> g = coupling_tensor(Vector3<double>(Vector3<double>::UnitZ())).matrix;
  Matrix3<double> expected = Matrix3<double>::Zero();
  expected.diagonal() << -1.0, -1.0, 2.0;
  CHECK((g - expected).norm() == 0.0);
}

TEST_CASE("coupling tensor is even in the direction") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const Vector3<double> u = random_unit(rng);
    CHECK((coupling_tensor(u).matrix - coupling_tensor(Vector3<double>(-u)).matrix).norm() == 0.0);
  }
}

TEST_CASE("coupling tensor rejects non-unit directions") {
  try {
    coupling_tensor(Vector3<double>(0.0, 0.0, 1.001));
    FAIL("expected NonUnitDirection");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonUnitDirection);
  }
  CHECK_THROWS_AS(coupling_tensor(Vector3<double>(NAN, 0.0, 1.0)), Error);
}

TEST_CASE("eigenmodes on the z axis") {
  const Eigenmodes<double> m = eigenmodes(coupling_tensor(Vector3<double>(Vector3<double>::UnitZ())));
  CHECK(m.eigenvalues(0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(m.eigenvalues(1) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(m.eigenvalues(2) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(std::abs(m.radial_mode().z()) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m.condition_number == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("eigenmodes are universal over random directions") {
  std::mt19937_64 rng(2024);
  double worst_value = 0.0;
  double worst_kappa = 0.0;
  double worst_alignment = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vector3<double> u = random_unit(rng);
    const Eigenmodes<double> m = eigenmodes(coupling_tensor(u));
    worst_value = std::max({worst_value, std::abs(m.eigenvalues(0) - 2.0),
                            std::abs(m.eigenvalues(1) + 1.0), std::abs(m.eigenvalues(2) + 1.0)});
    worst_kappa = std::max(worst_kappa, std::abs(m.condition_number - 2.0));
    worst_alignment = std::max(worst_alignment, std::abs(std::abs(m.radial_mode().dot(u)) - 1.0));
  }
  CHECK(worst_value < 1e-12);
  CHECK(worst_kappa < 1e-12);
  CHECK(worst_alignment < 1e-10);
}

TEST_CASE("attenuation") {
  const MediumModel<double> lossless{};
  CHECK(attenuation(lossless, kCarrier, 3.0) == std::complex<double>(1.0, 0.0));
  CHECK(std::isinf(lossless.skin_depth(kCarrier)));

  const MediumModel<double> seawater{4.0};
  const double delta = seawater.skin_depth(kCarrier);
  CHECK(delta == doctest::Approx(kSkinDepthSeawater).epsilon(1e-14));
  const std::complex<double> at_delta = attenuation(seawater, kCarrier, delta);
  CHECK(std::abs(at_delta) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(std::arg(at_delta) == doctest::Approx(-1.0).epsilon(1e-14));

  CHECK_THROWS_AS(attenuation(MediumModel<double>{-1.0}, kCarrier, 1.0), Error);
  CHECK_THROWS_AS(attenuation(seawater, kCarrier, 0.0), Error);
}

TEST_CASE("channel matrix on the z axis with identity frames") {
  const LinkGeometry<double> g{7.0, 0.0, 0.0};
  const ChannelMatrix<double> h = channel_matrix(g, kTri, kCarrier);
  const double scale = kCoilConstantRef / (7.0 * 7.0 * 7.0);
  Eigen::Matrix3cd expected = Eigen::Matrix3cd::Zero();
  expected.diagonal() << -scale, -scale, 2.0 * scale;
  CHECK((h.entries - expected).norm() / expected.norm() < 1e-14);
  CHECK(h.rows() == 3);
  CHECK(h.cols() == 3);
  CHECK_FALSE(h.outside_dipole_regime);
}

TEST_CASE("channel matrix entries follow the coil-axis projections") {
  // Independent oracle: H_ij = (C / r^3) * (R_r e_i)^T (3 u u^T - I) (R_t e_j).
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    LinkGeometry<double> g;
    g.range_m = std::uniform_real_distribution<double>(1.0, 30.0)(rng);
    const Vector3<double> u = random_unit(rng);
    std::tie(g.theta_rad, g.phi_rad) = angles_from_direction(u);
    g.tx_orientation = random_rotation(rng);
    g.rx_orientation = random_rotation(rng);
    const ChannelMatrix<double> h = channel_matrix(g, kTri, kCarrier);
    const double scale = kCoilConstantRef / std::pow(g.range_m, 3);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const Vector3<double> rx_axis = g.rx_orientation.col(i);
        const Vector3<double> tx_axis = g.tx_orientation.col(j);
        const double expected =
            scale * (3.0 * rx_axis.dot(u) * u.dot(tx_axis) - rx_axis.dot(tx_axis));
        CHECK(h.entries(i, j).real() == doctest::Approx(expected).epsilon(1e-10).scale(scale));
        CHECK(h.entries(i, j).imag() == 0.0);
      }
    }
  }
}

TEST_CASE("Frobenius norm is rotation invariant") {
  std::mt19937_64 rng(17);
  LinkGeometry<double> g{12.0, 1.1, 2.3};
  const double reference = channel_matrix(g, kTri, kCarrier).frobenius_norm();
  CHECK(reference == doctest::Approx(std::sqrt(6.0) * kCoilConstantRef / 1728.0).epsilon(1e-13));
  for (int i = 0; i < 100; ++i) {
    g.tx_orientation = random_rotation(rng);
    g.rx_orientation = random_rotation(rng);
    CHECK(channel_matrix(g, kTri, kCarrier).frobenius_norm() ==
          doctest::Approx(reference).epsilon(1e-13));
  }
}

TEST_CASE("doubling the range divides every entry by 8") {
  const LinkGeometry<double> near{4.0, 0.7, 1.9, rotation_zyx(0.3, -0.2, 0.9),
                                  rotation_zyx(-1.0, 0.4, 0.1)};
  LinkGeometry<double> far = near;
  far.range_m = 8.0;
  const auto a = channel_matrix(near, kTri, kCarrier).entries;
  const auto b = channel_matrix(far, kTri, kCarrier).entries;
  CHECK((a - 8.0 * b).norm() / a.norm() < 1e-15);
}

TEST_CASE("single-axis links reduce to a scalar projection") {
  const Vector3<double> n_t = Vector3<double>(1.0, 2.0, 2.0).normalized();
  const Vector3<double> n_r = Vector3<double>(0.0, 0.6, 0.8);
  const CoilSpec<double> tx = CoilSpec<double>::single_axis(0.15, 20, n_t);
  const CoilSpec<double> rx = CoilSpec<double>::single_axis(0.15, 20, n_r);
  const LinkGeometry<double> g{5.0, 0.9, 0.4, rotation_zyx(0.2, 0.1, 0.0),
                               rotation_zyx(0.0, 0.5, -0.3)};
  const ChannelMatrix<double> h = channel_matrix(g, tx, rx, kCarrier, MediumModel<double>{});
  REQUIRE(h.rows() == 1);
  REQUIRE(h.cols() == 1);
  const Vector3<double> u = g.direction();
  const Vector3<double> mt = g.tx_orientation * n_t;
  const Vector3<double> mr = g.rx_orientation * n_r;
  const double expected =
      kCoilConstantRef / 125.0 * (3.0 * mr.dot(u) * u.dot(mt) - mr.dot(mt));
  CHECK(h.entries(0, 0).real() == doctest::Approx(expected).epsilon(1e-13));

  const ChannelMatrix<double> mixed = channel_matrix(g, kTri, rx, kCarrier, MediumModel<double>{});
  CHECK(mixed.rows() == 1);
  CHECK(mixed.cols() == 3);
}

TEST_CASE("conductive medium scales the whole matrix") {
  const LinkGeometry<double> g{3.0, 0.5, 0.5};
  const MediumModel<double> seawater{4.0};
  const auto lossless = channel_matrix(g, kTri, kCarrier).entries;
  const ChannelMatrix<double> lossy = channel_matrix(g, kTri, kCarrier, seawater);
  const std::complex<double> expected =
      std::exp(std::complex<double>(-3.0 / kSkinDepthSeawater, -3.0 / kSkinDepthSeawater));
  CHECK(std::abs(lossy.attenuation - expected) < 1e-14);
  CHECK((lossy.entries - expected * lossless).norm() / lossless.norm() < 1e-14);
}

TEST_CASE("near-field flag below five coil radii") {
  const ChannelMatrix<double> h = channel_matrix(LinkGeometry<double>{0.7, 0.3, 0.3}, kTri, kCarrier);
  CHECK(h.outside_dipole_regime);
  CHECK(h.entries.allFinite());
}

TEST_CASE("geometry validation") {
  const auto expect_code = [](const LinkGeometry<double>& g, ErrorCode code) {
    try {
      channel_matrix(g, kTri, kCarrier);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == code);
    }
  };
  expect_code(LinkGeometry<double>{0.0, 0.1, 0.1}, ErrorCode::NonFiniteGeometry);
  expect_code(LinkGeometry<double>{NAN, 0.1, 0.1}, ErrorCode::NonFiniteGeometry);
  expect_code(LinkGeometry<double>{INFINITY, 0.1, 0.1}, ErrorCode::NonFiniteGeometry);
  LinkGeometry<double> reflected{5.0, 0.1, 0.1};
  reflected.tx_orientation.col(0) *= -1.0;
  CHECK_THROWS_AS(channel_matrix(reflected, kTri, kCarrier), Error);
  LinkGeometry<double> scaled{5.0, 0.1, 0.1};
  scaled.rx_orientation *= 1.01;
  CHECK_THROWS_AS(channel_matrix(scaled, kTri, kCarrier), Error);
}

TEST_CASE("angle round trip") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const Vector3<double> u = random_unit(rng);
    const auto [theta, phi] = angles_from_direction(u);
    CHECK(theta >= 0.0);
    CHECK(theta <= constants::pi<double>);
    CHECK(phi >= 0.0);
    CHECK(phi < 2.0 * constants::pi<double>);
    CHECK((direction_from_angles(theta, phi) - u).norm() < 1e-14);
  }
}

TEST_CASE("single precision instantiation") {
  const CoilSpec<float> coil = CoilSpec<float>::tri_axial(0.15f, 20);
  const ChannelMatrix<float> h =
      channel_matrix(LinkGeometry<float>{10.0f, 0.5f, 0.5f}, coil, CarrierSpec<float>{});
  CHECK(h.frobenius_norm() ==
        doctest::Approx(std::sqrt(6.0) * kCoilConstantRef / 1000.0).epsilon(1e-5));
}
