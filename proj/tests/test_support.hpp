#ifndef MI_ISAC_TEST_SUPPORT_HPP
#define MI_ISAC_TEST_SUPPORT_HPP

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mi_isac/physics.hpp"

namespace test {

using mi_isac::Matrix3;
using mi_isac::Vector3;

inline Vector3<double> random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vector3<double> v;
  do {
    v = Vector3<double>(n(rng), n(rng), n(rng));
  } while (v.norm() < 1e-6);
  return v.normalized();
}

// Haar-distributed proper rotation from a normalized random quaternion.
inline Matrix3<double> random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

// Unit direction at least `margin` radians away from both poles.
inline Vector3<double> random_unit_off_pole(std::mt19937_64& rng, double margin = 0.05) {
  for (;;) {
    const Vector3<double> u = random_unit(rng);
    if (std::acos(std::abs(u.z())) > margin) return u;
  }
}

/// Ordinary least-squares slope of y on x.
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(x.size());
  my /= double(y.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace test

#endif  // MI_ISAC_TEST_SUPPORT_HPP
