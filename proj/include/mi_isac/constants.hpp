// SPDX-License-Identifier: Apache-2.0

#ifndef MI_ISAC_CONSTANTS_HPP
#define MI_ISAC_CONSTANTS_HPP

#include <numbers>

namespace mi_isac::constants {

template <typename Scalar = double>
inline constexpr Scalar pi = std::numbers::pi_v<Scalar>;

// Vacuum permeability; soil, seawater and tissue are treated as mu ~ mu_0.
template <typename Scalar = double>
inline constexpr Scalar mu0 = Scalar(4) * pi<Scalar> * Scalar(1e-7);

template <typename Scalar = double>
inline constexpr Scalar boltzmann = Scalar(1.380649e-23);  // J/K

template <typename Scalar = double>
inline constexpr Scalar speed_of_light = Scalar(299792458);  // m/s

template <typename Scalar = double>
inline constexpr Scalar reference_temperature_k = Scalar(290);

}  // namespace mi_isac::constants

#endif  // MI_ISAC_CONSTANTS_HPP
