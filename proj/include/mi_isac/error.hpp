// SPDX-License-Identifier: Apache-2.0

#ifndef MI_ISAC_ERROR_HPP
#define MI_ISAC_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace mi_isac {

enum class ErrorCode {
  InvalidParameter,
  NonUnitDirection,
  NonFiniteGeometry,
  NotIdentifiable,
  ZeroChannel,
  AmbiguousDirection,
  SingularCurvature,
  RankDeficientPilots,
  NoCrossover,
  ConfigError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::NonUnitDirection: return "NonUnitDirection";
    case ErrorCode::NonFiniteGeometry: return "NonFiniteGeometry";
    case ErrorCode::NotIdentifiable: return "NotIdentifiable";
    case ErrorCode::ZeroChannel: return "ZeroChannel";
    case ErrorCode::AmbiguousDirection: return "AmbiguousDirection";
    case ErrorCode::SingularCurvature: return "SingularCurvature";
    case ErrorCode::RankDeficientPilots: return "RankDeficientPilots";
    case ErrorCode::NoCrossover: return "NoCrossover";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

namespace detail {

inline void require(bool condition, ErrorCode code, const char* what) {
  if (!condition) throw Error(code, what);
}

}  // namespace detail
}  // namespace mi_isac

#endif  // MI_ISAC_ERROR_HPP
