#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fastlight {

enum class ErrorKind {
  ZeroVector,
  OrthogonalSelection,
  FullExtinction,
  InfiniteVelocity,
  GridTooCoarse,
  NegativeIntensity,
  WrapAround,
  GridMismatch,
  ZeroEnergy,
  NeverCrosses,
  NoMinimum,
  InvalidArgument,
  InvalidData,
  Config,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::OrthogonalSelection: return "OrthogonalSelection";
    case ErrorKind::FullExtinction: return "FullExtinction";
    case ErrorKind::InfiniteVelocity: return "InfiniteVelocity";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::NegativeIntensity: return "NegativeIntensity";
    case ErrorKind::WrapAround: return "WrapAround";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::ZeroEnergy: return "ZeroEnergy";
    case ErrorKind::NeverCrosses: return "NeverCrosses";
    case ErrorKind::NoMinimum: return "NoMinimum";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidData: return "InvalidData";
    case ErrorKind::Config: return "Config";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace fastlight
