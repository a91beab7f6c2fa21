#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rodbell {

enum class ErrorCode {
  InvalidArgument,
  EmptyRegionList,
  MissingMonteCarloParams,
  DeltaKernelHasNoDensity,
  ClosedFormUnavailable,
  NonPositiveEffort,
  InternalInconsistency,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyRegionList: return "EmptyRegionList";
    case ErrorCode::MissingMonteCarloParams: return "MissingMonteCarloParams";
    case ErrorCode::DeltaKernelHasNoDensity: return "DeltaKernelHasNoDensity";
    case ErrorCode::ClosedFormUnavailable: return "ClosedFormUnavailable";
    case ErrorCode::NonPositiveEffort: return "NonPositiveEffort";
    case ErrorCode::InternalInconsistency: return "InternalInconsistency";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

namespace detail {
inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}
}  // namespace detail

}  // namespace rodbell
