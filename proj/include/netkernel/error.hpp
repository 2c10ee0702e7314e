#ifndef NETKERNEL_ERROR_HPP
#define NETKERNEL_ERROR_HPP
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace netkernel {

enum class ErrorCode {
  EmptyGraph,
  DuplicateVertex,
  DisconnectedGraph,
  DuplicateEdge,
  SelfLoop,
  NonPositiveLength,
  DanglingEndpoint,
  InvalidPoint,
  InvalidParams,
  InconsistentNetwork,
  SingularSystem,
  MissingCoordinates,
  MetricMismatch,
  NotPositiveDefinite,
  InnerFamilyNotCompletelyMonotone,
  ParseError,
  IoError,
};

inline constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::DuplicateVertex: return "DuplicateVertex";
    case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::NonPositiveLength: return "NonPositiveLength";
    case ErrorCode::DanglingEndpoint: return "DanglingEndpoint";
    case ErrorCode::InvalidPoint: return "InvalidPoint";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::InconsistentNetwork: return "InconsistentNetwork";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::MissingCoordinates: return "MissingCoordinates";
    case ErrorCode::MetricMismatch: return "MetricMismatch";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::InnerFamilyNotCompletelyMonotone: return "InnerFamilyNotCompletelyMonotone";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Library-wide exception. Every failure carries exactly one ErrorCode.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace netkernel

#endif  // NETKERNEL_ERROR_HPP
