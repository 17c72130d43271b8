#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace accsim {

enum class ErrorKind {
  InvalidInput,
  DegenerateStrongConvexity,
  DegenerateSimilarity,
  PerfectlyConditioned,
  ParseError,
  InsufficientData,
  TopologyGenerationFailed,
  UnreachableTarget,
  InstanceTooLarge,
  OracleNotConverged,
  ConfigError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Exception carrying a machine-checkable error category.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::DegenerateStrongConvexity: return "degenerate-strong-convexity";
    case ErrorKind::DegenerateSimilarity: return "degenerate-similarity";
    case ErrorKind::PerfectlyConditioned: return "perfectly-conditioned";
    case ErrorKind::ParseError: return "parse-error";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::TopologyGenerationFailed: return "topology-generation-failed";
    case ErrorKind::UnreachableTarget: return "unreachable-target";
    case ErrorKind::InstanceTooLarge: return "instance-too-large";
    case ErrorKind::OracleNotConverged: return "oracle-not-converged";
    case ErrorKind::ConfigError: return "config-error";
  }
  return "unknown";
}

}  // namespace accsim
