#pragma once

#include <stdexcept>
#include <string>

namespace ofdma {

enum class ErrorKind {
  InvalidProfile,
  InvalidConfiguration,
  InfeasibleConfiguration,
  InfeasibleAssignment,
  ZeroGainSubcarrier,
  SingularSplit,
  OracleTooLarge,
  OracleFailure,
  InvalidInput,
  InvalidQuery,
  UndefinedDeviation,
  UndefinedRatio,
  Io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidProfile: return "invalid-profile";
    case ErrorKind::InvalidConfiguration: return "invalid-configuration";
    case ErrorKind::InfeasibleConfiguration: return "infeasible-configuration";
    case ErrorKind::InfeasibleAssignment: return "infeasible-assignment";
    case ErrorKind::ZeroGainSubcarrier: return "zero-gain-subcarrier";
    case ErrorKind::SingularSplit: return "singular-split";
    case ErrorKind::OracleTooLarge: return "oracle-too-large";
    case ErrorKind::OracleFailure: return "oracle-failure";
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::InvalidQuery: return "invalid-query";
    case ErrorKind::UndefinedDeviation: return "undefined-deviation";
    case ErrorKind::UndefinedRatio: return "undefined-ratio";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
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

namespace detail {
inline void require(bool cond, ErrorKind kind, const char* what) {
  if (!cond) throw Error(kind, what);
}
}  // namespace detail

}  // namespace ofdma
