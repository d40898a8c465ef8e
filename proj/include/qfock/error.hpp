#ifndef QFOCK_ERROR_HPP
#define QFOCK_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace qfock {

enum class ErrorKind {
  OverlappingIntervals,
  EmptyInterval,
  IncompatiblePartitions,
  NonpositivePower,
  DomainViolation,
  NoConvergenceWithinBudget,
  NonRationalInput,
  OracleBudgetExceeded,
  UnknownCellId,
  NotHermitian,
  InvalidArgument,
  ParseError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::OverlappingIntervals: return "OverlappingIntervals";
    case ErrorKind::EmptyInterval: return "EmptyInterval";
    case ErrorKind::IncompatiblePartitions: return "IncompatiblePartitions";
    case ErrorKind::NonpositivePower: return "NonpositivePower";
    case ErrorKind::DomainViolation: return "DomainViolation";
    case ErrorKind::NoConvergenceWithinBudget: return "NoConvergenceWithinBudget";
    case ErrorKind::NonRationalInput: return "NonRationalInput";
    case ErrorKind::OracleBudgetExceeded: return "OracleBudgetExceeded";
    case ErrorKind::UnknownCellId: return "UnknownCellId";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), message_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

}  // namespace qfock

#endif  // QFOCK_ERROR_HPP
