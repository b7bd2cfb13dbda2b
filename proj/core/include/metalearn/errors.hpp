#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace metalearn {

enum class ErrorCode {
  DimensionMismatch,
  TheoryViolation,
  InvalidRepresentation,
  InvalidParameter,
  LinearSolveFailure,
  EigenFailure,
  NonFiniteInput,
  PreconditionViolated,
  StreamExhausted,
  AuditModeOff,
  InvalidSpec,
  FileNotFound,
  SchemaError,
  TaskCountMismatch,
  AllTasksDegenerate,
  EmptyInput,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map them to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

// Non-fatal diagnostics (theory-assumption violations, skipped tasks).
// The default handler writes to stderr; tests and the CLI may replace it.
using WarningHandler = std::function<void(std::string_view)>;

WarningHandler set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

}  // namespace metalearn
