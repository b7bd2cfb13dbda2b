#include "metalearn/errors.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace metalearn {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::TheoryViolation: return "TheoryViolation";
    case ErrorCode::InvalidRepresentation: return "InvalidRepresentation";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::LinearSolveFailure: return "LinearSolveFailure";
    case ErrorCode::EigenFailure: return "EigenFailure";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::StreamExhausted: return "StreamExhausted";
    case ErrorCode::AuditModeOff: return "AuditModeOff";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::TaskCountMismatch: return "TaskCountMismatch";
    case ErrorCode::AllTasksDegenerate: return "AllTasksDegenerate";
    case ErrorCode::EmptyInput: return "EmptyInput";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

namespace {

std::mutex& handler_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& handler_slot() {
  static WarningHandler h = [](std::string_view msg) {
    std::cerr << "warning: " << msg << '\n';
  };
  return h;
}

}  // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(handler_mutex());
  return std::exchange(handler_slot(), std::move(handler));
}

void warn(std::string_view message) {
  std::lock_guard lock(handler_mutex());
  if (handler_slot()) handler_slot()(message);
}

}  // namespace metalearn
