#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dhan {

enum class ErrorCode {
  TypeMismatch,
  DanglingNode,
  DimensionMismatch,
  UnknownRelation,
  NodeOutOfRange,
  ShapeMismatch,
  EmptySegment,
  NonScalarLoss,
  TapeConsumed,
  StepOutOfRange,
  RelationClassMismatch,
  NoRelations,
  DirectionInvalid,
  ConfigShapeMismatch,
  NoLabeledNodes,
  DivergedLoss,
  NoRelevant,
  EmptySet,
  DegenerateData,
  InfeasibleConfig,
  IoFailure,
  ParseError,
  InvalidArgument,
};

std::string_view error_code_name(ErrorCode code);

// Every recoverable failure in the library surfaces as this exception; the
// code is what the CLI prints in its one-line error report.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dhan
