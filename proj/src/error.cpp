#include "dhan/error.hpp"

namespace dhan {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::DanglingNode: return "DanglingNode";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnknownRelation: return "UnknownRelation";
    case ErrorCode::NodeOutOfRange: return "NodeOutOfRange";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptySegment: return "EmptySegment";
    case ErrorCode::NonScalarLoss: return "NonScalarLoss";
    case ErrorCode::TapeConsumed: return "TapeConsumed";
    case ErrorCode::StepOutOfRange: return "StepOutOfRange";
    case ErrorCode::RelationClassMismatch: return "RelationClassMismatch";
    case ErrorCode::NoRelations: return "NoRelations";
    case ErrorCode::DirectionInvalid: return "DirectionInvalid";
    case ErrorCode::ConfigShapeMismatch: return "ConfigShapeMismatch";
    case ErrorCode::NoLabeledNodes: return "NoLabeledNodes";
    case ErrorCode::DivergedLoss: return "DivergedLoss";
    case ErrorCode::NoRelevant: return "NoRelevant";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::InfeasibleConfig: return "InfeasibleConfig";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace dhan
