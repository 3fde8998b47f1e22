#include "dip3d/errors.hpp"

namespace dip3d {
namespace {

std::string compose(ErrorCode code, const std::string& detail,
                    const std::string& message, const std::string& stage) {
  std::string out;
  if (!stage.empty()) out += "[" + stage + "] ";
  out += to_string(code);
  if (!detail.empty()) out += "(" + detail + ")";
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kValidation: return "ValidationError";
    case ErrorCode::kInvalidDisparity: return "InvalidDisparity";
    case ErrorCode::kBehindCamera: return "BehindCamera";
    case ErrorCode::kEmptyMask: return "EmptyMask";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kPoseRejected: return "PoseRejected";
    case ErrorCode::kInfeasiblePose: return "InfeasiblePose";
    case ErrorCode::kDegeneratePointing: return "DegeneratePointing";
    case ErrorCode::kNoCandidates: return "NoCandidates";
    case ErrorCode::kOutOfFrustum: return "OutOfFrustum";
    case ErrorCode::kInfeasibleGeometry: return "InfeasibleGeometry";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kIdMismatch: return "IdMismatch";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string detail, std::string message,
             std::string stage)
    : std::runtime_error(compose(code, detail, message, stage)),
      code_(code),
      detail_(std::move(detail)),
      message_(std::move(message)),
      stage_(std::move(stage)) {}

Error Error::with_stage(std::string stage) const {
  return Error(code_, detail_, message_, std::move(stage));
}

}  // namespace dip3d
