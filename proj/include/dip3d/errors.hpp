#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dip3d {

enum class ErrorCode {
  kParse,
  kValidation,
  kInvalidDisparity,
  kBehindCamera,
  kEmptyMask,
  kDimensionMismatch,
  kPoseRejected,
  kInfeasiblePose,
  kDegeneratePointing,
  kNoCandidates,
  kOutOfFrustum,
  kInfeasibleGeometry,
  kEmptyInput,
  kIdMismatch,
  kInvalidArgument,
  kIo,
};

// Stable names, used in result documents and evaluation records.
std::string_view to_string(ErrorCode code);

// Every failure in the library is reported as an Error. `detail` names the
// offending field, keypoint or identifier; `stage` is filled in by the
// pipeline when the error crosses a stage boundary.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string detail, std::string message = {},
        std::string stage = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  const std::string& message() const noexcept { return message_; }
  const std::string& stage() const noexcept { return stage_; }

  Error with_stage(std::string stage) const;

 private:
  ErrorCode code_;
  std::string detail_;
  std::string message_;
  std::string stage_;
};

}  // namespace dip3d
