#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fvol {

// Numeric values are mirrored by fvol_status in fvol.h; keep them in sync.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kMismatchedLength = 2,
  kNonUniformGrid = 3,
  kGridTooShort = 4,
  kNonPositivePrice = 5,
  kTooShort = 6,
  kOutOfSupport = 7,
  kMismatchedGrid = 8,
  kEmptyDataset = 9,
  kKTooLarge = 10,
  kNoNeighbors = 11,
  kCompleteModeOnIncompleteData = 12,
  kMissingFittedValue = 13,
  kDegenerateVarianceAtObservation = 14,
  kEmptyBall = 15,
  kNonPositivePlugin = 16,
  kAllDistancesZero = 17,
  kNoFeasibleCandidate = 18,
  kZeroDenominator = 19,
  kEmptyRecords = 20,
  kEmptySeries = 21,
  kSchemaError = 22,
  kNoOverlappingDates = 23,
  kIoError = 24,
  kPcaNotFitted = 25,
  kInternal = 99,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace fvol
