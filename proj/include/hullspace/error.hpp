#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hullspace {

enum class ErrorKind {
  kInvalidArgument,
  kResolutionBelowFloor,
  kDegenerateHull,
  kOutOfBounds,
  kInfeasible,
  kEvaluation,
  kConditioning,
  kEmbedding,
  kUnknownId,
  kInvalidSelection,
  kIncompleteSelection,
  kShrinkStall,
  kInteractionCap,
  kPrematureTermination,
  kOrdering,
  kPrematureQuestionnaire,
  kMalformedAnswers,
  kLogIntegrity,
  kMissingMode,
  kIo,
};

std::string_view to_string(ErrorKind kind);

/// Every recoverable failure in the library is reported as an Error carrying
/// a machine-readable kind; the server maps kinds onto HTTP status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hullspace
