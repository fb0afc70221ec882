#include "hullspace/error.hpp"

namespace hullspace {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kResolutionBelowFloor: return "resolution-below-floor";
    case ErrorKind::kDegenerateHull: return "degenerate-hull";
    case ErrorKind::kOutOfBounds: return "out-of-bounds";
    case ErrorKind::kInfeasible: return "infeasible";
    case ErrorKind::kEvaluation: return "evaluation";
    case ErrorKind::kConditioning: return "conditioning";
    case ErrorKind::kEmbedding: return "embedding";
    case ErrorKind::kUnknownId: return "unknown-id";
    case ErrorKind::kInvalidSelection: return "invalid-selection";
    case ErrorKind::kIncompleteSelection: return "incomplete-selection";
    case ErrorKind::kShrinkStall: return "shrink-stall";
    case ErrorKind::kInteractionCap: return "interaction-cap";
    case ErrorKind::kPrematureTermination: return "premature-termination";
    case ErrorKind::kOrdering: return "ordering";
    case ErrorKind::kPrematureQuestionnaire: return "premature-questionnaire";
    case ErrorKind::kMalformedAnswers: return "malformed-answers";
    case ErrorKind::kLogIntegrity: return "log-integrity";
    case ErrorKind::kMissingMode: return "missing-mode";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

}  // namespace hullspace
