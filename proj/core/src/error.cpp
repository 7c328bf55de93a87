#include "richpref/error.hpp"

namespace richpref {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::HorizonMismatch: return "HorizonMismatch";
        case ErrorCode::DegenerateUpdate: return "DegenerateUpdate";
        case ErrorCode::MissingGroundTruth: return "MissingGroundTruth";
        case ErrorCode::RejectionBudgetExceeded: return "RejectionBudgetExceeded";
        case ErrorCode::PoolExhausted: return "PoolExhausted";
        case ErrorCode::EmptyLog: return "EmptyLog";
        case ErrorCode::NoFeatureAnswers: return "NoFeatureAnswers";
        case ErrorCode::UnknownPool: return "UnknownPool";
        case ErrorCode::UnknownSession: return "UnknownSession";
        case ErrorCode::WrongPhase: return "WrongPhase";
        case ErrorCode::StaleAnswer: return "StaleAnswer";
        case ErrorCode::DuplicateVote: return "DuplicateVote";
        case ErrorCode::ValidationNotReady: return "ValidationNotReady";
        case ErrorCode::Io: return "Io";
        case ErrorCode::Format: return "Format";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace richpref
