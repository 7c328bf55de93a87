#ifndef RICHPREF_ERROR_HPP
#define RICHPREF_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace richpref {

enum class ErrorCode {
    InvalidArgument,
    HorizonMismatch,
    DegenerateUpdate,
    MissingGroundTruth,
    RejectionBudgetExceeded,
    PoolExhausted,
    EmptyLog,
    NoFeatureAnswers,
    UnknownPool,
    UnknownSession,
    WrongPhase,
    StaleAnswer,
    DuplicateVote,
    ValidationNotReady,
    Io,
    Format,
};

std::string_view to_string(ErrorCode code);

/// Every failure the library reports carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace richpref

#endif  // RICHPREF_ERROR_HPP
