#pragma once

#include <stdexcept>
#include <string>

namespace fhire {

enum class DataErrorKind {
    MissingFile,
    BadHeader,
    BadField,
    DuplicateId,
    InvalidRegion,
    UnknownInstitution,
    BadYear,
    BadGender,
    ZeroMarginal,
    EmptyInput,
    CandidateMismatch,
    InfeasibleSpec,
};

const char* to_string(DataErrorKind kind);

// Problems with input data or with arguments that describe data.
class DataError : public std::runtime_error {
public:
    DataError(DataErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    DataErrorKind kind() const noexcept { return kind_; }

private:
    DataErrorKind kind_;
};

// Raised when a computation cannot produce a finite or defined answer.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fhire
