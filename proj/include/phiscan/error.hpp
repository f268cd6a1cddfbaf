#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace phiscan {

enum class ErrorCode {
    NotFound,
    UnsupportedContainer,
    CorruptArchive,
    AmbiguousUnit,
    NonPositive,
    OutOfRange,
    EmptyField,
    NotSqlite,
    CorruptDatabase,
    MissingTable,
    MalformedRow,
    MalformedXml,
    NoCredentialKeys,
    MissingFields,
    InvalidSpec,
    InvalidConfig,
    IoFailure,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace phiscan
