#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pndb {

/// Machine-readable error codes. The names returned by error_code_name() are
/// part of the HTTP contract and must not change.
enum class ErrorCode {
    // core-model
    UnknownType,
    MalformedLiteral,
    NonFiniteFloat,
    NoDefaultForBlob,
    InvalidIdentifier,
    InvalidScope,
    // storage-engine
    ReadOnlyStore,
    UnknownClass,
    ValidationFailed,
    NotFound,
    ChecksumMismatch,
    StoreLocked,
    CorruptStore,
    IoError,
    // evolution
    IncompatibleEvolution,
    // iov
    DuplicateFolder,
    MalformedPath,
    UnknownFolder,
    UnknownTag,
    NonMonotonicSince,
    InvalidInterval,
    NoValidEntry,
    EmptyHead,
    DuplicateTag,
    ReservedTagName,
    // conversion
    MalformedAddress,
    DuplicateConverter,
    NoConverter,
    CacheContextMismatch,
    // sync
    FutureSequence,
    WrongMaster,
    NonContiguous,
    LocalMutationConflict,
    MalformedChangeset,
    // interfaces
    XmlParseError,
    MalformedRow,
    BadRequest,
    TransportError,
};

std::string_view error_code_name(ErrorCode code) noexcept;
std::optional<ErrorCode> error_code_from_name(std::string_view name) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    std::string_view code_name() const noexcept { return error_code_name(code_); }

private:
    ErrorCode code_;
};

} // namespace pndb
