#include "pndb/error.hpp"

namespace pndb {

std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::UnknownType: return "UnknownType";
    case ErrorCode::MalformedLiteral: return "MalformedLiteral";
    case ErrorCode::NonFiniteFloat: return "NonFiniteFloat";
    case ErrorCode::NoDefaultForBlob: return "NoDefaultForBlob";
    case ErrorCode::InvalidIdentifier: return "InvalidIdentifier";
    case ErrorCode::InvalidScope: return "InvalidScope";
    case ErrorCode::ReadOnlyStore: return "ReadOnlyStore";
    case ErrorCode::UnknownClass: return "UnknownClass";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::StoreLocked: return "StoreLocked";
    case ErrorCode::CorruptStore: return "CorruptStore";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::IncompatibleEvolution: return "IncompatibleEvolution";
    case ErrorCode::DuplicateFolder: return "DuplicateFolder";
    case ErrorCode::MalformedPath: return "MalformedPath";
    case ErrorCode::UnknownFolder: return "UnknownFolder";
    case ErrorCode::UnknownTag: return "UnknownTag";
    case ErrorCode::NonMonotonicSince: return "NonMonotonicSince";
    case ErrorCode::InvalidInterval: return "InvalidInterval";
    case ErrorCode::NoValidEntry: return "NoValidEntry";
    case ErrorCode::EmptyHead: return "EmptyHead";
    case ErrorCode::DuplicateTag: return "DuplicateTag";
    case ErrorCode::ReservedTagName: return "ReservedTagName";
    case ErrorCode::MalformedAddress: return "MalformedAddress";
    case ErrorCode::DuplicateConverter: return "DuplicateConverter";
    case ErrorCode::NoConverter: return "NoConverter";
    case ErrorCode::CacheContextMismatch: return "CacheContextMismatch";
    case ErrorCode::FutureSequence: return "FutureSequence";
    case ErrorCode::WrongMaster: return "WrongMaster";
    case ErrorCode::NonContiguous: return "NonContiguous";
    case ErrorCode::LocalMutationConflict: return "LocalMutationConflict";
    case ErrorCode::MalformedChangeset: return "MalformedChangeset";
    case ErrorCode::XmlParseError: return "XmlParseError";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::BadRequest: return "BadRequest";
    case ErrorCode::TransportError: return "TransportError";
    }
    return "Unknown";
}

std::optional<ErrorCode> error_code_from_name(std::string_view name) noexcept {
    for (int i = 0; i <= static_cast<int>(ErrorCode::TransportError); ++i) {
        auto code = static_cast<ErrorCode>(i);
        if (error_code_name(code) == name) return code;
    }
    return std::nullopt;
}

} // namespace pndb
