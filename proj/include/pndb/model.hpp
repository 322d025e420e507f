#pragma once

// Parameter model: typed values, field specs, versioned data dictionaries,
// scope paths and collection instances, together with the canonical text
// forms every exporter and the change log share.

#include "pndb/digest.hpp"
#include "pndb/error.hpp"

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pndb {

enum class PrimitiveType : std::uint8_t {
    Int,
    Float,
    Bool,
    String,
    BlobRef,
    IntArray,
    FloatArray,
    StringArray,
};

/// Text tag used in literals, XML and tables: int, float, bool, string,
/// blob, int[], float[], string[].
std::string_view type_tag(PrimitiveType type) noexcept;

/// Throws UnknownType for anything outside the closed tag set.
PrimitiveType parse_type_tag(std::string_view tag);

/// Reference to a stored blob as it appears inside a parameter value.
struct BlobKey {
    std::uint64_t id = 0;
    Digest checksum{};

    bool operator==(const BlobKey&) const = default;
};

/// Reference returned by the blob store; the length is bookkeeping only and
/// is not part of the textual blob literal.
struct BlobRef {
    std::uint64_t id = 0;
    Digest checksum{};
    std::uint64_t length = 0;

    BlobKey key() const { return {id, checksum}; }
    bool operator==(const BlobRef&) const = default;
};

class ParameterValue {
public:
    using Storage = std::variant<std::int64_t, double, bool, std::string, BlobKey, std::vector<std::int64_t>,
                                 std::vector<double>, std::vector<std::string>>;

    static ParameterValue integer(std::int64_t v) { return ParameterValue(Storage(std::in_place_index<0>, v)); }
    // Throws NonFiniteFloat.
    static ParameterValue real(double v);
    static ParameterValue boolean(bool v) { return ParameterValue(Storage(std::in_place_index<2>, v)); }
    static ParameterValue string(std::string v) {
        return ParameterValue(Storage(std::in_place_index<3>, std::move(v)));
    }
    static ParameterValue blob(BlobKey v) { return ParameterValue(Storage(std::in_place_index<4>, v)); }
    static ParameterValue int_array(std::vector<std::int64_t> v) {
        return ParameterValue(Storage(std::in_place_index<5>, std::move(v)));
    }
    static ParameterValue real_array(std::vector<double> v);
    static ParameterValue string_array(std::vector<std::string> v) {
        return ParameterValue(Storage(std::in_place_index<7>, std::move(v)));
    }

    PrimitiveType type() const noexcept { return static_cast<PrimitiveType>(storage_.index()); }

    std::int64_t as_int() const { return std::get<0>(storage_); }
    double as_float() const { return std::get<1>(storage_); }
    bool as_bool() const { return std::get<2>(storage_); }
    const std::string& as_string() const { return std::get<3>(storage_); }
    const BlobKey& as_blob() const { return std::get<4>(storage_); }
    const std::vector<std::int64_t>& as_int_array() const { return std::get<5>(storage_); }
    const std::vector<double>& as_float_array() const { return std::get<6>(storage_); }
    const std::vector<std::string>& as_string_array() const { return std::get<7>(storage_); }

    const Storage& storage() const noexcept { return storage_; }

    bool operator==(const ParameterValue&) const = default;

private:
    explicit ParameterValue(Storage s) : storage_(std::move(s)) {}
    Storage storage_;
};

/// Canonical literal: shortest round-trip floats (always with a '.' or an
/// exponent), `[a,b]` arrays, JSON-quoted strings inside string arrays and
/// `blob:<id>:<hex>` for blob references.
std::string render(const ParameterValue& value);

/// Errors: UnknownType, MalformedLiteral, NonFiniteFloat.
ParameterValue parse_primitive(std::string_view type_tag, std::string_view literal);
ParameterValue parse_literal(PrimitiveType type, std::string_view literal);

std::string render_blob_key(const BlobKey& key);

bool is_identifier(std::string_view text) noexcept;
// Throws InvalidIdentifier.
void require_identifier(std::string_view text, std::string_view what);

struct FieldSpec {
    std::string name;
    PrimitiveType type = PrimitiveType::Int;
    std::string comment;
    std::string unit; // empty when the field has no unit
    std::optional<ParameterValue> default_value;
    std::size_t index = 0;

    bool operator==(const FieldSpec&) const = default;
};

/// Errors: NoDefaultForBlob.
ParameterValue default_value(const FieldSpec& spec);

struct DataDictionary {
    std::string class_name;
    std::uint32_t dict_version = 0;
    std::vector<FieldSpec> fields;

    const FieldSpec* find(std::string_view name) const noexcept;
    bool operator==(const DataDictionary&) const = default;
};

/// Checks identifier grammar, name uniqueness and default types, and
/// renumbers field indices 0..n-1. Throws InvalidIdentifier or
/// ValidationFailed (duplicate names, mistyped defaults).
DataDictionary make_dictionary(std::string class_name, std::vector<FieldSpec> fields,
                               std::uint32_t dict_version = 0);

/// True when both field lists carry the same names, types, units, comments
/// and defaults in the same order.
bool same_fields(const DataDictionary& a, const DataDictionary& b) noexcept;

class ScopePath {
public:
    ScopePath() = default;

    /// Accepts "/", "/A/B", "A/B" and a trailing slash; rejects empty
    /// segments and non-identifier segments with InvalidScope.
    static ScopePath parse(std::string_view text);
    static ScopePath root() { return {}; }

    const std::vector<std::string>& segments() const noexcept { return segments_; }
    bool is_root() const noexcept { return segments_.empty(); }
    std::string canonical() const;
    ScopePath parent() const;
    ScopePath child(std::string_view segment) const;
    bool is_parent_of(const ScopePath& other) const noexcept;

    bool operator==(const ScopePath&) const = default;
    std::strong_ordering operator<=>(const ScopePath& other) const { return canonical() <=> other.canonical(); }

private:
    std::vector<std::string> segments_;
};

struct CollectionInstance {
    std::string class_name;
    std::string instance_name;
    ScopePath scope;
    std::uint32_t dict_version = 0;
    std::uint32_t object_version = 0;
    std::vector<ParameterValue> values;

    bool operator==(const CollectionInstance&) const = default;
};

struct ValidationIssue {
    enum class Kind { MissingField, ExtraValue, TypeMismatch, DuplicateName, ClassMismatch, BadDefault };
    Kind kind;
    std::string name;
    std::size_t index = 0;
    std::optional<PrimitiveType> expected;
    std::optional<PrimitiveType> got;

    std::string describe() const;
    bool operator==(const ValidationIssue&) const = default;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    std::vector<std::string> widened; // Int values accepted for Float fields

    bool ok() const noexcept { return issues.empty(); }
    std::string describe() const;
};

ValidationReport validate_collection(const CollectionInstance& instance, const DataDictionary& dict);

/// Error carrying the failing report.
class ValidationError : public Error {
public:
    explicit ValidationError(ValidationReport report)
        : Error(ErrorCode::ValidationFailed, report.describe()), report_(std::move(report)) {}
    const ValidationReport& report() const noexcept { return report_; }

private:
    ValidationReport report_;
};

/// Applies the Int->Float widening recorded in a clean report so the values
/// match the dictionary types exactly.
std::vector<ParameterValue> widen_to(const DataDictionary& dict, std::vector<ParameterValue> values);

} // namespace pndb
