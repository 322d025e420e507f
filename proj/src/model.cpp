#include "pndb/model.hpp"

#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

namespace pndb {

namespace {

constexpr std::string_view kTags[] = {"int", "float", "bool", "string", "blob", "int[]", "float[]", "string[]"};

[[noreturn]] void malformed(std::string detail) { throw Error(ErrorCode::MalformedLiteral, detail); }

void require_finite(double v) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteFloat, "float value must be finite");
}

std::string render_float(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    std::string out(buf, end);
    if (out.find_first_of(".e") == std::string::npos) out += ".0";
    return out;
}

void append_quoted(std::string& out, std::string_view s) {
    static constexpr char digits[] = "0123456789abcdef";
    out.push_back('"');
    for (unsigned char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        case '\t': out += "\\t"; break;
        default:
            if (c < 0x20) {
                out += "\\u00";
                out.push_back(digits[c >> 4]);
                out.push_back(digits[c & 0xf]);
            } else {
                out.push_back(static_cast<char>(c));
            }
        }
    }
    out.push_back('"');
}

std::int64_t parse_int(std::string_view text) {
    std::int64_t v = 0;
    if (text.empty()) malformed("empty integer literal");
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec == std::errc::result_out_of_range) malformed("integer out of 64-bit range: " + std::string(text));
    if (ec != std::errc() || ptr != text.data() + text.size()) malformed("not an integer: " + std::string(text));
    return v;
}

double parse_float(std::string_view text) {
    if (text.empty()) malformed("empty float literal");
    // from_chars accepts "inf"/"nan" spellings; route them to NonFiniteFloat.
    double v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec == std::errc::result_out_of_range) malformed("float out of range: " + std::string(text));
    if (ec != std::errc() || ptr != text.data() + text.size()) malformed("not a float: " + std::string(text));
    require_finite(v);
    return v;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xc0 | cp >> 6));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xe0 | cp >> 12));
        out.push_back(static_cast<char>(0x80 | (cp >> 6 & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
        out.push_back(static_cast<char>(0xf0 | cp >> 18));
        out.push_back(static_cast<char>(0x80 | (cp >> 12 & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp >> 6 & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
}

// Parses a double-quoted string starting at text[pos]; advances pos past the
// closing quote.
std::string parse_quoted(std::string_view text, std::size_t& pos) {
    if (pos >= text.size() || text[pos] != '"') malformed("expected '\"' in string array");
    ++pos;
    std::string out;
    auto hex4 = [&](std::size_t at) -> std::uint32_t {
        if (at + 4 > text.size()) malformed("truncated \\u escape");
        std::uint32_t v = 0;
        for (std::size_t i = 0; i < 4; ++i) {
            char c = text[at + i];
            v <<= 4;
            if (c >= '0' && c <= '9') v |= static_cast<std::uint32_t>(c - '0');
            else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint32_t>(c - 'a' + 10);
            else if (c >= 'A' && c <= 'F') v |= static_cast<std::uint32_t>(c - 'A' + 10);
            else malformed("bad hex digit in \\u escape");
        }
        return v;
    };
    while (true) {
        if (pos >= text.size()) malformed("unterminated string in array");
        char c = text[pos++];
        if (c == '"') return out;
        if (c != '\\') {
            out.push_back(c);
            continue;
        }
        if (pos >= text.size()) malformed("dangling escape");
        char e = text[pos++];
        switch (e) {
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case '/': out.push_back('/'); break;
        case 'n': out.push_back('\n'); break;
        case 'r': out.push_back('\r'); break;
        case 't': out.push_back('\t'); break;
        case 'b': out.push_back('\b'); break;
        case 'f': out.push_back('\f'); break;
        case 'u': {
            std::uint32_t cp = hex4(pos);
            pos += 4;
            if (cp >= 0xd800 && cp < 0xdc00) {
                if (pos + 6 > text.size() || text[pos] != '\\' || text[pos + 1] != 'u') malformed("lone surrogate");
                std::uint32_t lo = hex4(pos + 2);
                if (lo < 0xdc00 || lo >= 0xe000) malformed("bad low surrogate");
                pos += 6;
                cp = 0x10000 + ((cp - 0xd800) << 10) + (lo - 0xdc00);
            }
            append_utf8(out, cp);
            break;
        }
        default: malformed(std::string("unknown escape \\") + e);
        }
    }
}

std::string_view array_body(std::string_view literal) {
    literal = trim(literal);
    if (literal.size() < 2 || literal.front() != '[' || literal.back() != ']') {
        malformed("array literal must be enclosed in [ ]");
    }
    return literal.substr(1, literal.size() - 2);
}

template <typename T, typename F>
std::vector<T> parse_plain_array(std::string_view literal, F&& element) {
    auto body = array_body(literal);
    std::vector<T> out;
    if (trim(body).empty()) return out;
    std::size_t start = 0;
    while (true) {
        auto comma = body.find(',', start);
        auto piece = trim(body.substr(start, comma == std::string_view::npos ? body.size() - start : comma - start));
        out.push_back(element(piece));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::vector<std::string> parse_string_array(std::string_view literal) {
    auto body = array_body(literal);
    std::vector<std::string> out;
    std::size_t pos = 0;
    auto skip_ws = [&] {
        while (pos < body.size() && is_space(body[pos])) ++pos;
    };
    skip_ws();
    if (pos == body.size()) return out;
    while (true) {
        skip_ws();
        out.push_back(parse_quoted(body, pos));
        skip_ws();
        if (pos == body.size()) return out;
        if (body[pos] != ',') malformed("expected ',' between string array elements");
        ++pos;
    }
}

BlobKey parse_blob_key(std::string_view literal) {
    constexpr std::string_view prefix = "blob:";
    if (literal.substr(0, prefix.size()) != prefix) malformed("blob literal must start with 'blob:'");
    auto rest = literal.substr(prefix.size());
    auto colon = rest.find(':');
    if (colon == std::string_view::npos) malformed("blob literal must be blob:<id>:<checksum>");
    auto id_text = rest.substr(0, colon);
    std::uint64_t id = 0;
    auto [ptr, ec] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), id);
    if (id_text.empty() || ec != std::errc() || ptr != id_text.data() + id_text.size()) {
        malformed("blob id must be a decimal unsigned integer");
    }
    auto digest = digest_from_hex(rest.substr(colon + 1));
    if (!digest) malformed("blob checksum must be 64 hex digits");
    return {id, *digest};
}

} // namespace

std::string_view type_tag(PrimitiveType type) noexcept { return kTags[static_cast<std::size_t>(type)]; }

PrimitiveType parse_type_tag(std::string_view tag) {
    for (std::size_t i = 0; i < std::size(kTags); ++i) {
        if (kTags[i] == tag) return static_cast<PrimitiveType>(i);
    }
    throw Error(ErrorCode::UnknownType, "unknown type tag '" + std::string(tag) + "'");
}

ParameterValue ParameterValue::real(double v) {
    require_finite(v);
    return ParameterValue(Storage(std::in_place_index<1>, v));
}

ParameterValue ParameterValue::real_array(std::vector<double> v) {
    for (double d : v) require_finite(d);
    return ParameterValue(Storage(std::in_place_index<6>, std::move(v)));
}

std::string render_blob_key(const BlobKey& key) {
    return "blob:" + std::to_string(key.id) + ":" + to_hex(key.checksum);
}

std::string render(const ParameterValue& value) {
    struct Visitor {
        std::string operator()(std::int64_t v) const { return std::to_string(v); }
        std::string operator()(double v) const { return render_float(v); }
        std::string operator()(bool v) const { return v ? "true" : "false"; }
        std::string operator()(const std::string& v) const { return v; }
        std::string operator()(const BlobKey& v) const { return render_blob_key(v); }
        std::string operator()(const std::vector<std::int64_t>& v) const {
            std::string out = "[";
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) out += ',';
                out += std::to_string(v[i]);
            }
            return out + "]";
        }
        std::string operator()(const std::vector<double>& v) const {
            std::string out = "[";
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) out += ',';
                out += render_float(v[i]);
            }
            return out + "]";
        }
        std::string operator()(const std::vector<std::string>& v) const {
            std::string out = "[";
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) out += ',';
                append_quoted(out, v[i]);
            }
            return out + "]";
        }
    };
    return std::visit(Visitor{}, value.storage());
}

ParameterValue parse_literal(PrimitiveType type, std::string_view literal) {
    switch (type) {
    case PrimitiveType::Int: return ParameterValue::integer(parse_int(literal));
    case PrimitiveType::Float: return ParameterValue::real(parse_float(literal));
    case PrimitiveType::Bool:
        if (literal == "true") return ParameterValue::boolean(true);
        if (literal == "false") return ParameterValue::boolean(false);
        malformed("bool literal must be 'true' or 'false'");
    case PrimitiveType::String: return ParameterValue::string(std::string(literal));
    case PrimitiveType::BlobRef: return ParameterValue::blob(parse_blob_key(literal));
    case PrimitiveType::IntArray:
        return ParameterValue::int_array(parse_plain_array<std::int64_t>(literal, parse_int));
    case PrimitiveType::FloatArray:
        return ParameterValue::real_array(parse_plain_array<double>(literal, parse_float));
    case PrimitiveType::StringArray: return ParameterValue::string_array(parse_string_array(literal));
    }
    throw Error(ErrorCode::UnknownType, "unknown primitive type");
}

ParameterValue parse_primitive(std::string_view tag, std::string_view literal) {
    return parse_literal(parse_type_tag(tag), literal);
}

bool is_identifier(std::string_view text) noexcept {
    if (text.empty()) return false;
    auto alpha = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
    if (!alpha(text.front())) return false;
    for (char c : text) {
        if (!alpha(c) && !(c >= '0' && c <= '9')) return false;
    }
    return true;
}

void require_identifier(std::string_view text, std::string_view what) {
    if (!is_identifier(text)) {
        throw Error(ErrorCode::InvalidIdentifier, std::string(what) + " '" + std::string(text) + "' is not an identifier");
    }
}

ParameterValue default_value(const FieldSpec& spec) {
    if (spec.default_value) return *spec.default_value;
    switch (spec.type) {
    case PrimitiveType::Int: return ParameterValue::integer(0);
    case PrimitiveType::Float: return ParameterValue::real(0.0);
    case PrimitiveType::Bool: return ParameterValue::boolean(false);
    case PrimitiveType::String: return ParameterValue::string("");
    case PrimitiveType::IntArray: return ParameterValue::int_array({});
    case PrimitiveType::FloatArray: return ParameterValue::real_array({});
    case PrimitiveType::StringArray: return ParameterValue::string_array({});
    case PrimitiveType::BlobRef: break;
    }
    throw Error(ErrorCode::NoDefaultForBlob, "blob field '" + spec.name + "' has no declared default");
}

const FieldSpec* DataDictionary::find(std::string_view name) const noexcept {
    for (const auto& f : fields) {
        if (f.name == name) return &f;
    }
    return nullptr;
}

DataDictionary make_dictionary(std::string class_name, std::vector<FieldSpec> fields, std::uint32_t dict_version) {
    require_identifier(class_name, "class name");
    ValidationReport report;
    std::set<std::string, std::less<>> seen;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        auto& f = fields[i];
        f.index = i;
        require_identifier(f.name, "field name");
        if (!seen.insert(f.name).second) {
            report.issues.push_back({ValidationIssue::Kind::DuplicateName, f.name, i, std::nullopt, std::nullopt});
        }
        if (f.default_value && f.default_value->type() != f.type) {
            report.issues.push_back(
                {ValidationIssue::Kind::BadDefault, f.name, i, f.type, f.default_value->type()});
        }
    }
    if (!report.ok()) throw ValidationError(std::move(report));
    return DataDictionary{std::move(class_name), dict_version, std::move(fields)};
}

bool same_fields(const DataDictionary& a, const DataDictionary& b) noexcept { return a.fields == b.fields; }

ScopePath ScopePath::parse(std::string_view text) {
    ScopePath out;
    if (text.empty() || text == "/") return out;
    if (text.front() == '/') text.remove_prefix(1);
    if (!text.empty() && text.back() == '/') text.remove_suffix(1);
    std::size_t start = 0;
    while (true) {
        auto slash = text.find('/', start);
        auto seg = text.substr(start, slash == std::string_view::npos ? text.size() - start : slash - start);
        if (!is_identifier(seg)) {
            throw Error(ErrorCode::InvalidScope, "scope segment '" + std::string(seg) + "' is not an identifier");
        }
        out.segments_.emplace_back(seg);
        if (slash == std::string_view::npos) break;
        start = slash + 1;
    }
    return out;
}

std::string ScopePath::canonical() const {
    if (segments_.empty()) return "/";
    std::string out;
    for (const auto& s : segments_) {
        out += '/';
        out += s;
    }
    return out;
}

ScopePath ScopePath::parent() const {
    ScopePath p = *this;
    if (!p.segments_.empty()) p.segments_.pop_back();
    return p;
}

ScopePath ScopePath::child(std::string_view segment) const {
    if (!is_identifier(segment)) {
        throw Error(ErrorCode::InvalidScope, "scope segment '" + std::string(segment) + "' is not an identifier");
    }
    ScopePath p = *this;
    p.segments_.emplace_back(segment);
    return p;
}

bool ScopePath::is_parent_of(const ScopePath& other) const noexcept {
    return other.segments_.size() == segments_.size() + 1 &&
           std::equal(segments_.begin(), segments_.end(), other.segments_.begin());
}

std::string ValidationIssue::describe() const {
    switch (kind) {
    case Kind::MissingField: return "MissingField(" + name + ")";
    case Kind::ExtraValue: return "ExtraValue(" + std::to_string(index) + ")";
    case Kind::TypeMismatch:
        return "TypeMismatch(" + name + ", expected " + std::string(type_tag(*expected)) + ", got " +
               std::string(type_tag(*got)) + ")";
    case Kind::DuplicateName: return "DuplicateName(" + name + ")";
    case Kind::ClassMismatch: return "ClassMismatch(" + name + ")";
    case Kind::BadDefault: return "BadDefault(" + name + ")";
    }
    return "?";
}

std::string ValidationReport::describe() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < issues.size(); ++i) {
        if (i) out << ", ";
        out << issues[i].describe();
    }
    return out.str();
}

ValidationReport validate_collection(const CollectionInstance& instance, const DataDictionary& dict) {
    ValidationReport report;
    if (instance.class_name != dict.class_name) {
        report.issues.push_back({ValidationIssue::Kind::ClassMismatch, instance.class_name, 0, {}, {}});
        return report;
    }
    const auto& values = instance.values;
    for (std::size_t i = 0; i < dict.fields.size(); ++i) {
        const auto& f = dict.fields[i];
        if (i >= values.size()) {
            report.issues.push_back({ValidationIssue::Kind::MissingField, f.name, i, f.type, std::nullopt});
            continue;
        }
        auto got = values[i].type();
        if (got == f.type) continue;
        if (f.type == PrimitiveType::Float && got == PrimitiveType::Int) {
            report.widened.push_back(f.name);
            continue;
        }
        report.issues.push_back({ValidationIssue::Kind::TypeMismatch, f.name, i, f.type, got});
    }
    for (std::size_t i = dict.fields.size(); i < values.size(); ++i) {
        report.issues.push_back({ValidationIssue::Kind::ExtraValue, "", i, std::nullopt, values[i].type()});
    }
    return report;
}

std::vector<ParameterValue> widen_to(const DataDictionary& dict, std::vector<ParameterValue> values) {
    for (std::size_t i = 0; i < values.size() && i < dict.fields.size(); ++i) {
        if (dict.fields[i].type == PrimitiveType::Float && values[i].type() == PrimitiveType::Int) {
            values[i] = ParameterValue::real(static_cast<double>(values[i].as_int()));
        }
    }
    return values;
}

} // namespace pndb
