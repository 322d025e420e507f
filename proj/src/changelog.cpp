#include "pndb/changelog.hpp"

namespace pndb {

std::string_view change_op_name(ChangeOp op) noexcept {
    switch (op) {
    case ChangeOp::PutDictionary: return "PutDictionary";
    case ChangeOp::PutObject: return "PutObject";
    case ChangeOp::PutBlob: return "PutBlob";
    case ChangeOp::CreateFolder: return "CreateFolder";
    case ChangeOp::IovStore: return "IovStore";
    case ChangeOp::TagHead: return "TagHead";
    }
    return "Unknown";
}

void ByteWriter::u32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::u64(std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(as_bytes(s));
}

void ByteReader::fail(const std::string& what) const {
    throw Error(error_, what + " at offset " + std::to_string(pos_));
}

std::span<const std::uint8_t> ByteReader::raw(std::size_t n) {
    if (n > remaining()) fail("truncated input");
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
}

std::uint8_t ByteReader::u8() { return raw(1)[0]; }

std::uint32_t ByteReader::u32() {
    std::uint32_t v = 0;
    for (auto b : raw(4)) v = v << 8 | b;
    return v;
}

std::uint64_t ByteReader::u64() {
    std::uint64_t v = 0;
    for (auto b : raw(8)) v = v << 8 | b;
    return v;
}

std::string ByteReader::str() {
    auto n = u32();
    auto bytes = raw(n);
    return {reinterpret_cast<const char*>(bytes.data()), bytes.size()};
}

void write_record(ByteWriter& out, const ChangeRecord& record) {
    out.u64(record.seq);
    out.u8(static_cast<std::uint8_t>(record.op));
    out.u32(static_cast<std::uint32_t>(record.payload.size()));
    out.raw(record.payload);
}

ChangeRecord read_record(ByteReader& in) {
    ChangeRecord rec;
    rec.seq = in.u64();
    auto op = in.u8();
    if (op < 1 || op > 6) in.fail("unknown change op " + std::to_string(op));
    rec.op = static_cast<ChangeOp>(op);
    auto len = in.u32();
    auto payload = in.raw(len);
    rec.payload.assign(payload.begin(), payload.end());
    return rec;
}

namespace {

void write_value(ByteWriter& out, const ParameterValue& v) {
    out.u8(static_cast<std::uint8_t>(v.type()));
    out.str(render(v));
}

ParameterValue read_value(ByteReader& in) {
    auto tag = in.u8();
    if (tag > static_cast<std::uint8_t>(PrimitiveType::StringArray)) in.fail("unknown value type");
    auto literal = in.str();
    try {
        return parse_literal(static_cast<PrimitiveType>(tag), literal);
    } catch (const Error& e) {
        in.fail(std::string("bad value literal: ") + e.what());
    }
}

void expect_done(const ByteReader& in) {
    if (!in.done()) in.fail("trailing bytes in payload");
}

} // namespace

Bytes encode_dictionary(const DataDictionary& dict) {
    ByteWriter out;
    out.str(dict.class_name);
    out.u32(dict.dict_version);
    out.u32(static_cast<std::uint32_t>(dict.fields.size()));
    for (const auto& f : dict.fields) {
        out.str(f.name);
        out.u8(static_cast<std::uint8_t>(f.type));
        out.str(f.unit);
        out.str(f.comment);
        out.u8(f.default_value ? 1 : 0);
        if (f.default_value) out.str(render(*f.default_value));
    }
    return out.take();
}

DataDictionary decode_dictionary(std::span<const std::uint8_t> payload) {
    ByteReader in(payload);
    DataDictionary dict;
    dict.class_name = in.str();
    dict.dict_version = in.u32();
    auto count = in.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
        FieldSpec f;
        f.name = in.str();
        auto tag = in.u8();
        if (tag > static_cast<std::uint8_t>(PrimitiveType::StringArray)) in.fail("unknown field type");
        f.type = static_cast<PrimitiveType>(tag);
        f.unit = in.str();
        f.comment = in.str();
        if (in.u8() != 0) {
            auto literal = in.str();
            try {
                f.default_value = parse_literal(f.type, literal);
            } catch (const Error& e) {
                in.fail(std::string("bad default literal: ") + e.what());
            }
        }
        f.index = i;
        dict.fields.push_back(std::move(f));
    }
    expect_done(in);
    return dict;
}

Bytes encode_object(const ObjectPayload& obj) {
    ByteWriter out;
    out.str(obj.class_name);
    out.str(obj.instance_name);
    out.u32(obj.object_version);
    out.u32(obj.dict_version);
    out.str(obj.scope.canonical());
    out.u32(static_cast<std::uint32_t>(obj.values.size()));
    for (const auto& v : obj.values) write_value(out, v);
    return out.take();
}

ObjectPayload decode_object(std::span<const std::uint8_t> payload) {
    ByteReader in(payload);
    ObjectPayload obj;
    obj.class_name = in.str();
    obj.instance_name = in.str();
    obj.object_version = in.u32();
    obj.dict_version = in.u32();
    auto scope = in.str();
    try {
        obj.scope = ScopePath::parse(scope);
    } catch (const Error& e) {
        in.fail(e.what());
    }
    auto count = in.u32();
    if (count > in.remaining()) in.fail("value count exceeds payload");
    obj.values.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) obj.values.push_back(read_value(in));
    expect_done(in);
    return obj;
}

Bytes encode_blob(const BlobRef& ref, std::span<const std::uint8_t> bytes) {
    ByteWriter out;
    out.u64(ref.id);
    out.raw(ref.checksum);
    out.u64(ref.length);
    out.raw(bytes);
    return out.take();
}

BlobPayload decode_blob(std::span<const std::uint8_t> payload) {
    ByteReader in(payload);
    BlobPayload blob;
    blob.ref.id = in.u64();
    auto sum = in.raw(32);
    std::copy(sum.begin(), sum.end(), blob.ref.checksum.begin());
    blob.ref.length = in.u64();
    auto bytes = in.raw(blob.ref.length);
    blob.bytes.assign(bytes.begin(), bytes.end());
    expect_done(in);
    return blob;
}

Bytes encode_folder(const FolderPayload& folder) {
    ByteWriter out;
    out.str(folder.path);
    out.str(folder.description);
    return out.take();
}

FolderPayload decode_folder(std::span<const std::uint8_t> payload) {
    ByteReader in(payload);
    FolderPayload f;
    f.path = in.str();
    f.description = in.str();
    expect_done(in);
    return f;
}

Bytes encode_iov_store(const IovStorePayload& entry) {
    ByteWriter out;
    out.str(entry.folder);
    out.u64(entry.since);
    out.str(entry.payload);
    return out.take();
}

IovStorePayload decode_iov_store(std::span<const std::uint8_t> payload) {
    ByteReader in(payload);
    IovStorePayload e;
    e.folder = in.str();
    e.since = in.u64();
    e.payload = in.str();
    expect_done(in);
    return e;
}

Bytes encode_tag_head(const TagHeadPayload& tag) {
    ByteWriter out;
    out.str(tag.folder);
    out.str(tag.tag);
    return out.take();
}

TagHeadPayload decode_tag_head(std::span<const std::uint8_t> payload) {
    ByteReader in(payload);
    TagHeadPayload t;
    t.folder = in.str();
    t.tag = in.str();
    expect_done(in);
    return t;
}

} // namespace pndb
