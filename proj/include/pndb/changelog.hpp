#pragma once

// Change records and their canonical binary serialization. The same framing
// is used by the on-disk change log and by replication changesets:
//
//   record  := seq:u64be op:u8 length:u32be payload[length]
//   string  := length:u32be bytes
//   value   := type:u8 literal:string          (canonical literal text)
//
// Payloads per op:
//   PutDictionary  class:string dict_version:u32be count:u32be
//                  { name:string type:u8 unit:string comment:string
//                    has_default:u8 [default:string] }*
//   PutObject      class:string instance:string object_version:u32be
//                  dict_version:u32be scope:string count:u32be value*
//   PutBlob        id:u64be checksum[32] length:u64be bytes[length]
//   CreateFolder   path:string description:string
//   IovStore       folder:string since:u64be payload:string
//   TagHead        folder:string tag:string

#include "pndb/digest.hpp"
#include "pndb/error.hpp"
#include "pndb/model.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pndb {

enum class ChangeOp : std::uint8_t {
    PutDictionary = 1,
    PutObject = 2,
    PutBlob = 3,
    CreateFolder = 4,
    IovStore = 5,
    TagHead = 6,
};

std::string_view change_op_name(ChangeOp op) noexcept;

struct ChangeRecord {
    std::uint64_t seq = 0;
    ChangeOp op = ChangeOp::PutDictionary;
    Bytes payload;

    bool operator==(const ChangeRecord&) const = default;
};

class ByteWriter {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void raw(std::span<const std::uint8_t> bytes) { out_.insert(out_.end(), bytes.begin(), bytes.end()); }
    void str(std::string_view s);

    const Bytes& bytes() const noexcept { return out_; }
    Bytes take() { return std::move(out_); }

private:
    Bytes out_;
};

/// Bounds-checked reader; every short read throws `error` (MalformedChangeset
/// by default, CorruptStore when reading the local log).
class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> data, ErrorCode error = ErrorCode::MalformedChangeset)
        : data_(data), error_(error) {}

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    std::span<const std::uint8_t> raw(std::size_t n);
    std::string str();

    std::size_t offset() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return data_.size() - pos_; }
    bool done() const noexcept { return pos_ == data_.size(); }
    [[noreturn]] void fail(const std::string& what) const;

private:
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
    ErrorCode error_;
};

void write_record(ByteWriter& out, const ChangeRecord& record);
ChangeRecord read_record(ByteReader& in);

struct ObjectPayload {
    std::string class_name;
    std::string instance_name;
    std::uint32_t object_version = 0;
    std::uint32_t dict_version = 0;
    ScopePath scope;
    std::vector<ParameterValue> values;
};

struct BlobPayload {
    BlobRef ref;
    Bytes bytes;
};

struct FolderPayload {
    std::string path;
    std::string description;
};

struct IovStorePayload {
    std::string folder;
    std::uint64_t since = 0;
    std::string payload;
};

struct TagHeadPayload {
    std::string folder;
    std::string tag;
};

Bytes encode_dictionary(const DataDictionary& dict);
Bytes encode_object(const ObjectPayload& obj);
Bytes encode_blob(const BlobRef& ref, std::span<const std::uint8_t> bytes);
Bytes encode_folder(const FolderPayload& folder);
Bytes encode_iov_store(const IovStorePayload& entry);
Bytes encode_tag_head(const TagHeadPayload& tag);

DataDictionary decode_dictionary(std::span<const std::uint8_t> payload);
ObjectPayload decode_object(std::span<const std::uint8_t> payload);
BlobPayload decode_blob(std::span<const std::uint8_t> payload);
FolderPayload decode_folder(std::span<const std::uint8_t> payload);
IovStorePayload decode_iov_store(std::span<const std::uint8_t> payload);
TagHeadPayload decode_tag_head(std::span<const std::uint8_t> payload);

} // namespace pndb
