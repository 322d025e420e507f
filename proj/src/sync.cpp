#include "pndb/sync.hpp"

#include <algorithm>

namespace pndb {

namespace {
constexpr std::size_t kHeaderSize = kChangesetMagic.size() + 16 + 8 * 3;
constexpr std::size_t kTrailerSize = 32;
} // namespace

Bytes serialize_changeset(const Changeset& cs) {
    ByteWriter out;
    out.raw(as_bytes(kChangesetMagic));
    out.raw(cs.source);
    out.u64(cs.from_seq);
    out.u64(cs.to_seq);
    out.u64(cs.records.size());
    for (const auto& rec : cs.records) write_record(out, rec);
    auto digest = sha256(out.bytes());
    out.raw(digest);
    return out.take();
}

Changeset parse_changeset(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kHeaderSize + kTrailerSize) {
        throw Error(ErrorCode::MalformedChangeset, "changeset is too short");
    }
    auto body = bytes.first(bytes.size() - kTrailerSize);
    auto trailer = bytes.last(kTrailerSize);
    auto digest = sha256(body);
    if (!std::equal(digest.begin(), digest.end(), trailer.begin())) {
        throw Error(ErrorCode::ChecksumMismatch, "changeset trailer does not match its contents");
    }
    ByteReader in(body);
    auto magic = in.raw(kChangesetMagic.size());
    if (!std::equal(magic.begin(), magic.end(), as_bytes(kChangesetMagic).begin())) {
        throw Error(ErrorCode::MalformedChangeset, "bad changeset magic");
    }
    Changeset cs;
    auto id = in.raw(16);
    std::copy(id.begin(), id.end(), cs.source.begin());
    cs.from_seq = in.u64();
    cs.to_seq = in.u64();
    auto count = in.u64();
    if (cs.to_seq < cs.from_seq || cs.to_seq - cs.from_seq != count) {
        in.fail("record count does not match the sequence range");
    }
    for (std::uint64_t i = 0; i < count; ++i) {
        auto rec = read_record(in);
        if (rec.seq != cs.from_seq + i + 1) in.fail("records are not dense in seq");
        cs.records.push_back(std::move(rec));
    }
    if (!in.done()) in.fail("trailing bytes before the trailer");
    return cs;
}

Changeset export_changes(const Store& master, SequenceNumber since) {
    Changeset cs;
    cs.source = master.origin_id();
    cs.records = master.changes_since(since);
    cs.from_seq = since;
    cs.to_seq = since + cs.records.size();
    return cs;
}

SequenceNumber apply_changes(Store& replica, const Changeset& cs) {
    return replica.apply_records(cs.source, cs.from_seq, cs.to_seq, cs.records);
}

SequenceNumber apply_changes(Store& replica, std::span<const std::uint8_t> changeset_bytes) {
    return apply_changes(replica, parse_changeset(changeset_bytes));
}

} // namespace pndb
