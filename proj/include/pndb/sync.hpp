#pragma once

// One-way master -> replica replication. A changeset is a contiguous slice
// of the master's change log:
//
//   "PNDB-SYNC-1\n" source_id[16] from_seq:u64be to_seq:u64be count:u64be
//   record*  (seq:u64be op:u8 length:u32be payload)
//   sha256[32] over every preceding byte

#include "pndb/store.hpp"

namespace pndb {

inline constexpr std::string_view kChangesetMagic = "PNDB-SYNC-1\n";

struct Changeset {
    StoreId source{};
    SequenceNumber from_seq = 0;
    SequenceNumber to_seq = 0;
    std::vector<ChangeRecord> records;

    bool operator==(const Changeset&) const = default;
};

Bytes serialize_changeset(const Changeset& cs);

/// Verifies the trailer before looking at anything else, so any corrupted
/// byte surfaces as ChecksumMismatch. Structural errors: MalformedChangeset.
Changeset parse_changeset(std::span<const std::uint8_t> bytes);

/// Records (since, current]. Errors: FutureSequence.
Changeset export_changes(const Store& master, SequenceNumber since);

/// Errors: WrongMaster, NonContiguous, LocalMutationConflict, CorruptStore.
SequenceNumber apply_changes(Store& replica, const Changeset& cs);
SequenceNumber apply_changes(Store& replica, std::span<const std::uint8_t> changeset_bytes);

} // namespace pndb
