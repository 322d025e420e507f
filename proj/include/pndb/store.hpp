#pragma once

// Versioned object store. A store is a directory:
//
//   MANIFEST       "PNDB-STORE-1", committed seq, store id, role, master id
//   changelog.bin  append-only change records (see changelog.hpp)
//   blobs/<id>     blob bytes, verified against their SHA-256 on every read
//   LOCK           flock()ed by the single writer
//
// The in-memory Catalog is rebuilt on open by replaying the change log, and
// every live mutation goes through the same replay step.

#include "pndb/changelog.hpp"
#include "pndb/iov.hpp"
#include "pndb/model.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <mutex>
#include <set>
#include <memory>
#include <mutex>
#include <utility>

namespace pndb {

using StoreId = std::array<std::uint8_t, 16>;
using SequenceNumber = std::uint64_t;

enum class StoreRole { Primary, Replica };

enum class StoreMode {
    ReadWrite, // primary store, single writer
    ReadOnly,  // any store, snapshot taken at open
    Replica,   // replica store; only apply_records mutates
};

struct StoreOptions {
    bool fsync = true;
};

struct ObjectRef {
    std::string class_name;
    std::string instance_name;
    std::uint32_t object_version = 0;
    std::uint32_t dict_version = 0;

    bool operator==(const ObjectRef&) const = default;
};

struct ObjectRevision {
    std::uint32_t object_version = 0;
    std::uint32_t dict_version = 0;
    ScopePath scope;
    SequenceNumber created_seq = 0;

    bool operator==(const ObjectRevision&) const = default;
};

struct InstanceKey {
    std::string class_name;
    std::string instance_name;

    auto operator<=>(const InstanceKey&) const = default;
};

struct ScopeListing {
    std::vector<ScopePath> children;
    std::vector<InstanceKey> instances;

    bool operator==(const ScopeListing&) const = default;
};

struct ClassSummary {
    std::string class_name;
    std::uint32_t latest_dict_version = 0;
    std::size_t instance_count = 0;

    bool operator==(const ClassSummary&) const = default;
};

/// Read-side view of one store state. Every Store read goes through a
/// Catalog under the store's shared lock.
class Catalog {
public:
    SequenceNumber seq() const noexcept { return seq_; }

    const DataDictionary& dictionary(std::string_view class_name, std::optional<std::uint32_t> version = {}) const;
    const std::vector<DataDictionary>& dictionaries(std::string_view class_name) const;
    bool has_class(std::string_view class_name) const noexcept { return dictionaries_.contains(class_name); }
    std::vector<ClassSummary> classes() const;

    CollectionInstance get_object(std::string_view class_name, std::string_view instance_name,
                                  std::optional<std::uint32_t> version = {}) const;
    std::optional<CollectionInstance> latest_object(std::string_view class_name,
                                                    std::string_view instance_name) const;
    std::vector<ObjectRevision> object_versions(std::string_view class_name, std::string_view instance_name) const;
    /// Latest revision of every instance, ordered by (scope, class, instance);
    /// with a filter, only instances at or below that scope.
    std::vector<CollectionInstance> latest_objects(const std::optional<ScopePath>& under = {}) const;
    ScopeListing list_scope(const ScopePath& scope) const;

    std::optional<BlobRef> blob(std::uint64_t id) const;
    std::optional<BlobRef> blob_by_checksum(const Digest& checksum) const;
    std::vector<BlobRef> blobs() const;

    const IovIndex& iov() const noexcept { return iov_; }

    /// Replays one record. Throws CorruptStore when the record does not fit
    /// the current state (wrong seq, version gaps, invalid values).
    void apply(const ChangeRecord& record);

    bool operator==(const Catalog&) const = default;

private:
    struct StoredRevision {
        ObjectRevision revision;
        std::vector<ParameterValue> values;
        bool operator==(const StoredRevision&) const = default;
    };

    SequenceNumber seq_ = 0;
    std::map<std::string, std::vector<DataDictionary>, std::less<>> dictionaries_;
    std::map<InstanceKey, std::vector<StoredRevision>> objects_;
    std::map<ScopePath, std::set<InstanceKey>> scope_members_;
    std::map<std::uint64_t, BlobRef> blobs_;
    std::map<Digest, std::uint64_t> blob_ids_;
    IovIndex iov_;

    const std::vector<StoredRevision>& revisions(std::string_view class_name, std::string_view instance_name) const;
};

/// Staged mutations. Operations validate against the staged state and fail
/// without side effects; nothing is persisted until the owning Store commits.
class Transaction {
public:
    /// Returns (class, dict_version). Re-registering the latest field list
    /// is a no-op; otherwise the change must pass diff_dictionaries.
    std::pair<std::string, std::uint32_t> register_class(const std::string& class_name,
                                                          std::vector<FieldSpec> fields);
    ObjectRef put_object(const std::string& class_name, const std::string& instance_name, const ScopePath& scope,
                         std::vector<ParameterValue> values);
    BlobRef put_blob(std::span<const std::uint8_t> bytes);
    Folder create_folder(const std::string& path, const std::string& description);
    IovEntry iov_store(const std::string& folder, Timestamp since, const std::string& payload);
    std::size_t tag_head(const std::string& folder, const std::string& tag);

    const Catalog& view() const noexcept { return *working_; }
    const std::vector<ChangeRecord>& pending() const noexcept { return pending_; }

private:
    friend class Store;
    explicit Transaction(Catalog& working) : working_(&working) {}

    void append(ChangeOp op, Bytes payload);

    Catalog* working_;
    std::vector<ChangeRecord> pending_;
};

class Store {
public:
    /// Creates an empty store directory. Throws IoError if a store exists.
    static void init(const std::filesystem::path& root, StoreRole role = StoreRole::Primary);
    static std::unique_ptr<Store> open(const std::filesystem::path& root, StoreMode mode, StoreOptions options = {});

    ~Store();
    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    const std::filesystem::path& root() const noexcept { return root_; }
    StoreMode mode() const noexcept { return mode_; }
    StoreRole role() const noexcept { return role_; }
    const StoreId& id() const noexcept { return id_; }
    std::optional<StoreId> master_id() const;
    /// Source id written into changesets: this store's id, or the origin
    /// master's id for a replica.
    StoreId origin_id() const;
    SequenceNumber seq() const;

    // Mutations (ReadWrite only).
    std::pair<std::string, std::uint32_t> register_class(const std::string& class_name, std::vector<FieldSpec> fields);
    ObjectRef put_object(const std::string& class_name, const std::string& instance_name, const ScopePath& scope,
                         std::vector<ParameterValue> values);
    BlobRef put_blob(std::span<const std::uint8_t> bytes);
    Folder create_folder(const std::string& path, const std::string& description);
    IovEntry iov_store(const std::string& folder, Timestamp since, const std::string& payload);
    std::size_t tag_head(const std::string& folder, const std::string& tag);

    /// Runs `fn(Transaction&)` against a copy of the state and commits all of
    /// its records atomically, or nothing if `fn` throws.
    template <typename F>
    auto transact(F&& fn) {
        std::lock_guard lock(write_mutex_);
        require_writable();
        Catalog working = *snapshot();
        Transaction txn(working);
        if constexpr (std::is_void_v<decltype(fn(txn))>) {
            fn(txn);
            commit(txn.pending_);
            publish(std::move(working));
        } else {
            auto result = fn(txn);
            commit(txn.pending_);
            publish(std::move(working));
            return result;
        }
    }

    // Reads.
    CollectionInstance get_object(const std::string& class_name, const std::string& instance_name,
                                  std::optional<std::uint32_t> version = {}) const;
    std::vector<ObjectRevision> object_versions(const std::string& class_name, const std::string& instance_name) const;
    ScopeListing list_scope(const ScopePath& scope) const;
    DataDictionary dictionary(const std::string& class_name, std::optional<std::uint32_t> version = {}) const;
    std::vector<DataDictionary> dictionaries(const std::string& class_name) const;
    std::vector<ClassSummary> classes() const;
    /// Verifies the stored bytes against the checksum. Errors: NotFound,
    /// ChecksumMismatch.
    Bytes get_blob(const BlobKey& key) const;
    Bytes get_blob(std::uint64_t id) const;
    std::optional<BlobRef> blob_info(std::uint64_t id) const;
    std::string iov_resolve(const std::string& folder, const std::string& tag, Timestamp t) const;
    std::vector<IovEntry> iov_list(const std::string& folder, const std::string& tag) const;
    std::vector<Folder> folders() const;
    std::vector<std::string> folder_tags(const std::string& folder) const;

    /// Runs `fn(const Catalog&)` on one consistent snapshot. Readers never
    /// wait for a writer; a writer publishes a new snapshot when it commits.
    template <typename F>
    auto read(F&& fn) const {
        auto snap = snapshot();
        return fn(*snap);
    }

    /// Records (since, seq]. Errors: FutureSequence.
    std::vector<ChangeRecord> changes_since(SequenceNumber since) const;

    /// Replica-side replay of a verified record range. The caller (sync)
    /// checks the changeset trailer; this checks role, master and
    /// contiguity. Returns the new seq.
    SequenceNumber apply_records(const StoreId& source, SequenceNumber from_seq, SequenceNumber to_seq,
                                 const std::vector<ChangeRecord>& records);

private:
    Store(std::filesystem::path root, StoreMode mode, StoreOptions options);

    void load();
    void require_writable() const;
    void commit(const std::vector<ChangeRecord>& records);
    void write_manifest(SequenceNumber seq) const;
    Bytes read_blob_file(const BlobRef& ref) const;

    std::shared_ptr<const Catalog> snapshot() const {
        std::lock_guard lock(state_mutex_);
        return catalog_;
    }
    void publish(Catalog next) {
        auto p = std::make_shared<const Catalog>(std::move(next));
        std::lock_guard lock(state_mutex_);
        catalog_ = std::move(p);
    }

    template <typename F>
    auto mutate(F&& fn) {
        std::lock_guard lock(write_mutex_);
        require_writable();
        Catalog working = *snapshot();
        Transaction txn(working);
        auto result = fn(txn);
        commit(txn.pending_);
        publish(std::move(working));
        return result;
    }

    std::filesystem::path root_;
    StoreMode mode_;
    StoreRole role_ = StoreRole::Primary;
    StoreOptions options_;
    StoreId id_{};
    std::optional<StoreId> master_id_;
    int lock_fd_ = -1;
    bool failed_ = false;

    // write_mutex_ serializes writers; state_mutex_ guards the published
    // snapshot, log_ and master_id_ for the few instructions they take.
    std::mutex write_mutex_;
    mutable std::mutex state_mutex_;
    std::shared_ptr<const Catalog> catalog_ = std::make_shared<const Catalog>();
    std::vector<ChangeRecord> log_;
};

std::string store_id_hex(const StoreId& id);
std::optional<StoreId> store_id_from_hex(std::string_view hex);

} // namespace pndb
