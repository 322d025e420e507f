#include "pndb/store.hpp"

#include "pndb/evolution.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace pndb {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kManifestMagic = "PNDB-STORE-1";
constexpr const char* kManifest = "MANIFEST";
constexpr const char* kLog = "changelog.bin";
constexpr const char* kBlobDir = "blobs";
constexpr const char* kLock = "LOCK";

[[noreturn]] void io_error(const std::string& what) { throw Error(ErrorCode::IoError, what); }

[[noreturn]] void corrupt(const std::string& what) { throw Error(ErrorCode::CorruptStore, what); }

Bytes read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) io_error("cannot read " + path.string());
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void fsync_path(const fs::path& path) {
    int fd = ::open(path.c_str(), O_RDONLY);
    if (fd < 0) return;
    ::fsync(fd);
    ::close(fd);
}

// Writes via a temporary file and rename so readers never see a torn file.
void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> data, bool sync) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) io_error("cannot write " + tmp.string());
        out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
        out.flush();
        if (!out) io_error("short write to " + tmp.string());
    }
    if (sync) fsync_path(tmp);
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) io_error("cannot rename " + tmp.string() + ": " + ec.message());
    if (sync) fsync_path(path.parent_path());
}

StoreId random_store_id() {
    std::random_device rd;
    StoreId id{};
    for (auto& b : id) b = static_cast<std::uint8_t>(rd());
    return id;
}

fs::path blob_path(const fs::path& root, std::uint64_t id) { return root / kBlobDir / std::to_string(id); }

struct Manifest {
    SequenceNumber seq = 0;
    StoreId id{};
    StoreRole role = StoreRole::Primary;
    std::optional<StoreId> master;
};

std::string render_manifest(const Manifest& m) {
    std::ostringstream out;
    out << kManifestMagic << '\n';
    out << "seq " << m.seq << '\n';
    out << "store-id " << store_id_hex(m.id) << '\n';
    out << "role " << (m.role == StoreRole::Primary ? "primary" : "replica") << '\n';
    out << "master-id " << (m.master ? store_id_hex(*m.master) : std::string("none")) << '\n';
    return out.str();
}

Manifest parse_manifest(const fs::path& path) {
    auto bytes = read_file(path);
    std::istringstream in(std::string(bytes.begin(), bytes.end()));
    std::string line;
    if (!std::getline(in, line) || line != kManifestMagic) corrupt("MANIFEST has unknown format: " + line);
    Manifest m;
    bool have_seq = false;
    bool have_id = false;
    while (std::getline(in, line)) {
        auto space = line.find(' ');
        if (space == std::string::npos) continue;
        auto key = line.substr(0, space);
        auto value = line.substr(space + 1);
        if (key == "seq") {
            try {
                m.seq = std::stoull(value);
                have_seq = true;
            } catch (const std::exception&) {
                corrupt("MANIFEST seq is not a number");
            }
        } else if (key == "store-id") {
            auto id = store_id_from_hex(value);
            if (!id) corrupt("MANIFEST store-id is malformed");
            m.id = *id;
            have_id = true;
        } else if (key == "role") {
            if (value == "primary") m.role = StoreRole::Primary;
            else if (value == "replica") m.role = StoreRole::Replica;
            else corrupt("MANIFEST role is unknown: " + value);
        } else if (key == "master-id" && value != "none") {
            m.master = store_id_from_hex(value);
            if (!m.master) corrupt("MANIFEST master-id is malformed");
        }
    }
    if (!have_seq || !have_id) corrupt("MANIFEST is incomplete");
    return m;
}

} // namespace

std::string store_id_hex(const StoreId& id) { return to_hex(id); }

std::optional<StoreId> store_id_from_hex(std::string_view hex) {
    if (hex.size() != 32) return std::nullopt;
    // Reuse the digest parser by padding to 64 digits.
    auto padded = std::string(hex) + std::string(32, '0');
    auto digest = digest_from_hex(padded);
    if (!digest) return std::nullopt;
    StoreId id{};
    std::copy_n(digest->begin(), id.size(), id.begin());
    return id;
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

const std::vector<DataDictionary>& Catalog::dictionaries(std::string_view class_name) const {
    auto it = dictionaries_.find(class_name);
    if (it == dictionaries_.end()) throw Error(ErrorCode::UnknownClass, "class '" + std::string(class_name) + "'");
    return it->second;
}

const DataDictionary& Catalog::dictionary(std::string_view class_name, std::optional<std::uint32_t> version) const {
    const auto& chain = dictionaries(class_name);
    if (!version) return chain.back();
    if (*version == 0 || *version > chain.size()) {
        throw Error(ErrorCode::NotFound,
                    "class '" + std::string(class_name) + "' has no dictionary version " + std::to_string(*version));
    }
    return chain[*version - 1];
}

std::vector<ClassSummary> Catalog::classes() const {
    std::vector<ClassSummary> out;
    for (const auto& [name, chain] : dictionaries_) {
        ClassSummary s{name, static_cast<std::uint32_t>(chain.size()), 0};
        for (auto it = objects_.lower_bound(InstanceKey{name, ""}); it != objects_.end() && it->first.class_name == name;
             ++it) {
            ++s.instance_count;
        }
        out.push_back(std::move(s));
    }
    return out;
}

const std::vector<Catalog::StoredRevision>& Catalog::revisions(std::string_view class_name,
                                                               std::string_view instance_name) const {
    auto it = objects_.find(InstanceKey{std::string(class_name), std::string(instance_name)});
    if (it == objects_.end()) {
        throw Error(ErrorCode::NotFound, std::string(class_name) + "/" + std::string(instance_name));
    }
    return it->second;
}

CollectionInstance Catalog::get_object(std::string_view class_name, std::string_view instance_name,
                                       std::optional<std::uint32_t> version) const {
    const auto& revs = revisions(class_name, instance_name);
    std::uint32_t v = version.value_or(static_cast<std::uint32_t>(revs.size()));
    if (v == 0 || v > revs.size()) {
        throw Error(ErrorCode::NotFound,
                    std::string(class_name) + "/" + std::string(instance_name) + " version " + std::to_string(v));
    }
    const auto& rev = revs[v - 1];
    return CollectionInstance{std::string(class_name), std::string(instance_name), rev.revision.scope,
                              rev.revision.dict_version, rev.revision.object_version, rev.values};
}

std::optional<CollectionInstance> Catalog::latest_object(std::string_view class_name,
                                                         std::string_view instance_name) const {
    if (!objects_.contains(InstanceKey{std::string(class_name), std::string(instance_name)})) return std::nullopt;
    return get_object(class_name, instance_name);
}

std::vector<ObjectRevision> Catalog::object_versions(std::string_view class_name,
                                                     std::string_view instance_name) const {
    std::vector<ObjectRevision> out;
    for (const auto& rev : revisions(class_name, instance_name)) out.push_back(rev.revision);
    return out;
}

std::vector<CollectionInstance> Catalog::latest_objects(const std::optional<ScopePath>& under) const {
    std::vector<CollectionInstance> out;
    for (const auto& [scope, members] : scope_members_) {
        if (under && !(scope == *under)) {
            const auto& prefix = under->segments();
            const auto& segs = scope.segments();
            if (segs.size() < prefix.size() || !std::equal(prefix.begin(), prefix.end(), segs.begin())) continue;
        }
        for (const auto& key : members) out.push_back(get_object(key.class_name, key.instance_name));
    }
    return out;
}

ScopeListing Catalog::list_scope(const ScopePath& scope) const {
    ScopeListing out;
    std::set<ScopePath> children;
    const auto& prefix = scope.segments();
    for (const auto& [path, members] : scope_members_) {
        const auto& segs = path.segments();
        if (segs.size() <= prefix.size() || !std::equal(prefix.begin(), prefix.end(), segs.begin())) continue;
        children.insert(scope.child(segs[prefix.size()]));
    }
    out.children.assign(children.begin(), children.end());
    if (auto it = scope_members_.find(scope); it != scope_members_.end()) {
        out.instances.assign(it->second.begin(), it->second.end());
    }
    return out;
}

std::optional<BlobRef> Catalog::blob(std::uint64_t id) const {
    auto it = blobs_.find(id);
    if (it == blobs_.end()) return std::nullopt;
    return it->second;
}

std::optional<BlobRef> Catalog::blob_by_checksum(const Digest& checksum) const {
    auto it = blob_ids_.find(checksum);
    if (it == blob_ids_.end()) return std::nullopt;
    return blobs_.at(it->second);
}

std::vector<BlobRef> Catalog::blobs() const {
    std::vector<BlobRef> out;
    for (const auto& [_, ref] : blobs_) out.push_back(ref);
    return out;
}

void Catalog::apply(const ChangeRecord& record) {
    if (record.seq != seq_ + 1) {
        corrupt("change record seq " + std::to_string(record.seq) + " does not follow " + std::to_string(seq_));
    }
    try {
        switch (record.op) {
        case ChangeOp::PutDictionary: {
            auto dict = decode_dictionary(record.payload);
            auto& chain = dictionaries_[dict.class_name];
            if (dict.dict_version != chain.size() + 1) {
                if (chain.empty()) dictionaries_.erase(dict.class_name);
                corrupt("dictionary version gap for " + dict.class_name);
            }
            try {
                auto checked = make_dictionary(dict.class_name, dict.fields, dict.dict_version);
                if (!chain.empty()) diff_dictionaries(chain.back(), checked);
                chain.push_back(std::move(checked));
            } catch (...) {
                if (chain.empty()) dictionaries_.erase(dict.class_name);
                throw;
            }
            break;
        }
        case ChangeOp::PutObject: {
            auto obj = decode_object(record.payload);
            require_identifier(obj.instance_name, "instance name");
            const auto& chain = dictionaries(obj.class_name);
            if (obj.dict_version != chain.size()) corrupt("object not bound to the latest dictionary");
            InstanceKey key{obj.class_name, obj.instance_name};
            auto& revs = objects_[key];
            if (obj.object_version != revs.size() + 1) {
                if (revs.empty()) objects_.erase(key);
                corrupt("object version gap for " + obj.class_name + "/" + obj.instance_name);
            }
            CollectionInstance probe{obj.class_name, obj.instance_name, obj.scope, obj.dict_version,
                                     obj.object_version, obj.values};
            auto report = validate_collection(probe, chain.back());
            if (!report.ok() || !report.widened.empty()) {
                if (revs.empty()) objects_.erase(key);
                corrupt("stored values do not match dictionary: " + report.describe());
            }
            if (!revs.empty()) {
                auto& old_members = scope_members_[revs.back().revision.scope];
                old_members.erase(key);
                if (old_members.empty()) scope_members_.erase(revs.back().revision.scope);
            }
            scope_members_[obj.scope].insert(key);
            revs.push_back(StoredRevision{{obj.object_version, obj.dict_version, obj.scope, record.seq},
                                          std::move(obj.values)});
            break;
        }
        case ChangeOp::PutBlob: {
            auto blob = decode_blob(record.payload);
            if (blob.ref.id != blobs_.size() + 1) corrupt("blob id gap");
            if (sha256(blob.bytes) != blob.ref.checksum) corrupt("blob payload does not match its checksum");
            if (blob_ids_.contains(blob.ref.checksum)) corrupt("duplicate blob content");
            blobs_.emplace(blob.ref.id, blob.ref);
            blob_ids_.emplace(blob.ref.checksum, blob.ref.id);
            break;
        }
        case ChangeOp::CreateFolder: {
            auto f = decode_folder(record.payload);
            iov_.create_folder(std::move(f.path), std::move(f.description));
            break;
        }
        case ChangeOp::IovStore: {
            auto e = decode_iov_store(record.payload);
            iov_.store(e.folder, e.since, std::move(e.payload), record.seq);
            break;
        }
        case ChangeOp::TagHead: {
            auto t = decode_tag_head(record.payload);
            iov_.tag_head(t.folder, std::move(t.tag));
            break;
        }
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::CorruptStore) throw;
        corrupt("record " + std::to_string(record.seq) + " (" + std::string(change_op_name(record.op)) +
                ") rejected: " + e.what());
    }
    seq_ = record.seq;
}

// ---------------------------------------------------------------------------
// Transaction
// ---------------------------------------------------------------------------

void Transaction::append(ChangeOp op, Bytes payload) {
    ChangeRecord rec{working_->seq() + 1, op, std::move(payload)};
    working_->apply(rec);
    pending_.push_back(std::move(rec));
}

std::pair<std::string, std::uint32_t> Transaction::register_class(const std::string& class_name,
                                                                   std::vector<FieldSpec> fields) {
    auto dict = make_dictionary(class_name, std::move(fields));
    if (working_->has_class(class_name)) {
        const auto& latest = working_->dictionary(class_name);
        if (same_fields(latest, dict)) return {class_name, latest.dict_version};
        diff_dictionaries(latest, dict);
        dict.dict_version = latest.dict_version + 1;
    } else {
        dict.dict_version = 1;
    }
    auto version = dict.dict_version;
    append(ChangeOp::PutDictionary, encode_dictionary(dict));
    return {class_name, version};
}

ObjectRef Transaction::put_object(const std::string& class_name, const std::string& instance_name,
                                  const ScopePath& scope, std::vector<ParameterValue> values) {
    require_identifier(instance_name, "instance name");
    const auto& dict = working_->dictionary(class_name);
    CollectionInstance probe{class_name, instance_name, scope, dict.dict_version, 0, std::move(values)};
    auto report = validate_collection(probe, dict);
    if (!report.ok()) throw ValidationError(std::move(report));
    std::uint32_t object_version = 1;
    if (auto latest = working_->latest_object(class_name, instance_name)) object_version = latest->object_version + 1;
    ObjectPayload payload{class_name, instance_name, object_version, dict.dict_version, scope,
                          widen_to(dict, std::move(probe.values))};
    ObjectRef ref{class_name, instance_name, object_version, dict.dict_version};
    append(ChangeOp::PutObject, encode_object(payload));
    return ref;
}

BlobRef Transaction::put_blob(std::span<const std::uint8_t> bytes) {
    auto checksum = sha256(bytes);
    if (auto existing = working_->blob_by_checksum(checksum)) return *existing;
    BlobRef ref{working_->blobs().size() + 1, checksum, bytes.size()};
    append(ChangeOp::PutBlob, encode_blob(ref, bytes));
    return ref;
}

Folder Transaction::create_folder(const std::string& path, const std::string& description) {
    working_->iov().check_create_folder(path);
    append(ChangeOp::CreateFolder, encode_folder({path, description}));
    return Folder{path, description};
}

IovEntry Transaction::iov_store(const std::string& folder, Timestamp since, const std::string& payload) {
    working_->iov().check_store(folder, since);
    append(ChangeOp::IovStore, encode_iov_store({folder, since, payload}));
    return working_->iov().entries(folder, kHeadTag).back();
}

std::size_t Transaction::tag_head(const std::string& folder, const std::string& tag) {
    working_->iov().check_tag_head(folder, tag);
    append(ChangeOp::TagHead, encode_tag_head({folder, tag}));
    return working_->iov().entries(folder, tag).size();
}

// ---------------------------------------------------------------------------
// Store
// ---------------------------------------------------------------------------

void Store::init(const fs::path& root, StoreRole role) {
    std::error_code ec;
    fs::create_directories(root / kBlobDir, ec);
    if (ec) io_error("cannot create " + root.string() + ": " + ec.message());
    if (fs::exists(root / kManifest)) io_error("a store already exists at " + root.string());
    {
        std::ofstream log(root / kLog, std::ios::binary | std::ios::trunc);
        if (!log) io_error("cannot create change log in " + root.string());
    }
    Manifest m;
    m.id = random_store_id();
    m.role = role;
    auto text = render_manifest(m);
    write_file_atomic(root / kManifest, as_bytes(text), true);
}

std::unique_ptr<Store> Store::open(const fs::path& root, StoreMode mode, StoreOptions options) {
    std::unique_ptr<Store> store(new Store(root, mode, options));
    store->load();
    return store;
}

Store::Store(fs::path root, StoreMode mode, StoreOptions options)
    : root_(std::move(root)), mode_(mode), options_(options) {}

Store::~Store() {
    if (lock_fd_ >= 0) {
        ::flock(lock_fd_, LOCK_UN);
        ::close(lock_fd_);
    }
}

void Store::load() {
    if (!fs::exists(root_ / kManifest)) throw Error(ErrorCode::NotFound, "no store at " + root_.string());
    auto manifest = parse_manifest(root_ / kManifest);
    id_ = manifest.id;
    role_ = manifest.role;
    master_id_ = manifest.master;
    if (mode_ == StoreMode::ReadWrite && role_ == StoreRole::Replica) {
        throw Error(ErrorCode::ReadOnlyStore, "replica stores accept changes only through sync");
    }
    if (mode_ == StoreMode::Replica && role_ == StoreRole::Primary) {
        throw Error(ErrorCode::LocalMutationConflict, "store at " + root_.string() + " is a primary store");
    }
    if (mode_ != StoreMode::ReadOnly) {
        lock_fd_ = ::open((root_ / kLock).c_str(), O_RDWR | O_CREAT, 0644);
        if (lock_fd_ < 0) io_error("cannot open lock file in " + root_.string());
        if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
            ::close(lock_fd_);
            lock_fd_ = -1;
            throw Error(ErrorCode::StoreLocked, "another writer holds " + root_.string());
        }
    }

    auto bytes = read_file(root_ / kLog);
    ByteReader in(bytes, ErrorCode::CorruptStore);
    std::size_t committed_len = 0;
    Catalog loaded;
    while (log_.size() < manifest.seq) {
        if (in.done()) corrupt("change log ends before committed seq " + std::to_string(manifest.seq));
        auto rec = read_record(in);
        loaded.apply(rec);
        log_.push_back(std::move(rec));
        committed_len = in.offset();
    }
    if (!in.done() && mode_ != StoreMode::ReadOnly) {
        // Tail written by an interrupted commit; it was never acknowledged.
        fs::resize_file(root_ / kLog, committed_len);
    }
    publish(std::move(loaded));
    for (const auto& rec : log_) {
        if (rec.op != ChangeOp::PutBlob) continue;
        auto path = blob_path(root_, decode_blob(rec.payload).ref.id);
        if (mode_ != StoreMode::ReadOnly && !fs::exists(path)) {
            write_file_atomic(path, decode_blob(rec.payload).bytes, options_.fsync);
        }
    }
}

std::optional<StoreId> Store::master_id() const {
    std::lock_guard lock(state_mutex_);
    return master_id_;
}

StoreId Store::origin_id() const {
    std::lock_guard lock(state_mutex_);
    return master_id_.value_or(id_);
}

SequenceNumber Store::seq() const {
    return snapshot()->seq();
}

void Store::require_writable() const {
    if (failed_) io_error("store is unusable after a failed commit; reopen it");
    if (mode_ != StoreMode::ReadWrite) {
        throw Error(ErrorCode::ReadOnlyStore, "store at " + root_.string() + " does not accept local mutations");
    }
}

void Store::write_manifest(SequenceNumber seq) const {
    Manifest m{seq, id_, role_, master_id()};
    auto text = render_manifest(m);
    write_file_atomic(root_ / kManifest, as_bytes(text), options_.fsync);
}

void Store::commit(const std::vector<ChangeRecord>& records) {
    if (records.empty()) return;
    try {
        fs::create_directories(root_ / kBlobDir);
        ByteWriter framed;
        for (const auto& rec : records) {
            if (rec.op == ChangeOp::PutBlob) {
                auto blob = decode_blob(rec.payload);
                write_file_atomic(blob_path(root_, blob.ref.id), blob.bytes, options_.fsync);
            }
            write_record(framed, rec);
        }
        int fd = ::open((root_ / kLog).c_str(), O_WRONLY | O_APPEND);
        if (fd < 0) io_error("cannot open change log");
        const auto& data = framed.bytes();
        std::size_t written = 0;
        while (written < data.size()) {
            auto n = ::write(fd, data.data() + written, data.size() - written);
            if (n <= 0) {
                ::close(fd);
                io_error("short write to change log");
            }
            written += static_cast<std::size_t>(n);
        }
        if (options_.fsync) ::fsync(fd);
        ::close(fd);
        // The MANIFEST seq is the commit point.
        write_manifest(records.back().seq);
    } catch (...) {
        failed_ = true;
        throw;
    }
    std::lock_guard lock(state_mutex_);
    log_.insert(log_.end(), records.begin(), records.end());
}

std::pair<std::string, std::uint32_t> Store::register_class(const std::string& class_name,
                                                             std::vector<FieldSpec> fields) {
    return mutate([&](Transaction& txn) { return txn.register_class(class_name, std::move(fields)); });
}

ObjectRef Store::put_object(const std::string& class_name, const std::string& instance_name, const ScopePath& scope,
                            std::vector<ParameterValue> values) {
    return mutate([&](Transaction& txn) { return txn.put_object(class_name, instance_name, scope, std::move(values)); });
}

BlobRef Store::put_blob(std::span<const std::uint8_t> bytes) {
    return mutate([&](Transaction& txn) { return txn.put_blob(bytes); });
}

Folder Store::create_folder(const std::string& path, const std::string& description) {
    return mutate([&](Transaction& txn) { return txn.create_folder(path, description); });
}

IovEntry Store::iov_store(const std::string& folder, Timestamp since, const std::string& payload) {
    return mutate([&](Transaction& txn) { return txn.iov_store(folder, since, payload); });
}

std::size_t Store::tag_head(const std::string& folder, const std::string& tag) {
    return mutate([&](Transaction& txn) { return txn.tag_head(folder, tag); });
}

CollectionInstance Store::get_object(const std::string& class_name, const std::string& instance_name,
                                     std::optional<std::uint32_t> version) const {
    return read([&](const Catalog& c) { return c.get_object(class_name, instance_name, version); });
}

std::vector<ObjectRevision> Store::object_versions(const std::string& class_name,
                                                   const std::string& instance_name) const {
    return read([&](const Catalog& c) { return c.object_versions(class_name, instance_name); });
}

ScopeListing Store::list_scope(const ScopePath& scope) const {
    return read([&](const Catalog& c) { return c.list_scope(scope); });
}

DataDictionary Store::dictionary(const std::string& class_name, std::optional<std::uint32_t> version) const {
    return read([&](const Catalog& c) { return c.dictionary(class_name, version); });
}

std::vector<DataDictionary> Store::dictionaries(const std::string& class_name) const {
    return read([&](const Catalog& c) { return c.dictionaries(class_name); });
}

std::vector<ClassSummary> Store::classes() const {
    return read([&](const Catalog& c) { return c.classes(); });
}

std::optional<BlobRef> Store::blob_info(std::uint64_t id) const {
    return read([&](const Catalog& c) { return c.blob(id); });
}

Bytes Store::read_blob_file(const BlobRef& ref) const {
    auto path = blob_path(root_, ref.id);
    if (!fs::exists(path)) throw Error(ErrorCode::NotFound, "blob " + std::to_string(ref.id) + " has no data file");
    auto bytes = read_file(path);
    if (bytes.size() != ref.length || sha256(bytes) != ref.checksum) {
        throw Error(ErrorCode::ChecksumMismatch, "blob " + std::to_string(ref.id) + " failed verification");
    }
    return bytes;
}

Bytes Store::get_blob(std::uint64_t id) const {
    auto ref = blob_info(id);
    if (!ref) throw Error(ErrorCode::NotFound, "blob " + std::to_string(id));
    return read_blob_file(*ref);
}

Bytes Store::get_blob(const BlobKey& key) const {
    auto ref = blob_info(key.id);
    if (!ref || ref->checksum != key.checksum) throw Error(ErrorCode::NotFound, render_blob_key(key));
    return read_blob_file(*ref);
}

std::string Store::iov_resolve(const std::string& folder, const std::string& tag, Timestamp t) const {
    return read([&](const Catalog& c) { return c.iov().resolve(folder, tag, t); });
}

std::vector<IovEntry> Store::iov_list(const std::string& folder, const std::string& tag) const {
    return read([&](const Catalog& c) { return c.iov().entries(folder, tag); });
}

std::vector<Folder> Store::folders() const {
    return read([&](const Catalog& c) { return c.iov().folders(); });
}

std::vector<std::string> Store::folder_tags(const std::string& folder) const {
    return read([&](const Catalog& c) { return c.iov().tags(folder); });
}

std::vector<ChangeRecord> Store::changes_since(SequenceNumber since) const {
    std::lock_guard lock(state_mutex_);
    if (since > log_.size()) {
        throw Error(ErrorCode::FutureSequence,
                    "since " + std::to_string(since) + " is beyond current seq " + std::to_string(log_.size()));
    }
    return {log_.begin() + static_cast<std::ptrdiff_t>(since), log_.end()};
}

SequenceNumber Store::apply_records(const StoreId& source, SequenceNumber from_seq, SequenceNumber to_seq,
                                    const std::vector<ChangeRecord>& records) {
    std::lock_guard lock(write_mutex_);
    auto current = snapshot();
    if (failed_) io_error("store is unusable after a failed commit; reopen it");
    if (mode_ != StoreMode::Replica) {
        throw Error(ErrorCode::LocalMutationConflict, "changesets apply only to stores opened in Replica mode");
    }
    auto master = master_id();
    if (master && *master != source) {
        throw Error(ErrorCode::WrongMaster, "changeset from " + store_id_hex(source) + ", replica follows " +
                                                store_id_hex(*master));
    }
    if (from_seq != current->seq()) {
        throw Error(ErrorCode::NonContiguous,
                    "expected from_seq " + std::to_string(current->seq()) + ", got " + std::to_string(from_seq));
    }
    if (to_seq - from_seq != records.size()) {
        throw Error(ErrorCode::MalformedChangeset, "record count does not match the sequence range");
    }
    Catalog working = *current;
    for (const auto& rec : records) working.apply(rec);
    bool adopt = !master;
    auto set_master = [&](std::optional<StoreId> id) {
        std::lock_guard state(state_mutex_);
        master_id_ = id;
    };
    if (adopt) set_master(source);
    try {
        if (records.empty()) {
            if (adopt) write_manifest(current->seq());
        } else {
            commit(records);
            publish(std::move(working));
        }
    } catch (...) {
        if (adopt) set_master(std::nullopt);
        throw;
    }
    return snapshot()->seq();
}

} // namespace pndb
