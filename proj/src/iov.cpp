#include "pndb/iov.hpp"

#include "pndb/model.hpp"
#include "pndb/store.hpp"

#include <algorithm>

namespace pndb {

bool is_folder_path(std::string_view path) noexcept {
    if (path.empty()) return false;
    std::size_t start = 0;
    while (true) {
        auto slash = path.find('/', start);
        auto seg = path.substr(start, slash == std::string_view::npos ? path.size() - start : slash - start);
        if (!is_identifier(seg)) return false;
        if (slash == std::string_view::npos) return true;
        start = slash + 1;
    }
}

void IovIndex::check_create_folder(std::string_view path) const {
    if (!is_folder_path(path)) throw Error(ErrorCode::MalformedPath, "bad folder path '" + std::string(path) + "'");
    if (folders_.contains(path)) throw Error(ErrorCode::DuplicateFolder, "folder '" + std::string(path) + "' exists");
}

const Folder& IovIndex::create_folder(std::string path, std::string description) {
    check_create_folder(path);
    FolderState state;
    state.folder = Folder{path, std::move(description)};
    state.tags[std::string(kHeadTag)];
    auto [it, _] = folders_.emplace(std::move(path), std::move(state));
    return it->second.folder;
}

const IovIndex::FolderState& IovIndex::folder_state(std::string_view folder) const {
    auto it = folders_.find(folder);
    if (it == folders_.end()) throw Error(ErrorCode::UnknownFolder, "no folder '" + std::string(folder) + "'");
    return it->second;
}

void IovIndex::check_store(std::string_view folder, Timestamp since) const {
    const auto& head = folder_state(folder).tags.find(kHeadTag)->second;
    if (since == kInfinity) throw Error(ErrorCode::InvalidInterval, "since must be below the open upper bound");
    if (!head.empty() && since <= head.back().interval.since) {
        throw Error(ErrorCode::NonMonotonicSince, "since " + std::to_string(since) + " is not after " +
                                                      std::to_string(head.back().interval.since));
    }
}

const IovEntry& IovIndex::store(std::string_view folder, Timestamp since, std::string payload, std::uint64_t seq) {
    check_store(folder, since);
    auto& head = folders_.find(folder)->second.tags.find(kHeadTag)->second;
    if (!head.empty()) head.back().interval.until = since;
    head.push_back(IovEntry{std::string(folder), std::string(kHeadTag), {since, kInfinity}, std::move(payload), seq});
    return head.back();
}

void IovIndex::check_tag_head(std::string_view folder, std::string_view tag) const {
    const auto& state = folder_state(folder);
    if (tag == kHeadTag) throw Error(ErrorCode::ReservedTagName, "HEAD is reserved");
    if (tag.empty()) throw Error(ErrorCode::BadRequest, "tag name must not be empty");
    if (state.tags.find(kHeadTag)->second.empty()) {
        throw Error(ErrorCode::EmptyHead, "folder '" + std::string(folder) + "' has no HEAD entries");
    }
    if (state.tags.contains(tag)) throw Error(ErrorCode::DuplicateTag, "tag '" + std::string(tag) + "' exists");
}

std::size_t IovIndex::tag_head(std::string_view folder, std::string tag) {
    check_tag_head(folder, tag);
    auto& state = folders_.find(folder)->second;
    auto snapshot = state.tags.find(kHeadTag)->second;
    for (auto& e : snapshot) e.tag = tag;
    auto count = snapshot.size();
    state.tags.emplace(std::move(tag), std::move(snapshot));
    return count;
}

const std::vector<IovEntry>& IovIndex::entries(std::string_view folder, std::string_view tag) const {
    const auto& state = folder_state(folder);
    auto it = state.tags.find(tag);
    if (it == state.tags.end()) {
        throw Error(ErrorCode::UnknownTag, "folder '" + std::string(folder) + "' has no tag '" + std::string(tag) + "'");
    }
    return it->second;
}

const std::string& IovIndex::resolve(std::string_view folder, std::string_view tag, Timestamp t) const {
    const auto& list = entries(folder, tag);
    // Entries are sorted by since and pairwise disjoint.
    auto it = std::upper_bound(list.begin(), list.end(), t,
                               [](Timestamp value, const IovEntry& e) { return value < e.interval.since; });
    if (it == list.begin() || !std::prev(it)->interval.contains(t)) {
        throw Error(ErrorCode::NoValidEntry, "no entry in " + std::string(folder) + "@" + std::string(tag) +
                                                 " valid at " + std::to_string(t));
    }
    return std::prev(it)->payload;
}

std::vector<std::string> IovIndex::tags(std::string_view folder) const {
    std::vector<std::string> out;
    for (const auto& [name, _] : folder_state(folder).tags) out.push_back(name);
    return out;
}

std::vector<Folder> IovIndex::folders() const {
    std::vector<Folder> out;
    for (const auto& [_, state] : folders_) out.push_back(state.folder);
    return out;
}

bool IovIndex::has_folder(std::string_view folder) const noexcept { return folders_.contains(folder); }

Folder create_folder(Store& store, const std::string& path, const std::string& description) {
    return store.create_folder(path, description);
}

IovEntry iov_store(Store& store, const std::string& folder, Timestamp since, const std::string& payload) {
    return store.iov_store(folder, since, payload);
}

std::string iov_resolve(const Store& store, const std::string& folder, const std::string& tag, Timestamp t) {
    return store.iov_resolve(folder, tag, t);
}

std::size_t tag_head(Store& store, const std::string& folder, const std::string& tag) {
    return store.tag_head(folder, tag);
}

std::vector<IovEntry> iov_list(const Store& store, const std::string& folder, const std::string& tag) {
    return store.iov_list(folder, tag);
}

} // namespace pndb
