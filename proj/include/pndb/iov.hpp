#pragma once

// Interval-of-validity database. Each folder keeps a mutable HEAD interval
// set built by append-with-truncation, plus immutable tag snapshots of it.
// Intervals are half-open [since, until).

#include "pndb/error.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace pndb {

class Store;

using Timestamp = std::uint64_t;
inline constexpr Timestamp kInfinity = std::numeric_limits<Timestamp>::max();
inline constexpr std::string_view kHeadTag = "HEAD";

struct IntervalOfValidity {
    Timestamp since = 0;
    Timestamp until = kInfinity;

    bool contains(Timestamp t) const noexcept { return since <= t && t < until; }
    bool operator==(const IntervalOfValidity&) const = default;
};

struct IovEntry {
    std::string folder;
    std::string tag;
    IntervalOfValidity interval;
    std::string payload;
    std::uint64_t inserted_seq = 0;

    bool operator==(const IovEntry&) const = default;
};

struct Folder {
    std::string path;
    std::string description;
    bool operator==(const Folder&) const = default;
};

/// Identifier segments joined by '/', no leading or trailing slash.
bool is_folder_path(std::string_view path) noexcept;

/// In-memory IOV state of one store. Mutators validate first and change
/// nothing when they throw.
class IovIndex {
public:
    const Folder& create_folder(std::string path, std::string description);
    const IovEntry& store(std::string_view folder, Timestamp since, std::string payload, std::uint64_t seq);
    std::size_t tag_head(std::string_view folder, std::string tag);

    // Validation-only checks used before a mutation is logged.
    void check_create_folder(std::string_view path) const;
    void check_store(std::string_view folder, Timestamp since) const;
    void check_tag_head(std::string_view folder, std::string_view tag) const;

    const std::string& resolve(std::string_view folder, std::string_view tag, Timestamp t) const;
    const std::vector<IovEntry>& entries(std::string_view folder, std::string_view tag) const;
    std::vector<std::string> tags(std::string_view folder) const;
    std::vector<Folder> folders() const;
    bool has_folder(std::string_view folder) const noexcept;

    bool operator==(const IovIndex&) const = default;

private:
    struct FolderState {
        Folder folder;
        std::map<std::string, std::vector<IovEntry>, std::less<>> tags;
        bool operator==(const FolderState&) const = default;
    };
    const FolderState& folder_state(std::string_view folder) const;
    std::map<std::string, FolderState, std::less<>> folders_;
};

// Store-level operations; mutations are logged and persisted.
Folder create_folder(Store& store, const std::string& path, const std::string& description);
IovEntry iov_store(Store& store, const std::string& folder, Timestamp since, const std::string& payload);
std::string iov_resolve(const Store& store, const std::string& folder, const std::string& tag, Timestamp t);
std::size_t tag_head(Store& store, const std::string& folder, const std::string& tag);
std::vector<IovEntry> iov_list(const Store& store, const std::string& folder, const std::string& tag);

} // namespace pndb
