#pragma once

// HTTP API over one store, plus the client side of replica sync.
//
//   GET  /api/scopes?path=                       scope children + instances
//   GET  /api/classes                            class summaries
//   GET  /api/classes/{class}/dictionary?d=      one dictionary version
//   GET  /api/objects/{class}/{instance}?v=      one revision
//   GET  /api/objects/{class}/{instance}/versions
//   GET  /api/folders                            IOV folders and their tags
//   POST /api/folders                            {"path","description"}
//   GET  /api/iov/{folder}?tag=&t=               resolve
//   GET  /api/iov/{folder}/entries?tag=          interval listing
//   POST /api/iov/{folder}                       {"since","payload"}
//   POST /api/iov/{folder}/tags                  {"tag"}
//   GET  /api/export/xml?scope=
//   POST /api/import/table, /api/import/xml      raw document body
//   GET  /api/blobs/{id}                         raw bytes
//   GET  /api/sync/changes?since=                changeset bytes
//
// Errors are {"error": <ErrorCode name>, "message": ...} with a 4xx/5xx
// status.

#include "pndb/exchange.hpp"
#include "pndb/store.hpp"

#include "json.hpp"

#include <chrono>
#include <memory>
#include <string>

namespace pndb {

// JSON renderings shared by the service and its tests. Values use the same
// canonical literal text as the XML export.
nlohmann::json object_json(const CollectionInstance& instance, const DataDictionary& dict);
nlohmann::json dictionary_json(const DataDictionary& dict);
nlohmann::json scope_json(const ScopePath& scope, const ScopeListing& listing);
nlohmann::json classes_json(const std::vector<ClassSummary>& classes);
nlohmann::json versions_json(const std::string& class_name, const std::string& instance_name,
                             const std::vector<ObjectRevision>& revisions);
nlohmann::json iov_entries_json(const std::string& folder, const std::string& tag,
                                const std::vector<IovEntry>& entries);
nlohmann::json iov_resolve_json(const std::string& folder, const std::string& tag, Timestamp t,
                                const std::string& payload);
nlohmann::json import_report_json(const ImportReport& report);
nlohmann::json error_json(const Error& error);

int http_status(ErrorCode code) noexcept;

class HttpService {
public:
    explicit HttpService(Store& store);
    ~HttpService();
    HttpService(const HttpService&) = delete;
    HttpService& operator=(const HttpService&) = delete;

    /// Returns the bound port; throws IoError on failure.
    int bind(const std::string& host, int port);
    int bind_to_any_port(const std::string& host = "127.0.0.1");
    /// Blocks serving requests until stop().
    void serve();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Pulls every change after the replica's seq from a master service and
/// applies it. Returns the replica's new seq.
SequenceNumber sync_from(Store& replica, const std::string& master_url);

/// Background sync loop for a replica service.
class ReplicaPoller {
public:
    ReplicaPoller(Store& replica, std::string master_url, std::chrono::milliseconds interval);
    ~ReplicaPoller();
    ReplicaPoller(const ReplicaPoller&) = delete;
    ReplicaPoller& operator=(const ReplicaPoller&) = delete;

    std::string last_error() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace pndb
