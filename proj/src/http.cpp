#include "pndb/http.hpp"

#include "pndb/conversion.hpp"
#include "pndb/sync.hpp"

#include "httplib.h"

#include <charconv>
#include <condition_variable>
#include <mutex>
#include <thread>

namespace pndb {

using nlohmann::json;

namespace {

json until_json(Timestamp until) { return until == kInfinity ? json(nullptr) : json(until); }

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
        throw Error(ErrorCode::BadRequest, what + " must be an unsigned integer, got '" + text + "'");
    }
    return v;
}

std::optional<std::uint32_t> optional_version(const httplib::Request& req, const char* name) {
    if (!req.has_param(name)) return std::nullopt;
    auto v = parse_u64(req.get_param_value(name), name);
    if (v > std::numeric_limits<std::uint32_t>::max()) throw Error(ErrorCode::BadRequest, std::string(name) + " too large");
    return static_cast<std::uint32_t>(v);
}

json parse_body(const httplib::Request& req) {
    auto body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) throw Error(ErrorCode::BadRequest, "request body must be a JSON object");
    return body;
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

// Runs a handler, translating domain errors into status + error document.
template <typename F>
httplib::Server::Handler guarded(F fn) {
    return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
        try {
            fn(req, res);
        } catch (const Error& e) {
            send_json(res, error_json(e), http_status(e.code()));
        } catch (const json::exception& e) {
            send_json(res, error_json(Error(ErrorCode::BadRequest, e.what())), 400);
        } catch (const std::exception& e) {
            send_json(res, json{{"error", "InternalError"}, {"message", e.what()}}, 500);
        }
    };
}

} // namespace

json object_json(const CollectionInstance& instance, const DataDictionary& dict) {
    json params = json::array();
    for (std::size_t i = 0; i < dict.fields.size(); ++i) {
        const auto& f = dict.fields[i];
        params.push_back({{"name", f.name},
                          {"type", type_tag(f.type)},
                          {"value", render(instance.values[i])},
                          {"unit", f.unit},
                          {"comment", f.comment}});
    }
    OpaqueAddress addr{instance.class_name, instance.instance_name, instance.object_version, instance.dict_version};
    return {{"class", instance.class_name},
            {"instance", instance.instance_name},
            {"scope", instance.scope.canonical()},
            {"object_version", instance.object_version},
            {"dict_version", instance.dict_version},
            {"address", externalize(addr)},
            {"params", std::move(params)}};
}

json dictionary_json(const DataDictionary& dict) {
    json fields = json::array();
    for (const auto& f : dict.fields) {
        fields.push_back({{"index", f.index},
                          {"name", f.name},
                          {"type", type_tag(f.type)},
                          {"unit", f.unit},
                          {"comment", f.comment},
                          {"default", f.default_value ? json(render(*f.default_value)) : json(nullptr)}});
    }
    return {{"class", dict.class_name}, {"dict_version", dict.dict_version}, {"fields", std::move(fields)}};
}

json scope_json(const ScopePath& scope, const ScopeListing& listing) {
    json children = json::array();
    for (const auto& c : listing.children) children.push_back(c.canonical());
    json instances = json::array();
    for (const auto& k : listing.instances) instances.push_back({{"class", k.class_name}, {"instance", k.instance_name}});
    return {{"path", scope.canonical()}, {"children", std::move(children)}, {"instances", std::move(instances)}};
}

json classes_json(const std::vector<ClassSummary>& classes) {
    json out = json::array();
    for (const auto& c : classes) {
        out.push_back({{"class", c.class_name},
                       {"latest_dict_version", c.latest_dict_version},
                       {"instances", c.instance_count}});
    }
    return {{"classes", std::move(out)}};
}

json versions_json(const std::string& class_name, const std::string& instance_name,
                   const std::vector<ObjectRevision>& revisions) {
    json out = json::array();
    for (const auto& r : revisions) {
        out.push_back({{"object_version", r.object_version},
                       {"dict_version", r.dict_version},
                       {"scope", r.scope.canonical()},
                       {"created_seq", r.created_seq}});
    }
    return {{"class", class_name}, {"instance", instance_name}, {"versions", std::move(out)}};
}

json iov_entries_json(const std::string& folder, const std::string& tag, const std::vector<IovEntry>& entries) {
    json out = json::array();
    for (const auto& e : entries) {
        out.push_back({{"since", e.interval.since},
                       {"until", until_json(e.interval.until)},
                       {"payload", e.payload},
                       {"inserted_seq", e.inserted_seq}});
    }
    return {{"folder", folder}, {"tag", tag}, {"entries", std::move(out)}};
}

json iov_resolve_json(const std::string& folder, const std::string& tag, Timestamp t, const std::string& payload) {
    json address = nullptr;
    try {
        auto a = internalize(payload);
        address = {{"class", a.class_name},
                   {"instance", a.instance_name},
                   {"object_version", a.object_version},
                   {"dict_version", a.dict_version}};
    } catch (const Error&) {
        // Payloads are opaque; not every one is an object address.
    }
    return {{"folder", folder}, {"tag", tag}, {"t", t}, {"payload", payload}, {"address", std::move(address)}};
}

json import_report_json(const ImportReport& report) {
    json objects = json::array();
    for (const auto& o : report.objects) objects.push_back(externalize({o.class_name, o.instance_name, o.object_version, o.dict_version}));
    return {{"collections_imported", report.collections_imported},
            {"collections_unchanged", report.collections_unchanged},
            {"dictionaries_registered", report.dictionaries_registered},
            {"warnings", report.warnings},
            {"objects", std::move(objects)}};
}

json error_json(const Error& error) { return {{"error", error.code_name()}, {"message", error.what()}}; }

int http_status(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::NotFound:
    case ErrorCode::UnknownClass:
    case ErrorCode::UnknownFolder:
    case ErrorCode::UnknownTag:
    case ErrorCode::NoValidEntry: return 404;
    case ErrorCode::ReadOnlyStore: return 403;
    case ErrorCode::DuplicateFolder:
    case ErrorCode::DuplicateTag:
    case ErrorCode::DuplicateConverter:
    case ErrorCode::NonMonotonicSince:
    case ErrorCode::NonContiguous:
    case ErrorCode::FutureSequence:
    case ErrorCode::WrongMaster:
    case ErrorCode::LocalMutationConflict:
    case ErrorCode::StoreLocked: return 409;
    case ErrorCode::ValidationFailed:
    case ErrorCode::IncompatibleEvolution: return 422;
    case ErrorCode::IoError:
    case ErrorCode::CorruptStore:
    case ErrorCode::ChecksumMismatch:
    case ErrorCode::TransportError: return 500;
    default: return 400;
    }
}

struct HttpService::Impl {
    Store& store;
    httplib::Server server;

    explicit Impl(Store& s) : store(s) { routes(); }

    void routes() {
        server.Get("/api/scopes", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto scope = ScopePath::parse(req.has_param("path") ? req.get_param_value("path") : "/");
            send_json(res, scope_json(scope, store.list_scope(scope)));
        }));
        server.Get("/api/classes", guarded([this](const httplib::Request&, httplib::Response& res) {
            send_json(res, classes_json(store.classes()));
        }));
        server.Get(R"(/api/classes/([^/]+)/dictionary)",
                   guarded([this](const httplib::Request& req, httplib::Response& res) {
                       send_json(res, dictionary_json(store.dictionary(req.matches[1], optional_version(req, "d"))));
                   }));
        server.Get(R"(/api/objects/([^/]+)/([^/]+)/versions)",
                   guarded([this](const httplib::Request& req, httplib::Response& res) {
                       send_json(res, versions_json(req.matches[1], req.matches[2],
                                                    store.object_versions(req.matches[1], req.matches[2])));
                   }));
        server.Get(R"(/api/objects/([^/]+)/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto body = store.read([&](const Catalog& c) {
                auto obj = c.get_object(std::string(req.matches[1]), std::string(req.matches[2]),
                                        optional_version(req, "v"));
                return object_json(obj, c.dictionary(obj.class_name, obj.dict_version));
            });
            send_json(res, body);
        }));
        server.Get("/api/folders", guarded([this](const httplib::Request&, httplib::Response& res) {
            auto body = store.read([&](const Catalog& c) {
                json out = json::array();
                for (const auto& f : c.iov().folders()) {
                    out.push_back({{"path", f.path}, {"description", f.description}, {"tags", c.iov().tags(f.path)}});
                }
                return json{{"folders", std::move(out)}};
            });
            send_json(res, body);
        }));
        server.Post("/api/folders", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto body = parse_body(req);
            auto folder = store.create_folder(body.at("path").get<std::string>(), body.value("description", ""));
            send_json(res, {{"path", folder.path}, {"description", folder.description}}, 201);
        }));
        server.Get(R"(/api/iov/(.+)/entries)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            std::string folder = req.matches[1];
            auto tag = req.has_param("tag") ? req.get_param_value("tag") : std::string(kHeadTag);
            send_json(res, iov_entries_json(folder, tag, store.iov_list(folder, tag)));
        }));
        server.Post(R"(/api/iov/(.+)/tags)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            std::string folder = req.matches[1];
            auto tag = parse_body(req).at("tag").get<std::string>();
            auto count = store.tag_head(folder, tag);
            send_json(res, {{"folder", folder}, {"tag", tag}, {"tagged", count}}, 201);
        }));
        server.Get(R"(/api/iov/(.+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            std::string folder = req.matches[1];
            auto tag = req.has_param("tag") ? req.get_param_value("tag") : std::string(kHeadTag);
            if (!req.has_param("t")) throw Error(ErrorCode::BadRequest, "query parameter t is required");
            auto t = parse_u64(req.get_param_value("t"), "t");
            send_json(res, iov_resolve_json(folder, tag, t, store.iov_resolve(folder, tag, t)));
        }));
        server.Post(R"(/api/iov/(.+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            std::string folder = req.matches[1];
            auto body = parse_body(req);
            auto entry = store.iov_store(folder, body.at("since").get<std::uint64_t>(), body.at("payload").get<std::string>());
            send_json(res,
                      {{"folder", folder},
                       {"since", entry.interval.since},
                       {"until", until_json(entry.interval.until)},
                       {"payload", entry.payload},
                       {"inserted_seq", entry.inserted_seq}},
                      201);
        }));
        server.Get("/api/export/xml", guarded([this](const httplib::Request& req, httplib::Response& res) {
            std::optional<ScopePath> scope;
            if (req.has_param("scope")) scope = ScopePath::parse(req.get_param_value("scope"));
            res.set_content(export_xml(store, scope), "application/xml");
        }));
        server.Post("/api/import/table", guarded([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, import_report_json(import_table(store, req.body)));
        }));
        server.Post("/api/import/xml", guarded([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, import_report_json(import_xml(store, req.body)));
        }));
        server.Get(R"(/api/blobs/(\d+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto id = parse_u64(req.matches[1], "blob id");
            auto ref = store.blob_info(id);
            if (!ref) throw Error(ErrorCode::NotFound, "blob " + std::to_string(id));
            auto bytes = store.get_blob(ref->key());
            res.set_header("X-Checksum-SHA256", to_hex(ref->checksum));
            res.set_header("X-Blob-Ref", render_blob_key(ref->key()));
            res.set_content(std::string(bytes.begin(), bytes.end()), "application/octet-stream");
        }));
        server.Get("/api/sync/changes", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto since = req.has_param("since") ? parse_u64(req.get_param_value("since"), "since") : 0;
            auto bytes = serialize_changeset(export_changes(store, since));
            res.set_content(std::string(bytes.begin(), bytes.end()), "application/octet-stream");
        }));
    }
};

HttpService::HttpService(Store& store) : impl_(std::make_unique<Impl>(store)) {}

HttpService::~HttpService() { stop(); }

int HttpService::bind(const std::string& host, int port) {
    if (!impl_->server.bind_to_port(host, port)) {
        throw Error(ErrorCode::IoError, "cannot listen on " + host + ":" + std::to_string(port));
    }
    return port;
}

int HttpService::bind_to_any_port(const std::string& host) {
    int port = impl_->server.bind_to_any_port(host);
    if (port < 0) throw Error(ErrorCode::IoError, "cannot listen on " + host);
    return port;
}

void HttpService::serve() { impl_->server.listen_after_bind(); }

void HttpService::stop() {
    if (impl_->server.is_running()) impl_->server.stop();
}

void HttpService::wait_until_ready() const { impl_->server.wait_until_ready(); }

SequenceNumber sync_from(Store& replica, const std::string& master_url) {
    httplib::Client client(master_url);
    client.set_connection_timeout(std::chrono::seconds(5));
    client.set_read_timeout(std::chrono::seconds(60));
    auto path = "/api/sync/changes?since=" + std::to_string(replica.seq());
    auto res = client.Get(path);
    if (!res) {
        throw Error(ErrorCode::TransportError, "cannot reach " + master_url + ": " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        auto body = json::parse(res->body, nullptr, false);
        if (!body.is_discarded() && body.contains("error")) {
            auto code = error_code_from_name(body["error"].get<std::string>());
            throw Error(code.value_or(ErrorCode::TransportError), body.value("message", "master rejected sync"));
        }
        throw Error(ErrorCode::TransportError, "master answered HTTP " + std::to_string(res->status));
    }
    return apply_changes(replica, as_bytes(res->body));
}

struct ReplicaPoller::Impl {
    Store& replica;
    std::string url;
    std::chrono::milliseconds interval;
    mutable std::mutex mutex;
    std::condition_variable wake;
    bool stopping = false;
    std::string last_error;
    std::thread worker;

    void run() {
        std::unique_lock lock(mutex);
        while (!stopping) {
            lock.unlock();
            std::string error;
            try {
                sync_from(replica, url);
            } catch (const std::exception& e) {
                error = e.what();
            }
            lock.lock();
            last_error = std::move(error);
            wake.wait_for(lock, interval, [this] { return stopping; });
        }
    }
};

ReplicaPoller::ReplicaPoller(Store& replica, std::string master_url, std::chrono::milliseconds interval)
    : impl_(new Impl{replica, std::move(master_url), interval, {}, {}, false, {}, {}}) {
    impl_->worker = std::thread([this] { impl_->run(); });
}

ReplicaPoller::~ReplicaPoller() {
    {
        std::lock_guard lock(impl_->mutex);
        impl_->stopping = true;
    }
    impl_->wake.notify_all();
    impl_->worker.join();
}

std::string ReplicaPoller::last_error() const {
    std::lock_guard lock(impl_->mutex);
    return impl_->last_error;
}

} // namespace pndb
