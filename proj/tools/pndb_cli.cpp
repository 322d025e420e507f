// pndb: command-line front end for a primary-numbers store.
//
// Exit codes: 0 success, 1 domain error, 2 usage error.

#include "pndb/conversion.hpp"
#include "pndb/exchange.hpp"
#include "pndb/http.hpp"
#include "pndb/iov.hpp"
#include "pndb/store.hpp"

#include "CLI11.hpp"

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace pndb;

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::pair<std::string, int> split_listen(const std::string& listen) {
    auto colon = listen.rfind(':');
    if (colon == std::string::npos) throw CLI::ValidationError("--listen", "expected <host>:<port>");
    try {
        return {listen.substr(0, colon), std::stoi(listen.substr(colon + 1))};
    } catch (const std::exception&) {
        throw CLI::ValidationError("--listen", "port must be a number");
    }
}

HttpService* g_service = nullptr;

extern "C" void on_signal(int) {
    if (g_service != nullptr) g_service->stop();
}

void print_report(const ImportReport& r) {
    std::cout << "imported " << r.collections_imported << " collection(s), " << r.collections_unchanged
              << " unchanged, " << r.dictionaries_registered << " dictionary version(s) registered\n";
    for (const auto& w : r.warnings) std::cout << "warning: " << w << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Versioned primary-numbers parameter store"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string store_dir = ".";
    app.add_option("--store", store_dir, "Store directory")->capture_default_str();

    auto* init = app.add_subcommand("init", "Create an empty store");
    bool replica = false;
    init->add_flag("--replica", replica, "Create a read-only replica store");

    auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
    std::string listen = "127.0.0.1:8080";
    std::string replica_of;
    double sync_interval = 5.0;
    serve->add_option("--listen", listen, "<host>:<port>")->capture_default_str();
    serve->add_option("--replica-of", replica_of, "Master URL to follow (store must be a replica)");
    serve->add_option("--sync-interval", sync_interval, "Seconds between replica syncs")->capture_default_str();

    auto* import_table_cmd = app.add_subcommand("import-table", "Import a pipe-separated parameter table");
    std::string input_file;
    import_table_cmd->add_option("file", input_file)->required();

    auto* import_xml_cmd = app.add_subcommand("import-xml", "Import an XML document");
    import_xml_cmd->add_option("file", input_file)->required();

    auto* export_cmd = app.add_subcommand("export-xml", "Export latest collections as XML");
    std::string scope_text;
    std::string output_file;
    export_cmd->add_option("--scope", scope_text, "Only collections at or under this scope");
    export_cmd->add_option("-o,--output", output_file, "Write to a file instead of stdout");

    auto* get = app.add_subcommand("get", "Print one collection revision");
    std::string class_name;
    std::string instance_name;
    std::optional<std::uint32_t> version;
    bool as_json = false;
    get->add_option("class", class_name)->required();
    get->add_option("instance", instance_name)->required();
    get->add_option("--version", version, "Object version (default: latest)");
    get->add_flag("--json", as_json, "Print the HTTP API JSON form");

    auto* ls = app.add_subcommand("ls", "List child scopes and instances of a scope");
    ls->add_option("scope", scope_text, "Scope path (default /)");

    auto* put_blob = app.add_subcommand("put-blob", "Store a file as a blob");
    put_blob->add_option("file", input_file)->required();

    auto* get_blob = app.add_subcommand("get-blob", "Write a blob's verified bytes to a file");
    std::uint64_t blob_id = 0;
    get_blob->add_option("id", blob_id)->required();
    get_blob->add_option("-o,--output", output_file)->required();

    auto* mkfolder = app.add_subcommand("create-folder", "Create an IOV folder");
    std::string folder;
    std::string description;
    mkfolder->add_option("folder", folder)->required();
    mkfolder->add_option("--description", description);

    auto* iov_store_cmd = app.add_subcommand("iov-store", "Append a HEAD entry valid from --since");
    Timestamp since = 0;
    std::string payload;
    iov_store_cmd->add_option("folder", folder)->required();
    iov_store_cmd->add_option("--since", since)->required();
    iov_store_cmd->add_option("--payload", payload)->required();

    auto* iov_resolve_cmd = app.add_subcommand("iov-resolve", "Print the payload valid at a timestamp");
    std::string tag = std::string(kHeadTag);
    Timestamp at = 0;
    iov_resolve_cmd->add_option("folder", folder)->required();
    iov_resolve_cmd->add_option("--tag", tag)->capture_default_str();
    iov_resolve_cmd->add_option("--at", at)->required();

    auto* iov_list_cmd = app.add_subcommand("iov-list", "List the intervals of a folder tag");
    iov_list_cmd->add_option("folder", folder)->required();
    iov_list_cmd->add_option("--tag", tag)->capture_default_str();

    auto* tag_cmd = app.add_subcommand("tag", "Snapshot a folder's HEAD under a tag");
    tag_cmd->add_option("folder", folder)->required();
    tag_cmd->add_option("tag", tag)->required();

    auto* sync = app.add_subcommand("sync", "Pull changes from a master into a replica store");
    std::string master_url;
    sync->add_option("--from", master_url, "Master URL, e.g. http://host:8080")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    auto open_rw = [&] { return Store::open(store_dir, StoreMode::ReadWrite); };
    auto open_ro = [&] { return Store::open(store_dir, StoreMode::ReadOnly); };

    try {
        if (*init) {
            Store::init(store_dir, replica ? StoreRole::Replica : StoreRole::Primary);
            auto store = open_ro();
            std::cout << "initialised " << (replica ? "replica" : "primary") << " store " << store_id_hex(store->id())
                      << " at " << store_dir << '\n';
        } else if (*serve) {
            auto [host, port] = split_listen(listen);
            auto store = Store::open(store_dir, replica_of.empty() ? StoreMode::ReadWrite : StoreMode::Replica);
            HttpService service(*store);
            service.bind(host, port);
            std::unique_ptr<ReplicaPoller> poller;
            if (!replica_of.empty()) {
                poller = std::make_unique<ReplicaPoller>(
                    *store, replica_of, std::chrono::milliseconds(static_cast<long>(sync_interval * 1000)));
            }
            g_service = &service;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "serving " << store_dir << " on http://" << host << ":" << port << '\n';
            service.serve();
            g_service = nullptr;
        } else if (*import_table_cmd) {
            auto store = open_rw();
            print_report(import_table(*store, read_text(input_file)));
        } else if (*import_xml_cmd) {
            auto store = open_rw();
            print_report(import_xml(*store, read_text(input_file)));
        } else if (*export_cmd) {
            auto store = open_ro();
            std::optional<ScopePath> scope;
            if (!scope_text.empty()) scope = ScopePath::parse(scope_text);
            auto xml = export_xml(*store, scope);
            if (output_file.empty()) {
                std::cout << xml;
            } else {
                std::ofstream out(output_file, std::ios::binary);
                out << xml;
                if (!out) throw Error(ErrorCode::IoError, "cannot write " + output_file);
            }
        } else if (*get) {
            auto store = open_ro();
            auto obj = store->get_object(class_name, instance_name, version);
            auto dict = store->dictionary(class_name, obj.dict_version);
            if (as_json) {
                std::cout << object_json(obj, dict).dump(2) << '\n';
            } else {
                std::cout << "#class " << obj.class_name << "\n#instance " << obj.instance_name << "\n#scope "
                          << obj.scope.canonical() << "\n# object-version " << obj.object_version
                          << ", dict-version " << obj.dict_version << '\n';
                for (std::size_t i = 0; i < dict.fields.size(); ++i) {
                    const auto& f = dict.fields[i];
                    std::cout << f.name << '|' << type_tag(f.type) << '|' << render(obj.values[i]) << '|' << f.unit
                              << '|' << f.comment << '\n';
                }
            }
        } else if (*ls) {
            auto store = open_ro();
            auto scope = ScopePath::parse(scope_text.empty() ? "/" : scope_text);
            auto listing = store->list_scope(scope);
            for (const auto& c : listing.children) std::cout << c.canonical() << "/\n";
            for (const auto& k : listing.instances) std::cout << k.class_name << ' ' << k.instance_name << '\n';
        } else if (*put_blob) {
            auto store = open_rw();
            auto data = read_text(input_file);
            auto ref = store->put_blob(as_bytes(data));
            std::cout << render_blob_key(ref.key()) << ' ' << ref.length << '\n';
        } else if (*get_blob) {
            auto store = open_ro();
            auto bytes = store->get_blob(blob_id);
            std::ofstream out(output_file, std::ios::binary);
            out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
            if (!out) throw Error(ErrorCode::IoError, "cannot write " + output_file);
        } else if (*mkfolder) {
            auto store = open_rw();
            auto f = create_folder(*store, folder, description);
            std::cout << "created folder " << f.path << '\n';
        } else if (*iov_store_cmd) {
            auto store = open_rw();
            auto e = iov_store(*store, folder, since, payload);
            std::cout << '[' << e.interval.since << ", inf) -> " << e.payload << '\n';
        } else if (*iov_resolve_cmd) {
            auto store = open_ro();
            std::cout << iov_resolve(*store, folder, tag, at) << '\n';
        } else if (*iov_list_cmd) {
            auto store = open_ro();
            for (const auto& e : iov_list(*store, folder, tag)) {
                std::cout << '[' << e.interval.since << ", "
                          << (e.interval.until == kInfinity ? std::string("inf") : std::to_string(e.interval.until))
                          << ") -> " << e.payload << '\n';
            }
        } else if (*tag_cmd) {
            auto store = open_rw();
            std::cout << "tagged " << tag_head(*store, folder, tag) << " entr(ies) as " << tag << '\n';
        } else if (*sync) {
            auto store = Store::open(store_dir, StoreMode::Replica);
            auto before = store->seq();
            auto after = sync_from(*store, master_url);
            std::cout << "replica at seq " << after << " (+" << (after - before) << ")\n";
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
