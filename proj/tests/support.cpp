#include "support.hpp"

#include "pndb/digest.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>
#include <stdlib.h>

namespace pndb::testing {

TempDir::TempDir() {
    auto templ = (std::filesystem::temp_directory_path() / "pndb-test-XXXXXX").string();
    if (mkdtemp(templ.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = templ;
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

std::unique_ptr<Store> make_store(const std::filesystem::path& root, StoreRole role) {
    Store::init(root, role);
    return Store::open(root, role == StoreRole::Primary ? StoreMode::ReadWrite : StoreMode::Replica,
                       StoreOptions{.fsync = false});
}

std::unique_ptr<Store> reopen(std::unique_ptr<Store> store, StoreMode mode) {
    auto root = store->root();
    store.reset();
    return Store::open(root, mode, StoreOptions{.fsync = false});
}

FieldSpec field(std::string name, PrimitiveType type, std::string comment, std::string unit) {
    FieldSpec f;
    f.name = std::move(name);
    f.type = type;
    f.comment = std::move(comment);
    f.unit = std::move(unit);
    return f;
}

std::vector<FieldSpec> mother_volume_fields() {
    return {
        field("Version", PrimitiveType::Int, "2001 VERSION WITH ENDCAP SHIFTED B"),
        field("Rmin", PrimitiveType::Float, "Inner Radius"),
        field("Rmax", PrimitiveType::Float, "Outer Radius"),
        field("Zmax", PrimitiveType::Float, "Maximum Z"),
    };
}

std::vector<ParameterValue> mother_volume_values() {
    return {ParameterValue::integer(2), ParameterValue::real(0.0), ParameterValue::real(1400.0),
            ParameterValue::real(2350.0)};
}

namespace {

std::size_t pick(std::mt19937_64& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
bool coin(std::mt19937_64& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

std::int64_t random_int(std::mt19937_64& rng) {
    switch (pick(rng, 4)) {
    case 0: return std::numeric_limits<std::int64_t>::min() + static_cast<std::int64_t>(pick(rng, 3));
    case 1: return std::numeric_limits<std::int64_t>::max() - static_cast<std::int64_t>(pick(rng, 3));
    case 2: return static_cast<std::int64_t>(rng());
    default: return std::uniform_int_distribution<std::int64_t>(-1000, 1000)(rng);
    }
}

double random_double(std::mt19937_64& rng) {
    switch (pick(rng, 4)) {
    case 0: {
        // any finite bit pattern, subnormals included
        for (;;) {
            std::uint64_t bits = rng();
            double d;
            std::memcpy(&d, &bits, sizeof d);
            if (std::isfinite(d)) return d;
        }
    }
    case 1: {
        static const double specials[] = {0.0, -0.0, 1.0, -1.0, 0.1, 1e300, -1e-300, 5e-324, 1.7976931348623157e308};
        return specials[pick(rng, std::size(specials))];
    }
    case 2: return std::uniform_real_distribution<double>(-1e6, 1e6)(rng);
    default: return static_cast<double>(std::uniform_int_distribution<int>(-5000, 5000)(rng)) / 4.0;
    }
}

std::string random_text(std::mt19937_64& rng, std::size_t max_len) {
    // XML-representable characters only: no C0 controls except tab and newline
    static const std::vector<std::string> pieces = {"a", "Z", "0", " ", "<", ">", "&", "\"", "'", "|", "\\",
                                                    "\t", "\n", "\xc3\xa9", "\xe2\x82\xac", "/", "#", "?", "="};
    std::string out;
    auto len = pick(rng, max_len + 1);
    for (std::size_t i = 0; i < len; ++i) out += pieces[pick(rng, pieces.size())];
    return out;
}

} // namespace

std::string random_identifier(std::mt19937_64& rng, std::size_t max_len) {
    static const char first[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz_";
    static const char rest[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz_0123456789";
    std::string out(1, first[pick(rng, sizeof first - 1)]);
    auto len = pick(rng, max_len);
    for (std::size_t i = 0; i < len; ++i) out += rest[pick(rng, sizeof rest - 1)];
    return out;
}

PrimitiveType random_type(std::mt19937_64& rng, bool allow_blob) {
    for (;;) {
        auto t = static_cast<PrimitiveType>(pick(rng, 8));
        if (allow_blob || t != PrimitiveType::BlobRef) return t;
    }
}

ParameterValue random_value(std::mt19937_64& rng, PrimitiveType type) {
    auto n = pick(rng, 5);
    switch (type) {
    case PrimitiveType::Int: return ParameterValue::integer(random_int(rng));
    case PrimitiveType::Float: return ParameterValue::real(random_double(rng));
    case PrimitiveType::Bool: return ParameterValue::boolean(coin(rng));
    case PrimitiveType::String: return ParameterValue::string(random_text(rng, 12));
    case PrimitiveType::BlobRef: {
        Digest d;
        for (auto& b : d) b = static_cast<std::uint8_t>(rng());
        return ParameterValue::blob({1 + pick(rng, 100), d});
    }
    case PrimitiveType::IntArray: {
        std::vector<std::int64_t> v;
        for (std::size_t i = 0; i < n; ++i) v.push_back(random_int(rng));
        return ParameterValue::int_array(std::move(v));
    }
    case PrimitiveType::FloatArray: {
        std::vector<double> v;
        for (std::size_t i = 0; i < n; ++i) v.push_back(random_double(rng));
        return ParameterValue::real_array(std::move(v));
    }
    case PrimitiveType::StringArray: {
        std::vector<std::string> v;
        for (std::size_t i = 0; i < n; ++i) v.push_back(random_text(rng, 6));
        return ParameterValue::string_array(std::move(v));
    }
    }
    throw std::logic_error("bad type");
}

namespace {

ScopePath random_scope(std::mt19937_64& rng) {
    static const char* scopes[] = {"/", "/ATLAS", "/ATLAS/Muon", "/ATLAS/Inner", "/CMS", "/CMS/Tracker/Pixel"};
    return ScopePath::parse(scopes[pick(rng, std::size(scopes))]);
}

} // namespace

std::vector<FieldSpec> random_fields(std::mt19937_64& rng) {
    std::vector<FieldSpec> fields;
    std::set<std::string> names;
    auto n = 1 + pick(rng, 5);
    while (fields.size() < n) {
        auto name = random_identifier(rng, 6);
        if (!names.insert(name).second) continue;
        auto f = field(name, random_type(rng), random_text(rng, 8), coin(rng, 0.3) ? "mm" : "");
        if (f.type == PrimitiveType::BlobRef || coin(rng, 0.3)) f.default_value = random_value(rng, f.type);
        fields.push_back(std::move(f));
    }
    return fields;
}

std::vector<FieldSpec> evolve_fields(std::mt19937_64& rng, std::vector<FieldSpec> fields) {
    std::set<std::string> names;
    for (const auto& f : fields) names.insert(f.name);
    if (fields.size() > 1 && coin(rng, 0.4)) {
        auto i = pick(rng, fields.size());
        fields.erase(fields.begin() + static_cast<std::ptrdiff_t>(i));
    }
    for (auto& f : fields) {
        if (f.type == PrimitiveType::Int && coin(rng, 0.3)) {
            f.type = PrimitiveType::Float;
            if (f.default_value) f.default_value = ParameterValue::real(static_cast<double>(f.default_value->as_int()));
        }
    }
    // always add one field so the dictionary really changes
    std::string name;
    do name = random_identifier(rng, 6);
    while (names.contains(name));
    auto added = field(name, random_type(rng), "added");
    if (added.type == PrimitiveType::BlobRef || coin(rng, 0.5)) added.default_value = random_value(rng, added.type);
    fields.push_back(std::move(added));
    if (coin(rng, 0.4)) std::shuffle(fields.begin(), fields.end(), rng);
    return fields;
}

std::vector<DataDictionary> random_chain(std::mt19937_64& rng, const std::string& class_name, std::size_t length) {
    std::vector<DataDictionary> chain;
    auto fields = random_fields(rng);
    for (std::uint32_t v = 1; v <= length; ++v) {
        if (v > 1) fields = evolve_fields(rng, fields);
        chain.push_back(make_dictionary(class_name, fields, v));
        fields = chain.back().fields;
    }
    return chain;
}

std::optional<std::vector<ParameterValue>> expected_view(const std::vector<DataDictionary>& chain,
                                                         std::uint32_t from, const std::vector<ParameterValue>& values,
                                                         std::uint32_t to) {
    std::map<std::string, ParameterValue> state;
    const auto& src = chain.at(from - 1);
    for (std::size_t i = 0; i < src.fields.size(); ++i) state.emplace(src.fields[i].name, values.at(i));
    auto cur = from;
    while (cur != to) {
        auto next = cur < to ? cur + 1 : cur - 1;
        std::map<std::string, ParameterValue> out;
        for (const auto& f : chain.at(next - 1).fields) {
            auto it = state.find(f.name);
            if (it == state.end()) {
                out.emplace(f.name, default_value(f));
            } else if (it->second.type() == f.type) {
                out.emplace(f.name, it->second);
            } else if (it->second.type() == PrimitiveType::Int && f.type == PrimitiveType::Float) {
                out.emplace(f.name, ParameterValue::real(static_cast<double>(it->second.as_int())));
            } else {
                return std::nullopt;
            }
        }
        state = std::move(out);
        cur = next;
    }
    std::vector<ParameterValue> result;
    for (const auto& f : chain.at(to - 1).fields) result.push_back(state.at(f.name));
    return result;
}

void populate_flat_corpus(Store& store, std::mt19937_64& rng, std::size_t classes, std::size_t params_per_class) {
    store.transact([&](Transaction& txn) {
        for (std::size_t c = 0; c < classes; ++c) {
            auto class_name = "Det" + std::to_string(c) + "_" + random_identifier(rng, 6);
            std::vector<FieldSpec> fields;
            std::vector<ParameterValue> values;
            auto n = params_per_class / 2 + pick(rng, params_per_class + 1);
            for (std::size_t i = 0; i < n; ++i) {
                auto f = field("p" + std::to_string(i) + "_" + random_identifier(rng, 4), random_type(rng),
                               random_text(rng, 16), coin(rng, 0.4) ? "cm" : "");
                values.push_back(random_value(rng, f.type));
                fields.push_back(std::move(f));
            }
            txn.register_class(class_name, std::move(fields));
            txn.put_object(class_name, coin(rng, 0.8) ? "default" : random_identifier(rng, 6), random_scope(rng),
                           std::move(values));
        }
    });
}

void IovOracle::store(const std::string& folder, Timestamp since, const std::string& payload) {
    stored_[{folder, std::string(kHeadTag)}].emplace_back(since, payload);
}

void IovOracle::tag(const std::string& folder, const std::string& tag) {
    stored_[{folder, tag}] = stored_[{folder, std::string(kHeadTag)}];
}

std::vector<std::tuple<Timestamp, Timestamp, std::string>> IovOracle::intervals(const std::string& folder,
                                                                                 const std::string& tag) const {
    std::vector<std::tuple<Timestamp, Timestamp, std::string>> out;
    auto it = stored_.find({folder, tag});
    if (it == stored_.end()) return out;
    const auto& v = it->second;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.emplace_back(v[i].first, i + 1 < v.size() ? v[i + 1].first : kInfinity, v[i].second);
    }
    return out;
}

std::optional<std::string> IovOracle::resolve(const std::string& folder, const std::string& tag, Timestamp t) const {
    std::optional<std::string> hit;
    for (const auto& [since, until, payload] : intervals(folder, tag)) {
        if (since <= t && t < until) {
            if (hit) throw std::logic_error("overlapping intervals in oracle");
            hit = payload;
        }
    }
    return hit;
}

void MutationScript::step(Store& store) {
    auto classes = store.classes();
    auto folders = store.folders();
    for (;;) {
        switch (pick(rng_, 7)) {
        case 0: { // new class
            std::string name;
            do name = "C" + random_identifier(rng_, 5);
            while (store.read([&](const Catalog& c) { return c.has_class(name); }));
            store.register_class(name, random_fields(rng_));
            return;
        }
        case 1: { // evolve a class
            if (classes.empty()) continue;
            const auto& cls = classes[pick(rng_, classes.size())];
            auto dict = store.dictionary(cls.class_name);
            store.register_class(cls.class_name, evolve_fields(rng_, dict.fields));
            return;
        }
        case 2:
        case 3: { // put an object
            if (classes.empty()) continue;
            const auto& cls = classes[pick(rng_, classes.size())];
            auto dict = store.dictionary(cls.class_name);
            std::vector<ParameterValue> values;
            for (const auto& f : dict.fields) values.push_back(random_value(rng_, f.type));
            static const char* instances[] = {"default", "alt", "run2", "barrel"};
            auto instance = std::string(instances[pick(rng_, std::size(instances))]);
            // an instance keeps its scope across versions
            ScopePath scope = random_scope(rng_);
            auto versions = store.read([&](const Catalog& c) {
                return c.latest_object(cls.class_name, instance);
            });
            if (versions) scope = versions->scope;
            store.put_object(cls.class_name, instance, scope, std::move(values));
            return;
        }
        case 4: { // blob with unique content
            std::string data = "blob-" + std::to_string(blob_counter_++) + "-";
            auto extra = pick(rng_, 64);
            for (std::size_t i = 0; i < extra; ++i) data.push_back(static_cast<char>(rng_()));
            store.put_blob(as_bytes(data));
            return;
        }
        case 5: { // folder
            if (folders.size() >= 6 && coin(rng_, 0.8)) continue;
            std::string path;
            do path = "Cond/" + random_identifier(rng_, 4) + (coin(rng_) ? "/" + random_identifier(rng_, 4) : "");
            while (store.read([&](const Catalog& c) { return c.iov().has_folder(path); }));
            store.create_folder(path, random_text(rng_, 10));
            return;
        }
        default: { // IOV store or tag
            if (folders.empty()) continue;
            const auto& folder = folders[pick(rng_, folders.size())].path;
            auto head = store.iov_list(folder, std::string(kHeadTag));
            if (!head.empty() && coin(rng_, 0.25)) {
                auto tags = store.folder_tags(folder);
                std::string tag;
                do tag = "T" + random_identifier(rng_, 5);
                while (std::find(tags.begin(), tags.end(), tag) != tags.end());
                store.tag_head(folder, tag);
                return;
            }
            Timestamp since = head.empty() ? pick(rng_, 50) : head.back().interval.since + 1 + pick(rng_, 100);
            store.iov_store(folder, since, "nova://X/" + random_identifier(rng_, 4) + "?v=1&d=1");
            return;
        }
        }
    }
}

namespace {

template <typename F>
std::string guarded(F&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        return "!" + std::string(e.code_name());
    }
}

std::string describe_fields(const DataDictionary& d) {
    std::ostringstream out;
    out << d.class_name << " d=" << d.dict_version << " {";
    for (const auto& f : d.fields) {
        out << f.index << ':' << f.name << ':' << type_tag(f.type) << ":u=" << f.unit << ":c=" << f.comment;
        if (f.default_value) out << ":def=" << render(*f.default_value);
        out << ';';
    }
    out << '}';
    return out.str();
}

} // namespace

std::string dump_reads(const Store& store) {
    std::ostringstream out;
    std::set<ScopePath> scopes{ScopePath::root()};
    std::vector<BlobRef> blobs;
    store.read([&](const Catalog& c) {
        for (const auto& cls : c.classes()) {
            out << "class " << cls.class_name << " latest=" << cls.latest_dict_version << " n=" << cls.instance_count
                << '\n';
            for (const auto& d : c.dictionaries(cls.class_name)) out << "  " << describe_fields(d) << '\n';
            out << "  next " << guarded([&] { return describe_fields(c.dictionary(cls.class_name, cls.latest_dict_version + 1)); })
                << '\n';
        }
        for (const auto& latest : c.latest_objects()) {
            for (auto s = latest.scope;; s = s.parent()) {
                scopes.insert(s);
                if (s.is_root()) break;
            }
            for (const auto& rev : c.object_versions(latest.class_name, latest.instance_name)) {
                auto obj = c.get_object(latest.class_name, latest.instance_name, rev.object_version);
                out << "object " << obj.class_name << '/' << obj.instance_name << " v=" << obj.object_version
                    << " d=" << obj.dict_version << " scope=" << obj.scope.canonical() << " seq=" << rev.created_seq
                    << " :";
                for (const auto& v : obj.values) out << ' ' << render(v);
                out << '\n';
            }
        }
        for (const auto& s : scopes) {
            auto l = c.list_scope(s);
            out << "scope " << s.canonical() << " children:";
            for (const auto& ch : l.children) out << ' ' << ch.canonical();
            out << " instances:";
            for (const auto& k : l.instances) out << ' ' << k.class_name << '/' << k.instance_name;
            out << '\n';
        }
        blobs = c.blobs();
        for (const auto& f : c.iov().folders()) {
            out << "folder " << f.path << " desc=" << f.description << '\n';
            for (const auto& tag : c.iov().tags(f.path)) {
                const auto& entries = c.iov().entries(f.path, tag);
                std::set<Timestamp> probes{0, kInfinity};
                for (const auto& e : entries) {
                    out << "  " << tag << " [" << e.interval.since << ',' << e.interval.until << ") " << e.payload
                        << " seq=" << e.inserted_seq << '\n';
                    for (auto t : {e.interval.since, e.interval.until}) {
                        probes.insert(t);
                        if (t > 0) probes.insert(t - 1);
                    }
                }
                for (auto t : probes)
                    out << "  resolve " << tag << '@' << t << " = "
                        << guarded([&] { return c.iov().resolve(f.path, tag, t); }) << '\n';
            }
        }
        return 0;
    });
    for (const auto& b : blobs) {
        auto bytes = store.get_blob(b.key());
        out << "blob " << b.id << ' ' << to_hex(b.checksum) << ' ' << b.length << ' ' << to_hex(sha256(bytes)) << '\n';
    }
    return out.str();
}

} // namespace pndb::testing
