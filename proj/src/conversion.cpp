#include "pndb/conversion.hpp"

#include "pndb/evolution.hpp"
#include "pndb/store.hpp"

#include <charconv>

namespace pndb {

namespace {

constexpr std::string_view kScheme = "nova://";

[[noreturn]] void malformed(const std::string& detail) { throw Error(ErrorCode::MalformedAddress, detail); }

std::uint32_t parse_version(std::string_view text, std::string_view what) {
    if (text.empty()) malformed(std::string(what) + " is missing");
    if (text.size() > 1 && text.front() == '0') malformed(std::string(what) + " has a leading zero");
    std::uint32_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        malformed(std::string(what) + " is not a decimal number: " + std::string(text));
    }
    if (v == 0) malformed(std::string(what) + " must be >= 1");
    return v;
}

} // namespace

std::string externalize(const OpaqueAddress& addr) {
    return std::string(kScheme) + addr.class_name + "/" + addr.instance_name + "?v=" +
           std::to_string(addr.object_version) + "&d=" + std::to_string(addr.dict_version);
}

OpaqueAddress internalize(std::string_view text) {
    if (text.substr(0, kScheme.size()) != kScheme) malformed("address must start with nova://");
    auto rest = text.substr(kScheme.size());
    auto slash = rest.find('/');
    if (slash == std::string_view::npos) malformed("address has no instance component");
    auto query = rest.find('?', slash);
    if (query == std::string_view::npos) malformed("address has no version query");
    OpaqueAddress addr;
    addr.class_name = std::string(rest.substr(0, slash));
    addr.instance_name = std::string(rest.substr(slash + 1, query - slash - 1));
    if (!is_identifier(addr.class_name)) malformed("bad class name '" + addr.class_name + "'");
    if (!is_identifier(addr.instance_name)) malformed("bad instance name '" + addr.instance_name + "'");
    auto q = rest.substr(query + 1);
    if (q.substr(0, 2) != "v=") malformed("query must start with v=");
    auto amp = q.find("&d=");
    if (amp == std::string_view::npos) malformed("query must contain &d=");
    addr.object_version = parse_version(q.substr(2, amp - 2), "object version");
    addr.dict_version = parse_version(q.substr(amp + 3), "dictionary version");
    return addr;
}

const ParameterValue& GenericCollection::at(std::string_view name) const {
    for (const auto& [n, v] : params) {
        if (n == name) return v;
    }
    throw Error(ErrorCode::NotFound, "no parameter '" + std::string(name) + "'");
}

ConverterSpec generic_converter(std::string class_name) {
    ConverterSpec spec;
    spec.class_name = std::move(class_name);
    spec.build = [](const CollectionInstance& inst, const DataDictionary& dict, const BlobLoader&) -> std::any {
        GenericCollection out;
        out.address = {inst.class_name, inst.instance_name, inst.object_version, inst.dict_version};
        out.scope = inst.scope;
        for (std::size_t i = 0; i < dict.fields.size(); ++i) out.params.emplace_back(dict.fields[i].name, inst.values[i]);
        return out;
    };
    return spec;
}

void ConverterRegistry::register_converter(ConverterSpec spec) {
    require_identifier(spec.class_name, "converter class");
    if (converters_.contains(spec.class_name)) {
        throw Error(ErrorCode::DuplicateConverter, "converter for '" + spec.class_name + "' already registered");
    }
    auto name = spec.class_name;
    converters_.emplace(std::move(name), std::move(spec));
}

const ConverterSpec* ConverterRegistry::find(std::string_view class_name) const {
    auto it = converters_.find(class_name);
    return it == converters_.end() ? nullptr : &it->second;
}

const ConverterSpec& ConverterRegistry::lookup(std::string_view class_name) const {
    if (const auto* spec = find(class_name)) return *spec;
    if (!generic_fallback_) throw Error(ErrorCode::NoConverter, "no converter for '" + std::string(class_name) + "'");
    auto it = generic_.find(class_name);
    if (it == generic_.end()) it = generic_.emplace(std::string(class_name), generic_converter(std::string(class_name))).first;
    return it->second;
}

void TransientStore::reset() {
    context_.reset();
    entries_.clear();
    loads_ = 0;
}

void TransientStore::reset(RetrievalContext ctx) {
    reset();
    context_ = std::move(ctx);
}

const TransientStore::Entry* TransientStore::find(std::string_view key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

TransientObject retrieve(const Store& store, const ConverterRegistry& registry, TransientStore& tstore,
                         const std::string& key, const RetrievalContext& ctx) {
    if (tstore.context_ && *tstore.context_ != ctx) {
        throw Error(ErrorCode::CacheContextMismatch, "transient store is bound to another context; reset it first");
    }
    if (const auto* hit = tstore.find(key)) return hit->object;

    OpaqueAddress address = key.find("://") != std::string::npos
                                ? internalize(key)
                                : internalize(store.iov_resolve(key, ctx.tag, ctx.timestamp));
    const auto& converter = registry.lookup(address.class_name);

    auto [instance, dict] = store.read([&](const Catalog& c) {
        auto stored = c.get_object(address.class_name, address.instance_name, address.object_version);
        auto view = view_through_chain(stored, c.dictionaries(address.class_name), address.dict_version);
        return std::make_pair(std::move(view.instance), c.dictionary(address.class_name, address.dict_version));
    });
    BlobLoader blobs = [&store](const BlobKey& k) { return store.get_blob(k); };
    auto object = std::make_shared<const std::any>(converter.build(instance, dict, blobs));

    tstore.context_ = ctx;
    tstore.entries_.emplace(key, TransientStore::Entry{object, address});
    ++tstore.loads_;
    return object;
}

} // namespace pndb
