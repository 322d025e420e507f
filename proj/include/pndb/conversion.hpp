#pragma once

// Conversion service: turns stored collections into transient objects held
// in a per-context transient store. Callers name what they want either by a
// direct address ("nova://Class/instance?v=N&d=M") or by an IOV folder path,
// in which case the address is resolved from the folder at the context's
// timestamp and tag.

#include "pndb/iov.hpp"
#include "pndb/model.hpp"

#include <any>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

namespace pndb {

class Store;

struct OpaqueAddress {
    std::string class_name;
    std::string instance_name;
    std::uint32_t object_version = 1;
    std::uint32_t dict_version = 1;

    bool operator==(const OpaqueAddress&) const = default;
};

/// `nova://<class>/<instance>?v=<object_version>&d=<dict_version>`
std::string externalize(const OpaqueAddress& addr);

/// Strict inverse of externalize: only strings externalize can produce are
/// accepted (no leading zeros, no extra parameters). Errors: MalformedAddress.
OpaqueAddress internalize(std::string_view text);

struct RetrievalContext {
    Timestamp timestamp = 0;
    std::string tag = std::string(kHeadTag);

    bool operator==(const RetrievalContext&) const = default;
};

using TransientObject = std::shared_ptr<const std::any>;
using BlobLoader = std::function<Bytes(const BlobKey&)>;

struct ConverterSpec {
    std::string class_name;
    std::function<std::any(const CollectionInstance&, const DataDictionary&, const BlobLoader&)> build;
};

/// Name -> value view of a collection; what the generic converter builds.
struct GenericCollection {
    OpaqueAddress address;
    ScopePath scope;
    std::vector<std::pair<std::string, ParameterValue>> params;

    const ParameterValue& at(std::string_view name) const;
    bool operator==(const GenericCollection&) const = default;
};

ConverterSpec generic_converter(std::string class_name);

class ConverterRegistry {
public:
    /// Errors: DuplicateConverter.
    void register_converter(ConverterSpec spec);
    /// Classes without a registered converter fall back to the generic one.
    void enable_generic_fallback(bool on = true) { generic_fallback_ = on; }

    const ConverterSpec* find(std::string_view class_name) const;
    /// find() plus fallback. Errors: NoConverter.
    const ConverterSpec& lookup(std::string_view class_name) const;

private:
    std::map<std::string, ConverterSpec, std::less<>> converters_;
    bool generic_fallback_ = false;
    mutable std::map<std::string, ConverterSpec, std::less<>> generic_;
};

/// Per-context cache of built objects. Confined to one worker.
class TransientStore {
public:
    struct Entry {
        TransientObject object;
        OpaqueAddress source;
    };

    /// Drops every cached object and unbinds the context.
    void reset();
    void reset(RetrievalContext ctx);

    const std::optional<RetrievalContext>& context() const noexcept { return context_; }
    const Entry* find(std::string_view key) const;
    std::size_t size() const noexcept { return entries_.size(); }
    /// Number of objects loaded from persistent storage since the last reset.
    std::size_t loads() const noexcept { return loads_; }

private:
    friend TransientObject retrieve(const Store&, const ConverterRegistry&, TransientStore&, const std::string&,
                                    const RetrievalContext&);
    std::optional<RetrievalContext> context_;
    std::map<std::string, Entry, std::less<>> entries_;
    std::size_t loads_ = 0;
};

/// Errors: NoValidEntry, UnknownFolder, UnknownTag, MalformedAddress,
/// NotFound, NoConverter, CacheContextMismatch.
TransientObject retrieve(const Store& store, const ConverterRegistry& registry, TransientStore& tstore,
                         const std::string& key, const RetrievalContext& ctx);

template <typename T>
const T& retrieve_as(const Store& store, const ConverterRegistry& registry, TransientStore& tstore,
                     const std::string& key, const RetrievalContext& ctx) {
    auto obj = retrieve(store, registry, tstore, key, ctx);
    // The object stays alive in tstore until the next reset.
    return std::any_cast<const T&>(*obj);
}

} // namespace pndb
