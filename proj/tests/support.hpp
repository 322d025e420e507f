#pragma once

// Shared fixtures for the test suites: temporary store directories, the
// mother-volume sample, random mutation scripts, and a read-answer dump used as
// the equivalence oracle between stores.

#include "pndb/iov.hpp"
#include "pndb/model.hpp"
#include "pndb/store.hpp"

#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace pndb::testing {

class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

/// Fresh store in a temp dir; fsync off to keep suites fast.
std::unique_ptr<Store> make_store(const std::filesystem::path& root, StoreRole role = StoreRole::Primary);
std::unique_ptr<Store> reopen(std::unique_ptr<Store> store, StoreMode mode);

FieldSpec field(std::string name, PrimitiveType type, std::string comment = "", std::string unit = "");

/// ATLASMotherVolume{Version:Int, Rmin:Float, Rmax:Float, Zmax:Float}
std::vector<FieldSpec> mother_volume_fields();
/// Version=2, Rmin=0.0, Rmax=1400.0, Zmax=2350.0
std::vector<ParameterValue> mother_volume_values();
inline constexpr const char* kMotherVolumeTable =
    "#class ATLASMotherVolume\n"
    "#instance default\n"
    "#scope /ATLAS\n"
    "Version|int|2||2001 VERSION WITH ENDCAP SHIFTED B\n"
    "Rmin|float|0.0||Inner Radius\n"
    "Rmax|float|1400.0||Outer Radius\n"
    "Zmax|float|2350.0||Maximum Z\n";

ParameterValue random_value(std::mt19937_64& rng, PrimitiveType type);
PrimitiveType random_type(std::mt19937_64& rng, bool allow_blob = true);
std::string random_identifier(std::mt19937_64& rng, std::size_t max_len = 8);

std::vector<FieldSpec> random_fields(std::mt19937_64& rng);
/// Next field list: maybe a drop, maybe Int->Float widenings, always one
/// added field, maybe a shuffle.
std::vector<FieldSpec> evolve_fields(std::mt19937_64& rng, std::vector<FieldSpec> fields);
/// Dictionaries 1..length of one class.
std::vector<DataDictionary> random_chain(std::mt19937_64& rng, const std::string& class_name, std::size_t length);

/// Expected values of a view, computed by walking a name->value map one
/// version at a time. nullopt when some step would narrow a type.
std::optional<std::vector<ParameterValue>> expected_view(const std::vector<DataDictionary>& chain,
                                                         std::uint32_t from, const std::vector<ParameterValue>& values,
                                                         std::uint32_t to);

/// `classes` classes with ~`params_per_class` random fields each, one
/// version-1 instance per class under a random scope. Exports of such stores
/// survive an import into an empty store byte-for-byte.
void populate_flat_corpus(Store& store, std::mt19937_64& rng, std::size_t classes, std::size_t params_per_class);

/// Brute-force IOV model: records every store/tag call and resolves by a
/// linear scan over all intervals it derived itself.
class IovOracle {
public:
    void store(const std::string& folder, Timestamp since, const std::string& payload);
    void tag(const std::string& folder, const std::string& tag);
    /// nullopt when no interval contains t.
    std::optional<std::string> resolve(const std::string& folder, const std::string& tag, Timestamp t) const;
    std::vector<std::tuple<Timestamp, Timestamp, std::string>> intervals(const std::string& folder,
                                                                          const std::string& tag) const;

private:
    // (folder, tag) -> insertion-ordered (since, payload)
    std::map<std::pair<std::string, std::string>, std::vector<std::pair<Timestamp, std::string>>> stored_;
};

/// Drives a store with random valid mutations; every call commits exactly
/// one change record.
class MutationScript {
public:
    explicit MutationScript(std::uint64_t seed) : rng_(seed) {}
    void step(Store& store);
    void run(Store& store, std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) step(store);
    }
    std::mt19937_64& rng() { return rng_; }

private:
    std::mt19937_64 rng_;
    std::size_t blob_counter_ = 0;
};

/// Text rendering of the answer to every read query a store supports:
/// classes, all dictionary versions, every object revision, scope listings
/// for every scope, blob bytes, folders, tags, entries and resolves at
/// every interval boundary. Two stores answer identically iff dumps match.
std::string dump_reads(const Store& store);

} // namespace pndb::testing
