#pragma once

// Document exchange: deterministic XML export, XML import and the
// pipe-separated table import format used for hand-entered parameters.
//
// XML shape (two-space indent, '\n' newlines, attribute order fixed):
//
//   <primary-numbers version="1">
//     <collection class="C" instance="i" scope="/S" dict-version="1" object-version="1">
//       <param name="Rmax" type="float" unit="mm" comment="Outer Radius">1400.0</param>
//     </collection>
//   </primary-numbers>
//
// Table format: '#class', '#instance', '#scope' directives open a block;
// data rows are `name|type|value|unit|comment`. Lines starting with "# " or
// "##" and blank lines are ignored.

#include "pndb/store.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pndb {

struct ImportReport {
    std::size_t collections_imported = 0;
    std::size_t collections_unchanged = 0;
    std::size_t dictionaries_registered = 0;
    std::vector<std::string> warnings;
    std::vector<ObjectRef> objects;
};

/// Parsed but not yet stored collection.
struct ImportedCollection {
    std::string class_name;
    std::string instance_name;
    ScopePath scope;
    std::vector<FieldSpec> fields;
    std::vector<ParameterValue> values;
    /// dict-version attribute of an XML collection; 0 for tables.
    std::uint32_t source_dict_version = 0;
};

/// Latest revision of every collection (optionally at or under `scope`),
/// ordered by (scope, class, instance).
std::string export_xml(const Store& store, const std::optional<ScopePath>& scope = {});

/// Errors: XmlParseError, ValidationFailed, IncompatibleEvolution,
/// MalformedLiteral. Transactional: on error nothing is committed.
ImportReport import_xml(Store& store, std::string_view document);
std::vector<ImportedCollection> parse_xml_document(std::string_view document);

/// Errors: MalformedRow, ValidationFailed, IncompatibleEvolution.
ImportReport import_table(Store& store, std::string_view text);
std::vector<ImportedCollection> parse_table(std::string_view text);

/// Registers inferred dictionaries and stores the collections in one
/// transaction. A collection equal to the latest stored revision (same
/// dictionary, scope and values) is skipped and counted as unchanged.
ImportReport import_collections(Store& store, std::vector<ImportedCollection> collections);

} // namespace pndb
