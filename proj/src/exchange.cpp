#include "pndb/exchange.hpp"

#include <algorithm>
#include <map>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <sstream>

namespace pndb {

namespace {

void append_escaped(std::string& out, std::string_view s, bool attribute) {
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"':
            if (attribute) out += "&quot;";
            else out.push_back(c);
            break;
        case '\n':
            if (attribute) out += "&#10;";
            else out.push_back(c);
            break;
        case '\t':
            if (attribute) out += "&#9;";
            else out.push_back(c);
            break;
        case '\r': out += "&#13;"; break;
        default: out.push_back(c);
        }
    }
}

void attr(std::string& out, std::string_view name, std::string_view value) {
    out += ' ';
    out += name;
    out += "=\"";
    append_escaped(out, value, true);
    out += '"';
}

[[noreturn]] void xml_error(const std::string& detail) { throw Error(ErrorCode::XmlParseError, detail); }

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

} // namespace

std::string export_xml(const Store& store, const std::optional<ScopePath>& scope) {
    return store.read([&](const Catalog& catalog) {
        auto objects = catalog.latest_objects(scope);
        if (objects.empty()) return std::string("<primary-numbers version=\"1\"/>\n");
        std::string out = "<primary-numbers version=\"1\">\n";
        for (const auto& obj : objects) {
            const auto& dict = catalog.dictionary(obj.class_name, obj.dict_version);
            out += "  <collection";
            attr(out, "class", obj.class_name);
            attr(out, "instance", obj.instance_name);
            attr(out, "scope", obj.scope.canonical());
            attr(out, "dict-version", std::to_string(obj.dict_version));
            attr(out, "object-version", std::to_string(obj.object_version));
            if (dict.fields.empty()) {
                out += "/>\n";
                continue;
            }
            out += ">\n";
            for (std::size_t i = 0; i < dict.fields.size(); ++i) {
                const auto& f = dict.fields[i];
                out += "    <param";
                attr(out, "name", f.name);
                attr(out, "type", type_tag(f.type));
                if (!f.unit.empty()) attr(out, "unit", f.unit);
                if (!f.comment.empty()) attr(out, "comment", f.comment);
                out += '>';
                append_escaped(out, render(obj.values[i]), false);
                out += "</param>\n";
            }
            out += "  </collection>\n";
        }
        out += "</primary-numbers>\n";
        return out;
    });
}

std::vector<ImportedCollection> parse_xml_document(std::string_view document) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream in{std::string(document)};
        pt::read_xml(in, tree);
    } catch (const pt::xml_parser_error& e) {
        xml_error(e.what());
    }
    auto root = tree.get_child_optional("primary-numbers");
    if (!root || tree.size() != 1) xml_error("document root must be <primary-numbers>");
    std::vector<ImportedCollection> out;
    for (const auto& [tag, node] : *root) {
        if (tag == "<xmlattr>" || tag == "<xmlcomment>") continue;
        if (tag != "collection") xml_error("unexpected element <" + tag + "> under <primary-numbers>");
        ImportedCollection c;
        auto cls = node.get_optional<std::string>("<xmlattr>.class");
        auto inst = node.get_optional<std::string>("<xmlattr>.instance");
        if (!cls || !inst) xml_error("<collection> needs class and instance attributes");
        c.class_name = *cls;
        c.instance_name = *inst;
        c.scope = ScopePath::parse(node.get<std::string>("<xmlattr>.scope", "/"));
        auto dv = node.get<std::string>("<xmlattr>.dict-version", "0");
        if (dv.empty() || dv.size() > 9 || dv.find_first_not_of("0123456789") != std::string::npos) {
            xml_error("dict-version '" + dv + "' is not a number");
        }
        c.source_dict_version = static_cast<std::uint32_t>(std::stoul(dv));
        for (const auto& [ptag, param] : node) {
            if (ptag == "<xmlattr>" || ptag == "<xmlcomment>") continue;
            if (ptag != "param") xml_error("unexpected element <" + ptag + "> in <collection>");
            auto name = param.get_optional<std::string>("<xmlattr>.name");
            auto type = param.get_optional<std::string>("<xmlattr>.type");
            if (!name || !type) xml_error("<param> needs name and type attributes");
            for (const auto& [child, _] : param) {
                if (child != "<xmlattr>" && child != "<xmlcomment>") {
                    xml_error("<param " + *name + "> must contain text only");
                }
            }
            FieldSpec f;
            f.name = *name;
            f.type = parse_type_tag(*type);
            f.unit = param.get<std::string>("<xmlattr>.unit", "");
            f.comment = param.get<std::string>("<xmlattr>.comment", "");
            c.values.push_back(parse_literal(f.type, param.data()));
            c.fields.push_back(std::move(f));
        }
        out.push_back(std::move(c));
    }
    return out;
}

ImportReport import_xml(Store& store, std::string_view document) {
    return import_collections(store, parse_xml_document(document));
}

std::vector<ImportedCollection> parse_table(std::string_view text) {
    std::vector<ImportedCollection> out;
    std::size_t line_no = 0;
    auto row_error = [&](const std::string& detail) -> void {
        throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": " + detail);
    };
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        auto trimmed = trim(line);
        if (trimmed.empty()) continue;
        if (trimmed.front() == '#') {
            if (trimmed.size() == 1 || trimmed[1] == '#' || trimmed[1] == ' ') continue;
            auto space = trimmed.find_first_of(" \t");
            auto directive = trimmed.substr(1, space == std::string_view::npos ? std::string_view::npos : space - 1);
            auto arg = space == std::string_view::npos ? std::string_view{} : trim(trimmed.substr(space));
            if (arg.empty()) row_error("directive #" + std::string(directive) + " needs a value");
            if (directive == "class") {
                ImportedCollection c;
                c.class_name = std::string(arg);
                c.instance_name = "default";
                out.push_back(std::move(c));
            } else if (directive == "instance" || directive == "scope") {
                if (out.empty()) row_error("#" + std::string(directive) + " before #class");
                if (!out.back().fields.empty()) row_error("#" + std::string(directive) + " after data rows");
                if (directive == "instance") {
                    out.back().instance_name = std::string(arg);
                } else {
                    out.back().scope = ScopePath::parse(arg);
                }
            } else {
                row_error("unknown directive #" + std::string(directive));
            }
            continue;
        }
        if (out.empty()) row_error("data row before #class");
        std::vector<std::string_view> cols;
        std::size_t start = 0;
        while (cols.size() < 4) {
            auto bar = trimmed.find('|', start);
            if (bar == std::string_view::npos) break;
            cols.push_back(trim(trimmed.substr(start, bar - start)));
            start = bar + 1;
        }
        if (cols.size() < 4) {
            row_error("expected name|type|value|unit|comment, got " + std::to_string(cols.size() + 1) + " fields");
        }
        cols.push_back(trim(trimmed.substr(start)));
        FieldSpec f;
        f.name = std::string(cols[0]);
        f.unit = std::string(cols[3]);
        f.comment = std::string(cols[4]);
        try {
            f.type = parse_type_tag(cols[1]);
            out.back().values.push_back(parse_literal(f.type, cols[2]));
        } catch (const Error& e) {
            row_error(e.what());
        }
        out.back().fields.push_back(std::move(f));
    }
    return out;
}

ImportReport import_table(Store& store, std::string_view text) {
    return import_collections(store, parse_table(text));
}

ImportReport import_collections(Store& store, std::vector<ImportedCollection> collections) {
    if (collections.empty()) return {};
    // Older shapes of a class first, so the inferred dictionaries evolve in
    // the same direction as they did in the source store.
    std::map<std::string, std::size_t> first_seen;
    for (const auto& c : collections) first_seen.emplace(c.class_name, first_seen.size());
    std::stable_sort(collections.begin(), collections.end(), [&](const auto& a, const auto& b) {
        return std::pair(first_seen[a.class_name], a.source_dict_version) <
               std::pair(first_seen[b.class_name], b.source_dict_version);
    });
    return store.transact([&](Transaction& txn) {
        ImportReport report;
        for (auto& c : collections) {
            const auto& view = txn.view();
            std::uint32_t before = view.has_class(c.class_name) ? view.dictionary(c.class_name).dict_version : 0;
            auto [cls, dict_version] = txn.register_class(c.class_name, c.fields);
            if (dict_version != before) {
                ++report.dictionaries_registered;
                if (before != 0) {
                    report.warnings.push_back(c.class_name + ": dictionary evolved to version " +
                                              std::to_string(dict_version));
                }
            }
            if (auto latest = txn.view().latest_object(c.class_name, c.instance_name)) {
                if (latest->dict_version == dict_version && latest->scope == c.scope && latest->values == c.values) {
                    ++report.collections_unchanged;
                    report.objects.push_back({c.class_name, c.instance_name, latest->object_version, dict_version});
                    continue;
                }
            }
            report.objects.push_back(txn.put_object(c.class_name, c.instance_name, c.scope, std::move(c.values)));
            ++report.collections_imported;
        }
        return report;
    });
}

} // namespace pndb
