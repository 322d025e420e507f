#include "pndb/evolution.hpp"

#include "pndb/store.hpp"

#include <algorithm>

namespace pndb {

namespace {

[[noreturn]] void incompatible(const std::string& name, PrimitiveType from, PrimitiveType to) {
    throw Error(ErrorCode::IncompatibleEvolution, "field '" + name + "' cannot change from " +
                                                      std::string(type_tag(from)) + " to " +
                                                      std::string(type_tag(to)));
}

} // namespace

EvolutionPlan diff_dictionaries(const DataDictionary& old_dict, const DataDictionary& new_dict) {
    if (old_dict.class_name != new_dict.class_name) {
        throw Error(ErrorCode::IncompatibleEvolution,
                    "cannot diff " + old_dict.class_name + " against " + new_dict.class_name);
    }
    EvolutionPlan plan;
    std::vector<std::string> layout;
    for (const auto& f : old_dict.fields) {
        const FieldSpec* target = new_dict.find(f.name);
        if (target == nullptr) {
            plan.actions.emplace_back(DropField{f.name});
            continue;
        }
        if (target->type != f.type) {
            if (f.type == PrimitiveType::Int && target->type == PrimitiveType::Float) {
                plan.actions.emplace_back(WidenType{f.name});
            } else {
                incompatible(f.name, f.type, target->type);
            }
        }
        layout.push_back(f.name);
    }
    for (const auto& f : new_dict.fields) {
        if (old_dict.find(f.name) != nullptr) continue;
        if (f.type == PrimitiveType::BlobRef && !f.default_value) {
            throw Error(ErrorCode::IncompatibleEvolution, "added blob field '" + f.name + "' needs a default");
        }
        plan.actions.emplace_back(AddField{f, default_value(f)});
        layout.push_back(f.name);
    }
    Reorder reorder;
    bool identity = true;
    for (std::size_t i = 0; i < new_dict.fields.size(); ++i) {
        auto pos = static_cast<std::size_t>(
            std::find(layout.begin(), layout.end(), new_dict.fields[i].name) - layout.begin());
        reorder.permutation.push_back(pos);
        identity = identity && pos == i;
    }
    if (!identity) plan.actions.emplace_back(std::move(reorder));
    return plan;
}

std::string describe(const ViewNotice& notice) {
    switch (notice.kind) {
    case ViewNotice::Kind::Filled: return "Filled(" + notice.name + ")";
    case ViewNotice::Kind::Dropped: return "Dropped(" + notice.name + ")";
    case ViewNotice::Kind::Widened: return "Widened(" + notice.name + ")";
    }
    return "?";
}

std::vector<ParameterValue> apply_plan(const EvolutionPlan& plan, const DataDictionary& from,
                                       std::vector<ParameterValue> values, std::vector<ViewNotice>& notices) {
    std::vector<std::pair<std::string, ParameterValue>> layout;
    layout.reserve(values.size());
    for (std::size_t i = 0; i < from.fields.size() && i < values.size(); ++i) {
        layout.emplace_back(from.fields[i].name, std::move(values[i]));
    }
    auto locate = [&](const std::string& name) {
        return std::find_if(layout.begin(), layout.end(), [&](const auto& p) { return p.first == name; });
    };
    std::vector<ParameterValue> out;
    for (const auto& action : plan.actions) {
        if (const auto* drop = std::get_if<DropField>(&action)) {
            layout.erase(locate(drop->name));
            notices.push_back({ViewNotice::Kind::Dropped, drop->name});
        } else if (const auto* widen = std::get_if<WidenType>(&action)) {
            auto it = locate(widen->name);
            it->second = ParameterValue::real(static_cast<double>(it->second.as_int()));
            notices.push_back({ViewNotice::Kind::Widened, widen->name});
        } else if (const auto* add = std::get_if<AddField>(&action)) {
            layout.emplace_back(add->spec.name, add->fill);
            notices.push_back({ViewNotice::Kind::Filled, add->spec.name});
        } else if (const auto* reorder = std::get_if<Reorder>(&action)) {
            std::vector<std::pair<std::string, ParameterValue>> next;
            next.reserve(reorder->permutation.size());
            for (auto p : reorder->permutation) next.push_back(layout[p]);
            layout = std::move(next);
        }
    }
    out.reserve(layout.size());
    for (auto& p : layout) out.push_back(std::move(p.second));
    return out;
}

ViewResult view_through_chain(const CollectionInstance& instance, std::span<const DataDictionary> chain,
                              std::uint32_t target) {
    if (target == 0 || target > chain.size()) {
        throw Error(ErrorCode::NotFound, instance.class_name + " has no dictionary version " + std::to_string(target));
    }
    if (instance.dict_version == 0 || instance.dict_version > chain.size()) {
        throw Error(ErrorCode::NotFound,
                    instance.class_name + " has no dictionary version " + std::to_string(instance.dict_version));
    }
    ViewResult result{instance, {}};
    auto& values = result.instance.values;
    std::uint32_t at = instance.dict_version;
    while (at != target) {
        std::uint32_t next = at < target ? at + 1 : at - 1;
        const auto& from = chain[at - 1];
        const auto& to = chain[next - 1];
        values = apply_plan(diff_dictionaries(from, to), from, std::move(values), result.notices);
        at = next;
    }
    result.instance.dict_version = target;
    return result;
}

ViewResult materialize_view(const Store& store, const ObjectRef& ref, std::uint32_t target_dict_version) {
    auto instance = store.get_object(ref.class_name, ref.instance_name, ref.object_version);
    auto chain = store.dictionaries(ref.class_name);
    return view_through_chain(instance, chain, target_dict_version);
}

} // namespace pndb
