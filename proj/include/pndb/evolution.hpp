#pragma once

// Dictionary diffing and transient views. The stored dictionary chain of a
// class is authoritative; a view re-shapes one stored revision to any other
// dictionary version of the same class without touching the stored data.

#include "pndb/model.hpp"

#include <span>
#include <variant>

namespace pndb {

class Store;
struct ObjectRef;

struct AddField {
    FieldSpec spec;
    ParameterValue fill;
    bool operator==(const AddField&) const = default;
};

struct DropField {
    std::string name;
    bool operator==(const DropField&) const = default;
};

/// Int -> Float on a same-name field; the only retyping allowed.
struct WidenType {
    std::string name;
    bool operator==(const WidenType&) const = default;
};

/// permutation[i] is the position, in the layout left after drops and
/// appended adds, of the target dictionary's field i.
struct Reorder {
    std::vector<std::size_t> permutation;
    bool operator==(const Reorder&) const = default;
};

using EvolutionAction = std::variant<AddField, DropField, WidenType, Reorder>;

struct EvolutionPlan {
    std::vector<EvolutionAction> actions;

    bool empty() const noexcept { return actions.empty(); }
};

/// Field identity is by name. Throws IncompatibleEvolution for a same-name
/// retyping other than Int -> Float, or an added blob field without a
/// default (there is nothing to fill it with).
EvolutionPlan diff_dictionaries(const DataDictionary& old_dict, const DataDictionary& new_dict);

struct ViewNotice {
    enum class Kind { Filled, Dropped, Widened };
    Kind kind;
    std::string name;
    bool operator==(const ViewNotice&) const = default;
};

std::string describe(const ViewNotice& notice);

/// Applies a plan to values laid out per `from`; appends notices.
std::vector<ParameterValue> apply_plan(const EvolutionPlan& plan, const DataDictionary& from,
                                       std::vector<ParameterValue> values, std::vector<ViewNotice>& notices);

struct ViewResult {
    CollectionInstance instance;
    std::vector<ViewNotice> notices;
};

/// Walks the linear chain one version at a time from the instance's
/// dict_version to `target`, forwards or backwards. `chain[i]` must be
/// dict_version i+1.
ViewResult view_through_chain(const CollectionInstance& instance, std::span<const DataDictionary> chain,
                              std::uint32_t target);

/// Errors: NotFound, IncompatibleEvolution.
ViewResult materialize_view(const Store& store, const ObjectRef& ref, std::uint32_t target_dict_version);

} // namespace pndb
