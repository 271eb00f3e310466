#include "sieve/types.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "sieve/error.hpp"

namespace sieve {

const ConditionSet* Dataset::find_condition(std::string_view name) const {
    for (const auto& c : conditions) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

const Instance* Dataset::find_instance(std::string_view id) const {
    auto it = std::lower_bound(instances.begin(), instances.end(), id,
                               [](const Instance& a, std::string_view b) { return a.id < b; });
    if (it != instances.end() && it->id == id) return &*it;
    return nullptr;
}

double normalize_rating(double value, const RatingScale& scale) {
    if (!(scale.max > scale.min)) {
        throw ValidationError("degenerate scale: max (" + std::to_string(scale.max) +
                              ") must exceed min (" + std::to_string(scale.min) + ")");
    }
    const double unit = (value - scale.min) / (scale.max - scale.min);
    return std::clamp(unit, 0.0, 1.0);
}

double raw_from_unit(double unit, const RatingScale& scale) {
    double raw = scale.min + unit * (scale.max - scale.min);
    // A couple of ulp nudges cover the rounding of the forward map.
    for (int i = 0; i < 8; ++i) {
        const double back = normalize_rating(raw, scale);
        if (back == unit) break;
        raw = std::nextafter(raw, back < unit ? HUGE_VAL : -HUGE_VAL);
    }
    return raw;
}

ValidationReport validate_dataset(const Dataset& d) {
    ValidationReport report;
    auto add = [&](std::string code, std::string message) {
        report.push_back({std::move(code), std::move(message)});
    };

    if (!(d.scale.max > d.scale.min)) {
        add("degenerate scale", "scale max must exceed scale min");
    }

    std::set<std::string_view> instance_ids;
    for (const auto& inst : d.instances) {
        if (!instance_ids.insert(inst.id).second) {
            add("duplicate instance", "instance id repeated: '" + inst.id + "'");
        }
    }

    std::set<std::string_view> condition_names;
    for (const auto& cond : d.conditions) {
        if (!condition_names.insert(cond.name).second) {
            add("duplicate condition", "condition name repeated: '" + cond.name + "'");
        }

        std::set<std::pair<std::string_view, std::string_view>> seen;
        std::map<std::string_view, int> per_instance;
        for (const auto& ann : cond.annotations) {
            if (!(ann.lower >= 0.0 && ann.lower <= ann.upper && ann.upper <= 1.0)) {
                add("invalid range", "condition '" + cond.name + "', instance '" +
                                         ann.instance_id + "', annotator '" + ann.annotator_id +
                                         "': endpoints must satisfy 0 <= lower <= upper <= 1");
            }
            if (instance_ids.find(ann.instance_id) == instance_ids.end()) {
                add("dangling instance", "condition '" + cond.name + "' references unknown instance '" +
                                             ann.instance_id + "'");
            }
            if (!seen.insert({ann.instance_id, ann.annotator_id}).second) {
                add("duplicate annotation", "condition '" + cond.name + "': annotator '" +
                                                ann.annotator_id + "' repeated for instance '" +
                                                ann.instance_id + "'");
            }
            ++per_instance[ann.instance_id];
        }
        for (const auto& [id, count] : per_instance) {
            if (count < 2) {
                add("insufficient annotators",
                    "condition '" + cond.name + "', instance '" + std::string(id) + "': " +
                        std::to_string(count) + " annotation(s); at least 2 required");
            }
        }
    }
    return report;
}

}  // namespace sieve
