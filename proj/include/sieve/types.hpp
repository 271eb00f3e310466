#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sieve {

// Canonical condition names used by the intervention simulation.
inline constexpr std::string_view kBaselineCondition = "baseline";
inline constexpr std::string_view kContextCondition = "context";
inline constexpr std::string_view kDeliberationCondition = "deliberation";

// Raw rating scale of the source task (e.g. 0-10 relatedness, 1-7 toxicity).
// All stored annotation endpoints are normalized to [0, 1]; the scale is kept
// so files can round-trip in raw units.
struct RatingScale {
    double min = 0.0;
    double max = 1.0;
    std::string label;

    bool operator==(const RatingScale&) const = default;
};

// One annotator's acceptable rating interval for one instance, normalized.
// Invariant: 0 <= lower <= upper <= 1.
struct RangeAnnotation {
    std::string instance_id;
    std::string annotator_id;
    double lower = 0.0;
    double upper = 0.0;

    double width() const { return upper - lower; }

    bool operator==(const RangeAnnotation&) const = default;
};

struct Instance {
    std::string id;
    std::string content;
    std::optional<std::string> context;
    std::optional<std::string> group;

    bool operator==(const Instance&) const = default;
};

// A complete annotation pass over the instances under one treatment.
// Annotations are kept sorted by (instance_id, annotator_id).
struct ConditionSet {
    std::string name;
    std::vector<RangeAnnotation> annotations;

    bool operator==(const ConditionSet&) const = default;
};

// Immutable after ingestion; canonical ordering throughout (instances by id,
// conditions by name, annotations by instance then annotator) so downstream
// computation never depends on file layout.
struct Dataset {
    RatingScale scale;
    std::vector<Instance> instances;
    std::vector<ConditionSet> conditions;

    const ConditionSet* find_condition(std::string_view name) const;
    const Instance* find_instance(std::string_view id) const;

    bool operator==(const Dataset&) const = default;
};

struct Violation {
    std::string code;
    std::string message;
};

using ValidationReport = std::vector<Violation>;

// Linear map of a raw-scale value onto [0, 1], clamped at the ends.
// Throws ValidationError when the scale is degenerate (max <= min).
double normalize_rating(double value, const RatingScale& scale);

// Inverse of normalize_rating, nudged so that re-normalizing the returned raw
// value recovers `unit` exactly; keeps file round-trips lossless.
double raw_from_unit(double unit, const RatingScale& scale);

// Enumerates every invariant violation; an empty report means valid.
ValidationReport validate_dataset(const Dataset& d);

}  // namespace sieve
