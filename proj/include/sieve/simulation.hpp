#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sieve/policy.hpp"
#include "sieve/stats.hpp"
#include "sieve/types.hpp"

namespace sieve {

// A counterfactual annotation round: each instance's annotations are drawn
// verbatim from the condition matching its assigned intervention.
struct ComposedRound {
    // (instance_id, source condition), sorted by instance_id.
    std::vector<std::pair<std::string, std::string>> sources;
    // Flat annotations in canonical (instance, annotator) order.
    std::vector<RangeAnnotation> annotations;
    // Instances the round re-annotated; composition counts non-None
    // decisions, uniform rounds count every instance.
    int affected_count = 0;
};

struct RoundSummary {
    double mean_ambiguity = 0.0;
    double mean_disagreement = 0.0;
    ConfInterval ci_ambiguity;
    ConfInterval ci_disagreement;
    int instance_count = 0;
    int affected_count = 0;
};

// Fig.-style slice analysis: members are the top ceil(fraction * n) instances
// by one baseline metric (ties included); their mean scores are then tracked
// across every condition.
struct SliceConditionStats {
    std::string condition;
    double mean_ambiguity = 0.0;
    double mean_disagreement = 0.0;
    // 100 * (baseline - condition) / baseline; NaN when the baseline mean is 0.
    double pct_change_ambiguity = 0.0;
    double pct_change_disagreement = 0.0;
};

struct SliceReport {
    std::string slice;  // "most_ambiguous" | "most_disagreement"
    std::vector<std::string> members;
    std::vector<SliceConditionStats> per_condition;  // baseline, context, deliberation
};

// Context -> "context", Deliberation -> "deliberation", None -> "baseline".
// Errors when an assigned instance lacks >= 2 annotations in its target
// condition.
ComposedRound compose_counterfactual(const Dataset& d,
                                     std::span<const InterventionAssignment> assignments);

// Means of per-instance scores across the round plus percentile-bootstrap
// CIs from resampling instances with replacement.
RoundSummary evaluate_round(const ComposedRound& round, const BootstrapConfig& boot);

// Both slices (most ambiguous first) over the three canonical conditions.
std::pair<SliceReport, SliceReport> slice_report(const Dataset& d, double slice_fraction);

// For each fraction: cutoffs recomputed from the baseline table, assign,
// compose, evaluate. Single-round semantics; cutoffs never come from
// intervention rounds.
std::vector<std::pair<double, RoundSummary>> threshold_sweep(const Dataset& d,
                                                             std::span<const double> fractions,
                                                             const BootstrapConfig& boot);

// Round where every instance draws from the named condition.
RoundSummary uniform_round(const Dataset& d, std::string_view condition,
                           const BootstrapConfig& boot);

std::string sweep_to_csv(std::span<const std::pair<double, RoundSummary>> rows);
std::string summary_to_csv(const RoundSummary& s);
std::string summary_to_json(const RoundSummary& s);
std::string slices_to_csv(const SliceReport& ambiguous, const SliceReport& disagreement);
std::string trajectory_to_csv(std::span<const RoundSummary> rounds);

}  // namespace sieve
