#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sieve/types.hpp"

namespace sieve {

// Per-instance uncertainty decomposition.
//
// ambiguity (M_a): mean width of the collected ranges; individual-level
// uncertainty about where the item belongs. Always in [0, 1] on the unit
// scale.
//
// disagreement (M_d): negated mean of the per-annotator agreement, where an
// annotator's agreement against each peer is the overlap ratio of their range
// with the peer's, corrected by the peer's width (the expected overlap ratio
// of a randomly placed range). Positive values mean the group overlapped less
// than chance. Each pairwise term lies in [-1, 1], so |M_d| <= N - 1.
struct InstanceScores {
    std::string instance_id;
    double ambiguity = 0.0;
    double disagreement = 0.0;
    int annotator_count = 0;

    bool operator==(const InstanceScores&) const = default;
};

struct ScoreTable {
    std::string condition;
    std::vector<InstanceScores> rows;     // sorted by instance_id
    std::vector<std::string> warnings;    // instances excluded for thin coverage
};

// Fraction of [a_lo, a_hi] covered by [b_lo, b_hi]. Asymmetric: the ratio is
// relative to the first interval's width. A zero-width first interval
// degenerates to a containment indicator.
double overlap_ratio(double a_lo, double a_hi, double b_lo, double b_hi);

// Mean range width. All annotations must target one instance; at least one
// annotation required.
double instance_ambiguity(std::span<const RangeAnnotation> annotations);

// Sum over peers of overlap_ratio(own, peer) - peer_width. Not symmetrized:
// a narrow range can agree with a wide one more than the reverse.
double annotator_agreement(std::string_view annotator_id,
                           std::span<const RangeAnnotation> annotations);

// Negated mean annotator_agreement across the group; needs >= 2 annotators.
double instance_disagreement(std::span<const RangeAnnotation> annotations);

// One row per instance with >= 2 annotations under `condition`; thinner
// instances are excluded and noted in the table's warnings.
ScoreTable score_table(const Dataset& d, std::string_view condition);

// Contiguous per-instance runs of a (instance, annotator)-sorted span.
std::vector<std::pair<std::string_view, std::span<const RangeAnnotation>>>
group_by_instance(std::span<const RangeAnnotation> annotations);

std::string score_table_to_csv(const ScoreTable& table);
std::string score_table_to_json(const ScoreTable& table);
ScoreTable score_table_from_csv(std::string_view text, std::string_view condition_label);
ScoreTable score_table_from_json(std::string_view text);

}  // namespace sieve
