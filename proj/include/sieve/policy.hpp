#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sieve/metrics.hpp"

namespace sieve {

enum class Decision { None, Context, Deliberation };

std::string_view to_string(Decision d);
Decision decision_from_string(std::string_view s);

// Quantile cutoffs over a baseline score table. With k = ceil(fraction * n),
// the cutoff is the k-th largest score and instances qualify by score >=
// cutoff, so ties at the cutoff all qualify. fraction 0 yields +inf (nothing
// qualifies). When built from distinct per-metric fractions, `fraction`
// records the larger of the two.
struct SieveCutoffs {
    double fraction = 0.0;
    double ambiguity_cutoff = 0.0;
    double disagreement_cutoff = 0.0;
};

struct InterventionAssignment {
    std::string instance_id;
    Decision decision = Decision::None;
    double ambiguity = 0.0;
    double disagreement = 0.0;
};

// k-th largest score with k = ceil(fraction * n); +inf sentinel when k == 0.
double quantile_cutoff(std::span<const double> scores, double fraction);

SieveCutoffs compute_cutoffs(const ScoreTable& table, double fraction);
SieveCutoffs compute_cutoffs(const ScoreTable& table, double ambiguity_fraction,
                             double disagreement_fraction);

// Walks every row with ambiguity checked first: score >= ambiguity cutoff
// assigns Context and short-circuits; otherwise disagreement >= its cutoff
// assigns Deliberation; otherwise None. Exactly one decision per instance.
std::vector<InterventionAssignment> assign_interventions(const ScoreTable& table,
                                                         const SieveCutoffs& cutoffs);

std::string assignments_to_csv(std::span<const InterventionAssignment> assignments);
std::string assignments_to_json(std::span<const InterventionAssignment> assignments,
                                const SieveCutoffs& cutoffs);

}  // namespace sieve
