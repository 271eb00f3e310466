#pragma once

#include <span>
#include <string>
#include <vector>

#include "sieve/metrics.hpp"
#include "sieve/stats.hpp"

namespace sieve {

// Plot-ready slice panels built from three per-condition score tables:
// slice x metric x condition, each with a bootstrap CI over the slice
// members and a permutation-test p-value against the baseline members.
struct SlicePanelRow {
    std::string slice;      // most_ambiguous | most_disagreement
    std::string metric;     // ambiguity | disagreement
    std::string condition;  // baseline | context | deliberation
    double mean = 0.0;
    ConfInterval ci;
    double pct_change_vs_baseline = 0.0;  // NaN for the baseline rows
    double p_vs_baseline = 0.0;           // NaN for the baseline rows
};

// Significance annotations use an a priori level of 0.01.
inline constexpr double kSignificanceLevel = 0.01;

std::vector<SlicePanelRow> slice_panels(const ScoreTable& baseline, const ScoreTable& context,
                                        const ScoreTable& deliberation, double fraction,
                                        const BootstrapConfig& boot, int perm_replicates);

std::string slice_panels_to_csv(std::span<const SlicePanelRow> rows);

// Reshapes a sweep CSV into one row per (metric, fraction) point.
std::string sweep_panels_from_csv(std::string_view sweep_csv);

}  // namespace sieve
