#include "sieve/policy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <json.hpp>

#include "sieve/error.hpp"
#include "sieve/io_util.hpp"

namespace sieve {

std::string_view to_string(Decision d) {
    switch (d) {
        case Decision::Context: return "context";
        case Decision::Deliberation: return "deliberation";
        case Decision::None: return "none";
    }
    return "none";
}

Decision decision_from_string(std::string_view s) {
    if (s == "context") return Decision::Context;
    if (s == "deliberation") return Decision::Deliberation;
    if (s == "none") return Decision::None;
    throw Error("unknown decision: '" + std::string(s) + "'");
}

double quantile_cutoff(std::span<const double> scores, double fraction) {
    if (scores.empty()) {
        throw Error("quantile_cutoff: empty score list");
    }
    if (!(fraction >= 0.0 && fraction <= 1.0)) {
        throw Error("quantile_cutoff: fraction must lie in [0, 1]");
    }
    const auto n = scores.size();
    // ceil with a small backoff so that fraction * n landing an ulp above an
    // integer does not select one extra instance.
    const double k_real = std::ceil(fraction * static_cast<double>(n) - 1e-9);
    auto k = static_cast<std::size_t>(std::max(k_real, 0.0));
    if (k == 0) {
        return std::numeric_limits<double>::infinity();
    }
    k = std::min(k, n);
    std::vector<double> sorted(scores.begin(), scores.end());
    std::nth_element(sorted.begin(), sorted.begin() + (k - 1), sorted.end(), std::greater<>());
    return sorted[k - 1];
}

SieveCutoffs compute_cutoffs(const ScoreTable& table, double fraction) {
    return compute_cutoffs(table, fraction, fraction);
}

SieveCutoffs compute_cutoffs(const ScoreTable& table, double ambiguity_fraction,
                             double disagreement_fraction) {
    std::vector<double> ambiguity;
    std::vector<double> disagreement;
    ambiguity.reserve(table.rows.size());
    disagreement.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        ambiguity.push_back(row.ambiguity);
        disagreement.push_back(row.disagreement);
    }
    SieveCutoffs cutoffs;
    cutoffs.fraction = std::max(ambiguity_fraction, disagreement_fraction);
    cutoffs.ambiguity_cutoff = quantile_cutoff(ambiguity, ambiguity_fraction);
    cutoffs.disagreement_cutoff = quantile_cutoff(disagreement, disagreement_fraction);
    return cutoffs;
}

std::vector<InterventionAssignment> assign_interventions(const ScoreTable& table,
                                                         const SieveCutoffs& cutoffs) {
    std::vector<InterventionAssignment> out;
    out.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        InterventionAssignment a;
        a.instance_id = row.instance_id;
        a.ambiguity = row.ambiguity;
        a.disagreement = row.disagreement;
        if (row.ambiguity >= cutoffs.ambiguity_cutoff) {
            a.decision = Decision::Context;
        } else if (row.disagreement >= cutoffs.disagreement_cutoff) {
            a.decision = Decision::Deliberation;
        } else {
            a.decision = Decision::None;
        }
        out.push_back(std::move(a));
    }
    return out;
}

std::string assignments_to_csv(std::span<const InterventionAssignment> assignments) {
    std::string out = "instance,decision,ambiguity,disagreement\n";
    for (const auto& a : assignments) {
        out += csv_field(a.instance_id);
        out += ',';
        out += to_string(a.decision);
        out += ',';
        out += format_double(a.ambiguity);
        out += ',';
        out += format_double(a.disagreement);
        out += '\n';
    }
    return out;
}

std::string assignments_to_json(std::span<const InterventionAssignment> assignments,
                                const SieveCutoffs& cutoffs) {
    nlohmann::ordered_json doc;
    doc["fraction"] = cutoffs.fraction;
    doc["ambiguity_cutoff"] = std::isinf(cutoffs.ambiguity_cutoff)
                                  ? nlohmann::ordered_json(nullptr)
                                  : nlohmann::ordered_json(cutoffs.ambiguity_cutoff);
    doc["disagreement_cutoff"] = std::isinf(cutoffs.disagreement_cutoff)
                                     ? nlohmann::ordered_json(nullptr)
                                     : nlohmann::ordered_json(cutoffs.disagreement_cutoff);
    auto rows = nlohmann::ordered_json::array();
    for (const auto& a : assignments) {
        nlohmann::ordered_json r;
        r["instance_id"] = a.instance_id;
        r["decision"] = std::string(to_string(a.decision));
        r["ambiguity"] = a.ambiguity;
        r["disagreement"] = a.disagreement;
        rows.push_back(std::move(r));
    }
    doc["assignments"] = std::move(rows);
    return doc.dump(2) + "\n";
}

}  // namespace sieve
