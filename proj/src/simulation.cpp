#include "sieve/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <json.hpp>

#include "sieve/error.hpp"
#include "sieve/io_util.hpp"
#include "sieve/metrics.hpp"
#include "sieve/numeric.hpp"

namespace sieve {
namespace {

using InstanceSpans = std::map<std::string_view, std::span<const RangeAnnotation>>;

InstanceSpans index_condition(const ConditionSet& cond) {
    InstanceSpans index;
    for (const auto& [id, span] : group_by_instance(cond.annotations)) {
        index.emplace(id, span);
    }
    return index;
}

std::string_view condition_for(Decision d) {
    switch (d) {
        case Decision::Context: return kContextCondition;
        case Decision::Deliberation: return kDeliberationCondition;
        case Decision::None: return kBaselineCondition;
    }
    return kBaselineCondition;
}

// Per-instance score columns of a composed round, in sources order.
struct RoundScores {
    std::vector<double> ambiguity;
    std::vector<double> disagreement;
};

RoundScores score_round(const ComposedRound& round) {
    RoundScores scores;
    const auto groups = group_by_instance(round.annotations);
    scores.ambiguity.reserve(groups.size());
    scores.disagreement.reserve(groups.size());
    for (const auto& [id, span] : groups) {
        scores.ambiguity.push_back(instance_ambiguity(span));
        scores.disagreement.push_back(instance_disagreement(span));
    }
    return scores;
}

double pct_change(double baseline, double condition) {
    if (baseline == 0.0) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return 100.0 * (baseline - condition) / baseline;
}

std::string format_pct(double v) {
    return std::isnan(v) ? "NA" : format_double(v);
}

const InstanceScores& row_for(const ScoreTable& table, const std::string& instance,
                              std::string_view condition) {
    auto it = std::lower_bound(table.rows.begin(), table.rows.end(), instance,
                               [](const InstanceScores& r, const std::string& id) {
                                   return r.instance_id < id;
                               });
    if (it == table.rows.end() || it->instance_id != instance) {
        throw Error("instance '" + instance + "' has no scores under condition '" +
                    std::string(condition) + "'");
    }
    return *it;
}

}  // namespace

ComposedRound compose_counterfactual(const Dataset& d,
                                     std::span<const InterventionAssignment> assignments) {
    std::map<std::string_view, InstanceSpans> indexes;
    for (const auto& cond : d.conditions) {
        indexes.emplace(cond.name, index_condition(cond));
    }

    std::vector<const InterventionAssignment*> ordered;
    ordered.reserve(assignments.size());
    for (const auto& a : assignments) ordered.push_back(&a);
    std::sort(ordered.begin(), ordered.end(),
              [](const InterventionAssignment* a, const InterventionAssignment* b) {
                  return a->instance_id < b->instance_id;
              });

    ComposedRound round;
    round.sources.reserve(assignments.size());
    for (const auto* a : ordered) {
        const std::string_view cond_name = condition_for(a->decision);
        auto cond_it = indexes.find(cond_name);
        if (cond_it == indexes.end()) {
            throw Error("composition needs condition '" + std::string(cond_name) +
                        "' which is absent from the dataset");
        }
        auto span_it = cond_it->second.find(a->instance_id);
        if (span_it == cond_it->second.end() || span_it->second.size() < 2) {
            throw Error("instance '" + a->instance_id + "' has " +
                        std::to_string(span_it == cond_it->second.end()
                                           ? 0
                                           : span_it->second.size()) +
                        " annotation(s) under condition '" + std::string(cond_name) +
                        "'; composition requires at least 2");
        }
        round.sources.emplace_back(a->instance_id, std::string(cond_name));
        round.annotations.insert(round.annotations.end(), span_it->second.begin(),
                                 span_it->second.end());
        if (a->decision != Decision::None) ++round.affected_count;
    }
    return round;
}

RoundSummary evaluate_round(const ComposedRound& round, const BootstrapConfig& boot) {
    if (round.annotations.empty()) {
        throw Error("evaluate_round: empty round");
    }
    const RoundScores scores = score_round(round);

    RoundSummary summary;
    summary.mean_ambiguity = compensated_mean(scores.ambiguity);
    summary.mean_disagreement = compensated_mean(scores.disagreement);
    summary.ci_ambiguity = bootstrap_ci(scores.ambiguity, boot);
    summary.ci_disagreement = bootstrap_ci(scores.disagreement, boot);
    summary.instance_count = static_cast<int>(scores.ambiguity.size());
    summary.affected_count = round.affected_count;
    return summary;
}

std::pair<SliceReport, SliceReport> slice_report(const Dataset& d, double slice_fraction) {
    for (const auto name :
         {kBaselineCondition, kContextCondition, kDeliberationCondition}) {
        if (!d.find_condition(name)) {
            throw Error("slice report needs condition '" + std::string(name) + "'");
        }
    }

    const ScoreTable baseline = score_table(d, kBaselineCondition);
    if (baseline.rows.empty()) {
        throw Error("slice report: baseline has no scored instances");
    }

    std::map<std::string, ScoreTable> tables;
    for (const auto name : {kContextCondition, kDeliberationCondition}) {
        tables.emplace(std::string(name), score_table(d, name));
    }

    auto build = [&](std::string slice_name, auto metric_of) {
        std::vector<double> metric;
        metric.reserve(baseline.rows.size());
        for (const auto& row : baseline.rows) metric.push_back(metric_of(row));
        const double cutoff = quantile_cutoff(metric, slice_fraction);
        if (std::isinf(cutoff)) {
            throw Error("slice report: fraction " + format_double(slice_fraction) +
                        " selects no instances");
        }

        SliceReport report;
        report.slice = std::move(slice_name);
        std::vector<const InstanceScores*> members;
        for (const auto& row : baseline.rows) {
            if (metric_of(row) >= cutoff) {
                report.members.push_back(row.instance_id);
                members.push_back(&row);
            }
        }

        auto slice_means = [&](std::string_view cond) {
            std::vector<double> ma;
            std::vector<double> md;
            ma.reserve(members.size());
            md.reserve(members.size());
            for (const auto* m : members) {
                const InstanceScores& row =
                    cond == kBaselineCondition
                        ? *m
                        : row_for(tables.at(std::string(cond)), m->instance_id, cond);
                ma.push_back(row.ambiguity);
                md.push_back(row.disagreement);
            }
            return std::pair{compensated_mean(ma), compensated_mean(md)};
        };

        const auto [base_ma, base_md] = slice_means(kBaselineCondition);
        for (const auto cond :
             {kBaselineCondition, kContextCondition, kDeliberationCondition}) {
            const auto [ma, md] = slice_means(cond);
            SliceConditionStats stats;
            stats.condition = std::string(cond);
            stats.mean_ambiguity = ma;
            stats.mean_disagreement = md;
            stats.pct_change_ambiguity = pct_change(base_ma, ma);
            stats.pct_change_disagreement = pct_change(base_md, md);
            report.per_condition.push_back(std::move(stats));
        }
        return report;
    };

    return {build("most_ambiguous", [](const InstanceScores& r) { return r.ambiguity; }),
            build("most_disagreement", [](const InstanceScores& r) { return r.disagreement; })};
}

std::vector<std::pair<double, RoundSummary>> threshold_sweep(const Dataset& d,
                                                             std::span<const double> fractions,
                                                             const BootstrapConfig& boot) {
    for (double f : fractions) {
        if (!(f >= 0.0 && f <= 1.0)) {
            throw Error("sweep fractions must lie in [0, 1]");
        }
    }
    const ScoreTable baseline = score_table(d, kBaselineCondition);

    std::vector<std::pair<double, RoundSummary>> rows;
    rows.reserve(fractions.size());
    for (double f : fractions) {
        const SieveCutoffs cutoffs = compute_cutoffs(baseline, f);
        const auto assignments = assign_interventions(baseline, cutoffs);
        const ComposedRound round = compose_counterfactual(d, assignments);
        rows.emplace_back(f, evaluate_round(round, boot));
    }
    return rows;
}

RoundSummary uniform_round(const Dataset& d, std::string_view condition,
                           const BootstrapConfig& boot) {
    const ConditionSet* cond = d.find_condition(condition);
    if (!cond) {
        throw Error("unknown condition: '" + std::string(condition) + "'");
    }
    const auto index = index_condition(*cond);

    ComposedRound round;
    for (const auto& inst : d.instances) {
        auto it = index.find(inst.id);
        if (it == index.end() || it->second.size() < 2) {
            throw Error("instance '" + inst.id + "' has " +
                        std::to_string(it == index.end() ? 0 : it->second.size()) +
                        " annotation(s) under condition '" + std::string(condition) +
                        "'; a uniform round requires at least 2");
        }
        round.sources.emplace_back(inst.id, std::string(condition));
        round.annotations.insert(round.annotations.end(), it->second.begin(), it->second.end());
    }
    round.affected_count = static_cast<int>(round.sources.size());
    return evaluate_round(round, boot);
}

std::string sweep_to_csv(std::span<const std::pair<double, RoundSummary>> rows) {
    std::string out =
        "fraction,mean_ambiguity,ambiguity_ci_lo,ambiguity_ci_hi,"
        "mean_disagreement,disagreement_ci_lo,disagreement_ci_hi,affected_count\n";
    for (const auto& [fraction, s] : rows) {
        out += format_double(fraction);
        out += ',';
        out += format_double(s.mean_ambiguity);
        out += ',';
        out += format_double(s.ci_ambiguity.lo);
        out += ',';
        out += format_double(s.ci_ambiguity.hi);
        out += ',';
        out += format_double(s.mean_disagreement);
        out += ',';
        out += format_double(s.ci_disagreement.lo);
        out += ',';
        out += format_double(s.ci_disagreement.hi);
        out += ',';
        out += std::to_string(s.affected_count);
        out += '\n';
    }
    return out;
}

namespace {

std::string summary_fields(const RoundSummary& s) {
    std::string out;
    out += format_double(s.mean_ambiguity);
    out += ',';
    out += format_double(s.ci_ambiguity.lo);
    out += ',';
    out += format_double(s.ci_ambiguity.hi);
    out += ',';
    out += format_double(s.mean_disagreement);
    out += ',';
    out += format_double(s.ci_disagreement.lo);
    out += ',';
    out += format_double(s.ci_disagreement.hi);
    return out;
}

}  // namespace

std::string summary_to_csv(const RoundSummary& s) {
    std::string out =
        "mean_ambiguity,ambiguity_ci_lo,ambiguity_ci_hi,"
        "mean_disagreement,disagreement_ci_lo,disagreement_ci_hi,"
        "instance_count,affected_count\n";
    out += summary_fields(s);
    out += ',';
    out += std::to_string(s.instance_count);
    out += ',';
    out += std::to_string(s.affected_count);
    out += '\n';
    return out;
}

std::string summary_to_json(const RoundSummary& s) {
    nlohmann::ordered_json doc;
    doc["mean_ambiguity"] = s.mean_ambiguity;
    doc["ambiguity_ci"] = {s.ci_ambiguity.lo, s.ci_ambiguity.hi};
    doc["mean_disagreement"] = s.mean_disagreement;
    doc["disagreement_ci"] = {s.ci_disagreement.lo, s.ci_disagreement.hi};
    doc["instance_count"] = s.instance_count;
    doc["affected_count"] = s.affected_count;
    return doc.dump(2) + "\n";
}

std::string slices_to_csv(const SliceReport& ambiguous, const SliceReport& disagreement) {
    // One row per slice x metric x condition, the panel layout plots expect.
    std::string out = "slice,metric,condition,mean,pct_change_vs_baseline\n";
    for (const SliceReport* report : {&ambiguous, &disagreement}) {
        for (const bool is_ambiguity : {true, false}) {
            for (const auto& row : report->per_condition) {
                out += csv_field(report->slice);
                out += ',';
                out += is_ambiguity ? "ambiguity" : "disagreement";
                out += ',';
                out += csv_field(row.condition);
                out += ',';
                out += format_double(is_ambiguity ? row.mean_ambiguity : row.mean_disagreement);
                out += ',';
                out += format_pct(is_ambiguity ? row.pct_change_ambiguity
                                               : row.pct_change_disagreement);
                out += '\n';
            }
        }
    }
    return out;
}

std::string trajectory_to_csv(std::span<const RoundSummary> rounds) {
    std::string out =
        "round,mean_ambiguity,ambiguity_ci_lo,ambiguity_ci_hi,"
        "mean_disagreement,disagreement_ci_lo,disagreement_ci_hi,affected_count\n";
    for (std::size_t i = 0; i < rounds.size(); ++i) {
        out += std::to_string(i + 1);
        out += ',';
        out += summary_fields(rounds[i]);
        out += ',';
        out += std::to_string(rounds[i].affected_count);
        out += '\n';
    }
    return out;
}

}  // namespace sieve
