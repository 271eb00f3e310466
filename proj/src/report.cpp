#include "sieve/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sieve/error.hpp"
#include "sieve/io_util.hpp"
#include "sieve/numeric.hpp"
#include "sieve/policy.hpp"

namespace sieve {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> member_values(const ScoreTable& table, std::span<const std::string> members,
                                  bool ambiguity, std::string_view condition) {
    std::vector<double> out;
    out.reserve(members.size());
    for (const auto& id : members) {
        auto it = std::find_if(table.rows.begin(), table.rows.end(),
                               [&](const InstanceScores& r) { return r.instance_id == id; });
        if (it == table.rows.end()) {
            throw Error("slice member '" + id + "' missing from the " + std::string(condition) +
                        " score table");
        }
        out.push_back(ambiguity ? it->ambiguity : it->disagreement);
    }
    return out;
}

}  // namespace

std::vector<SlicePanelRow> slice_panels(const ScoreTable& baseline, const ScoreTable& context,
                                        const ScoreTable& deliberation, double fraction,
                                        const BootstrapConfig& boot, int perm_replicates) {
    if (baseline.rows.empty()) {
        throw Error("slice panels: baseline score table is empty");
    }

    struct SliceSpec {
        std::string name;
        bool by_ambiguity;
    };
    const SliceSpec slices[] = {{"most_ambiguous", true}, {"most_disagreement", false}};

    struct CondSpec {
        std::string name;
        const ScoreTable* table;
    };
    const CondSpec conditions[] = {{"baseline", &baseline},
                                   {"context", &context},
                                   {"deliberation", &deliberation}};

    std::vector<SlicePanelRow> rows;
    for (const auto& slice : slices) {
        std::vector<double> ranking;
        ranking.reserve(baseline.rows.size());
        for (const auto& r : baseline.rows) {
            ranking.push_back(slice.by_ambiguity ? r.ambiguity : r.disagreement);
        }
        const double cutoff = quantile_cutoff(ranking, fraction);
        if (std::isinf(cutoff)) {
            throw Error("slice panels: fraction " + format_double(fraction) +
                        " selects no instances");
        }
        std::vector<std::string> members;
        for (const auto& r : baseline.rows) {
            if ((slice.by_ambiguity ? r.ambiguity : r.disagreement) >= cutoff) {
                members.push_back(r.instance_id);
            }
        }

        for (const bool metric_is_ambiguity : {true, false}) {
            const auto base_values =
                member_values(baseline, members, metric_is_ambiguity, "baseline");
            const double base_mean = compensated_mean(base_values);
            for (const auto& cond : conditions) {
                const auto values =
                    member_values(*cond.table, members, metric_is_ambiguity, cond.name);
                SlicePanelRow row;
                row.slice = slice.name;
                row.metric = metric_is_ambiguity ? "ambiguity" : "disagreement";
                row.condition = cond.name;
                row.mean = compensated_mean(values);
                row.ci = bootstrap_ci(values, boot);
                if (cond.name == "baseline") {
                    row.pct_change_vs_baseline = kNaN;
                    row.p_vs_baseline = kNaN;
                } else {
                    row.pct_change_vs_baseline =
                        base_mean == 0.0 ? kNaN : 100.0 * (base_mean - row.mean) / base_mean;
                    row.p_vs_baseline =
                        permutation_test(base_values, values, perm_replicates, boot.seed);
                }
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

std::string slice_panels_to_csv(std::span<const SlicePanelRow> rows) {
    std::string out =
        "slice,metric,condition,mean,ci_lo,ci_hi,pct_change_vs_baseline,"
        "p_vs_baseline,significant_at_0.01\n";
    auto na_or = [](double v) { return std::isnan(v) ? std::string("NA") : format_double(v); };
    for (const auto& r : rows) {
        out += csv_field(r.slice);
        out += ',';
        out += csv_field(r.metric);
        out += ',';
        out += csv_field(r.condition);
        out += ',';
        out += format_double(r.mean);
        out += ',';
        out += format_double(r.ci.lo);
        out += ',';
        out += format_double(r.ci.hi);
        out += ',';
        out += na_or(r.pct_change_vs_baseline);
        out += ',';
        out += na_or(r.p_vs_baseline);
        out += ',';
        out += std::isnan(r.p_vs_baseline)
                   ? "NA"
                   : (r.p_vs_baseline < kSignificanceLevel ? "yes" : "no");
        out += '\n';
    }
    return out;
}

std::string sweep_panels_from_csv(std::string_view sweep_csv) {
    std::istringstream lines{std::string(sweep_csv)};
    std::string line;
    std::size_t line_no = 0;
    bool saw_header = false;
    std::string out = "metric,fraction,mean,ci_lo,ci_hi,affected_count\n";
    std::vector<std::string> disagreement_rows;
    while (std::getline(lines, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = parse_csv_record(line, line_no);
        if (!saw_header) {
            if (fields.empty() || fields[0] != "fraction" || fields.size() != 8) {
                throw ParseError("line 1: expected a sweep CSV header");
            }
            saw_header = true;
            continue;
        }
        if (fields.size() != 8) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 8 fields");
        }
        out += "ambiguity," + fields[0] + ',' + fields[1] + ',' + fields[2] + ',' + fields[3] +
               ',' + fields[7] + '\n';
        disagreement_rows.push_back("disagreement," + fields[0] + ',' + fields[4] + ',' +
                                    fields[5] + ',' + fields[6] + ',' + fields[7] + '\n');
    }
    if (!saw_header) throw ParseError("empty sweep CSV");
    for (const auto& r : disagreement_rows) out += r;
    return out;
}

}  // namespace sieve
