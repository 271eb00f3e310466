#include "sieve/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include <json.hpp>

#include "sieve/error.hpp"
#include "sieve/io_util.hpp"
#include "sieve/numeric.hpp"

namespace sieve {

double overlap_ratio(double a_lo, double a_hi, double b_lo, double b_hi) {
    const double width = a_hi - a_lo;
    if (width == 0.0) {
        return (a_lo >= b_lo && a_lo <= b_hi) ? 1.0 : 0.0;
    }
    const double intersection = std::min(a_hi, b_hi) - std::max(a_lo, b_lo);
    return std::max(intersection, 0.0) / width;
}

namespace {

void require_single_instance(std::span<const RangeAnnotation> annotations) {
    for (const auto& a : annotations) {
        if (a.instance_id != annotations.front().instance_id) {
            throw Error("annotations span multiple instances: '" +
                        annotations.front().instance_id + "' and '" + a.instance_id + "'");
        }
    }
}

// Agreement of annotations[i] against all other entries.
double agreement_at(std::span<const RangeAnnotation> annotations, std::size_t i) {
    const auto& own = annotations[i];
    CompensatedSum acc;
    for (std::size_t j = 0; j < annotations.size(); ++j) {
        if (j == i) continue;
        const auto& peer = annotations[j];
        acc.add(overlap_ratio(own.lower, own.upper, peer.lower, peer.upper) - peer.width());
    }
    return acc.value();
}

}  // namespace

double instance_ambiguity(std::span<const RangeAnnotation> annotations) {
    if (annotations.empty()) {
        throw Error("instance_ambiguity: no annotations");
    }
    require_single_instance(annotations);
    std::vector<double> widths;
    widths.reserve(annotations.size());
    for (const auto& a : annotations) widths.push_back(a.width());
    return compensated_mean(widths);
}

double annotator_agreement(std::string_view annotator_id,
                           std::span<const RangeAnnotation> annotations) {
    require_single_instance(annotations);
    std::size_t own = annotations.size();
    for (std::size_t i = 0; i < annotations.size(); ++i) {
        if (annotations[i].annotator_id == annotator_id) {
            own = i;
            break;
        }
    }
    if (own == annotations.size()) {
        throw Error("annotator_agreement: annotator '" + std::string(annotator_id) +
                    "' not present");
    }
    if (annotations.size() < 2) {
        throw Error("annotator_agreement: no peers to compare against");
    }
    return agreement_at(annotations, own);
}

double instance_disagreement(std::span<const RangeAnnotation> annotations) {
    if (annotations.size() < 2) {
        throw Error("instance_disagreement: at least 2 annotators required, got " +
                    std::to_string(annotations.size()));
    }
    require_single_instance(annotations);
    std::vector<double> agreements;
    agreements.reserve(annotations.size());
    for (std::size_t i = 0; i < annotations.size(); ++i) {
        agreements.push_back(agreement_at(annotations, i));
    }
    return -compensated_mean(agreements);
}

std::vector<std::pair<std::string_view, std::span<const RangeAnnotation>>>
group_by_instance(std::span<const RangeAnnotation> annotations) {
    std::vector<std::pair<std::string_view, std::span<const RangeAnnotation>>> groups;
    std::size_t start = 0;
    while (start < annotations.size()) {
        std::size_t end = start + 1;
        while (end < annotations.size() &&
               annotations[end].instance_id == annotations[start].instance_id) {
            ++end;
        }
        groups.emplace_back(annotations[start].instance_id,
                            annotations.subspan(start, end - start));
        start = end;
    }
    return groups;
}

ScoreTable score_table(const Dataset& d, std::string_view condition) {
    const ConditionSet* cond = d.find_condition(condition);
    if (!cond) {
        throw Error("unknown condition: '" + std::string(condition) + "'");
    }

    ScoreTable table;
    table.condition = cond->name;

    const auto groups = group_by_instance(cond->annotations);
    std::size_t gi = 0;
    // instances are sorted by id and groups follow annotation order, so one
    // merge walk covers both scored rows and warnings.
    for (const auto& inst : d.instances) {
        while (gi < groups.size() && groups[gi].first < inst.id) ++gi;
        const bool present = gi < groups.size() && groups[gi].first == inst.id;
        const std::size_t count = present ? groups[gi].second.size() : 0;
        if (count >= 2) {
            InstanceScores row;
            row.instance_id = inst.id;
            row.ambiguity = instance_ambiguity(groups[gi].second);
            row.disagreement = instance_disagreement(groups[gi].second);
            row.annotator_count = static_cast<int>(count);
            table.rows.push_back(std::move(row));
        } else {
            table.warnings.push_back("instance '" + inst.id + "': " + std::to_string(count) +
                                     " annotation(s) under condition '" + table.condition +
                                     "'; excluded from scores");
        }
    }
    return table;
}

std::string score_table_to_csv(const ScoreTable& table) {
    std::string out = "instance,ambiguity,disagreement,annotators\n";
    for (const auto& row : table.rows) {
        out += csv_field(row.instance_id);
        out += ',';
        out += format_double(row.ambiguity);
        out += ',';
        out += format_double(row.disagreement);
        out += ',';
        out += std::to_string(row.annotator_count);
        out += '\n';
    }
    return out;
}

std::string score_table_to_json(const ScoreTable& table) {
    nlohmann::ordered_json doc;
    doc["condition"] = table.condition;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        nlohmann::ordered_json r;
        r["instance_id"] = row.instance_id;
        r["ambiguity"] = row.ambiguity;
        r["disagreement"] = row.disagreement;
        r["annotator_count"] = row.annotator_count;
        rows.push_back(std::move(r));
    }
    doc["rows"] = std::move(rows);
    doc["warnings"] = table.warnings;
    return doc.dump(2) + "\n";
}

ScoreTable score_table_from_csv(std::string_view text, std::string_view condition_label) {
    ScoreTable table;
    table.condition = std::string(condition_label);
    std::istringstream lines{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    bool saw_header = false;
    while (std::getline(lines, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = parse_csv_record(line, line_no);
        if (!saw_header) {
            const std::vector<std::string> expected = {"instance", "ambiguity", "disagreement",
                                                       "annotators"};
            if (fields != expected) {
                throw ParseError("line 1: expected header 'instance,ambiguity,disagreement,annotators'");
            }
            saw_header = true;
            continue;
        }
        if (fields.size() != 4) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 4 fields");
        }
        InstanceScores row;
        row.instance_id = fields[0];
        auto num = [&](const std::string& s, std::string_view name) {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || ptr != s.data() + s.size()) {
                throw ParseError("line " + std::to_string(line_no) + ": field '" +
                                 std::string(name) + "' is not a number: '" + s + "'");
            }
            return v;
        };
        row.ambiguity = num(fields[1], "ambiguity");
        row.disagreement = num(fields[2], "disagreement");
        row.annotator_count = static_cast<int>(num(fields[3], "annotators"));
        table.rows.push_back(std::move(row));
    }
    if (!saw_header) throw ParseError("empty score table");
    std::sort(table.rows.begin(), table.rows.end(),
              [](const InstanceScores& a, const InstanceScores& b) {
                  return a.instance_id < b.instance_id;
              });
    return table;
}

ScoreTable score_table_from_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("JSON parse error: ") + e.what());
    }
    ScoreTable table;
    table.condition = doc.value("condition", std::string());
    for (const auto& r : doc.at("rows")) {
        InstanceScores row;
        row.instance_id = r.at("instance_id").get<std::string>();
        row.ambiguity = r.at("ambiguity").get<double>();
        row.disagreement = r.at("disagreement").get<double>();
        row.annotator_count = r.at("annotator_count").get<int>();
        table.rows.push_back(std::move(row));
    }
    std::sort(table.rows.begin(), table.rows.end(),
              [](const InstanceScores& a, const InstanceScores& b) {
                  return a.instance_id < b.instance_id;
              });
    return table;
}

}  // namespace sieve
