#include "sieve/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "sieve/error.hpp"
#include "sieve/io_util.hpp"

namespace sieve {
namespace {

using json = nlohmann::ordered_json;

struct RawAnnotation {
    std::string condition;
    std::string instance;
    std::string annotator;
    double lower = 0.0;
    double upper = 0.0;
    std::string where;  // position for error messages
};

double parse_number_field(const std::string& text, std::string_view field, std::size_t line_no) {
    double out = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc() || ptr != end) {
        throw ParseError("line " + std::to_string(line_no) + ": field '" + std::string(field) +
                         "' is not a number: '" + text + "'");
    }
    return out;
}

RatingScale scale_from_json(const json& j) {
    if (!j.is_object() || !j.contains("min") || !j.contains("max")) {
        throw ParseError("scale: expected an object with 'min' and 'max'");
    }
    RatingScale s;
    s.min = j.at("min").get<double>();
    s.max = j.at("max").get<double>();
    if (j.contains("label") && !j.at("label").is_null()) {
        s.label = j.at("label").get<std::string>();
    }
    if (!(s.max > s.min)) {
        throw ValidationError("degenerate scale: max must exceed min");
    }
    return s;
}

std::vector<Instance> instances_from_json(const json& j) {
    if (!j.is_array()) throw ParseError("instances: expected an array");
    std::vector<Instance> out;
    out.reserve(j.size());
    std::size_t idx = 0;
    for (const auto& item : j) {
        if (!item.is_object() || !item.contains("id")) {
            throw ParseError("instances[" + std::to_string(idx) + "]: expected an object with 'id'");
        }
        Instance inst;
        inst.id = item.at("id").get<std::string>();
        if (item.contains("content") && !item.at("content").is_null()) {
            inst.content = item.at("content").get<std::string>();
        }
        if (item.contains("context") && !item.at("context").is_null()) {
            inst.context = item.at("context").get<std::string>();
        }
        if (item.contains("group") && !item.at("group").is_null()) {
            inst.group = item.at("group").get<std::string>();
        }
        out.push_back(std::move(inst));
        ++idx;
    }
    return out;
}

// Shared back half of ingestion: raw-record validation, normalization with
// clamp warnings, canonical sorting. `declared_conditions` keeps conditions
// that carry no annotations (legal in JSON) from vanishing.
Dataset assemble(RatingScale scale, std::vector<Instance> instances,
                 const std::vector<std::string>& declared_conditions,
                 std::vector<RawAnnotation> raw, std::vector<std::string>* warnings) {
    Dataset d;
    d.scale = std::move(scale);
    d.instances = std::move(instances);

    std::sort(d.instances.begin(), d.instances.end(),
              [](const Instance& a, const Instance& b) { return a.id < b.id; });
    std::set<std::string_view> ids;
    for (const auto& inst : d.instances) {
        if (!ids.insert(inst.id).second) {
            throw ValidationError("duplicate instance id: '" + inst.id + "'");
        }
    }

    std::map<std::string, std::vector<RangeAnnotation>> by_condition;
    for (const auto& name : declared_conditions) {
        by_condition.emplace(name, std::vector<RangeAnnotation>{});
    }
    std::set<std::tuple<std::string, std::string, std::string>> seen;
    for (auto& r : raw) {
        if (ids.find(r.instance) == ids.end()) {
            throw ValidationError(r.where + ": annotation references unknown instance '" +
                                  r.instance + "'");
        }
        if (r.upper < r.lower) {
            throw ValidationError(r.where + ": instance '" + r.instance + "', annotator '" +
                                  r.annotator + "': upper (" + format_double(r.upper) +
                                  ") < lower (" + format_double(r.lower) + ")");
        }
        if (!seen.insert({r.condition, r.instance, r.annotator}).second) {
            throw ValidationError(r.where + ": duplicate annotation for (instance '" + r.instance +
                                  "', annotator '" + r.annotator + "') in condition '" +
                                  r.condition + "'");
        }
        if (warnings && (r.lower < d.scale.min || r.upper > d.scale.max)) {
            warnings->push_back("clamped out-of-scale annotation: condition '" + r.condition +
                                "', instance '" + r.instance + "', annotator '" + r.annotator +
                                "' ([" + format_double(r.lower) + ", " + format_double(r.upper) +
                                "] vs scale [" + format_double(d.scale.min) + ", " +
                                format_double(d.scale.max) + "])");
        }
        RangeAnnotation ann;
        ann.instance_id = std::move(r.instance);
        ann.annotator_id = std::move(r.annotator);
        ann.lower = normalize_rating(r.lower, d.scale);
        ann.upper = normalize_rating(r.upper, d.scale);
        by_condition[r.condition].push_back(std::move(ann));
    }

    for (auto& [name, annotations] : by_condition) {
        std::sort(annotations.begin(), annotations.end(),
                  [](const RangeAnnotation& a, const RangeAnnotation& b) {
                      return std::tie(a.instance_id, a.annotator_id) <
                             std::tie(b.instance_id, b.annotator_id);
                  });
        d.conditions.push_back({name, std::move(annotations)});
    }
    // std::map iteration already sorted conditions by name.
    return d;
}

}  // namespace

namespace {

// Wrong field types (e.g. a string where a number belongs) surface from the
// JSON layer as type errors; fold them into the parse-error contract.
template <class Fn>
auto guard_json(Fn&& fn) {
    try {
        return fn();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("JSON error: ") + e.what());
    }
}

Dataset ingest_json_impl(std::string_view text, std::vector<std::string>* warnings) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("JSON parse error: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("top level: expected an object");
    for (const auto& key : {"scale", "instances", "conditions"}) {
        if (!doc.contains(key)) {
            throw ParseError(std::string("top level: missing '") + key + "'");
        }
    }

    RatingScale scale = scale_from_json(doc.at("scale"));
    std::vector<Instance> instances = instances_from_json(doc.at("instances"));

    const json& conds = doc.at("conditions");
    if (!conds.is_array()) throw ParseError("conditions: expected an array");
    std::vector<RawAnnotation> raw;
    std::vector<std::string> declared;
    std::set<std::string> cond_names;
    std::size_t ci = 0;
    for (const auto& cond : conds) {
        if (!cond.is_object() || !cond.contains("name") || !cond.contains("annotations")) {
            throw ParseError("conditions[" + std::to_string(ci) +
                             "]: expected an object with 'name' and 'annotations'");
        }
        const std::string name = cond.at("name").get<std::string>();
        if (!cond_names.insert(name).second) {
            throw ValidationError("duplicate condition name: '" + name + "'");
        }
        declared.push_back(name);
        const json& anns = cond.at("annotations");
        if (!anns.is_array()) {
            throw ParseError("conditions[" + std::to_string(ci) + "].annotations: expected an array");
        }
        std::size_t ai = 0;
        for (const auto& a : anns) {
            for (const auto& key : {"instance", "annotator", "lower", "upper"}) {
                if (!a.contains(key)) {
                    throw ParseError("conditions[" + std::to_string(ci) + "].annotations[" +
                                     std::to_string(ai) + "]: missing '" + key + "'");
                }
            }
            RawAnnotation r;
            r.condition = name;
            r.instance = a.at("instance").get<std::string>();
            r.annotator = a.at("annotator").get<std::string>();
            r.lower = a.at("lower").get<double>();
            r.upper = a.at("upper").get<double>();
            r.where = "conditions[" + std::to_string(ci) + "].annotations[" + std::to_string(ai) + "]";
            raw.push_back(std::move(r));
            ++ai;
        }
        ++ci;
    }
    return assemble(std::move(scale), std::move(instances), declared, std::move(raw), warnings);
}

Dataset ingest_csv_impl(std::string_view annotations_csv, std::string_view sidecar_json,
                        std::vector<std::string>* warnings) {
    json sidecar;
    try {
        sidecar = json::parse(sidecar_json);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("sidecar JSON parse error: ") + e.what());
    }
    if (!sidecar.is_object() || !sidecar.contains("scale") || !sidecar.contains("instances")) {
        throw ParseError("sidecar: expected an object with 'scale' and 'instances'");
    }
    RatingScale scale = scale_from_json(sidecar.at("scale"));
    std::vector<Instance> instances = instances_from_json(sidecar.at("instances"));

    std::vector<RawAnnotation> raw;
    std::istringstream lines{std::string(annotations_csv)};
    std::string line;
    std::size_t line_no = 0;
    bool saw_header = false;
    while (std::getline(lines, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = parse_csv_record(line, line_no);
        if (!saw_header) {
            const std::vector<std::string> expected = {"condition", "instance", "annotator",
                                                       "lower", "upper"};
            if (fields != expected) {
                throw ParseError("line 1: expected header 'condition,instance,annotator,lower,upper'");
            }
            saw_header = true;
            continue;
        }
        if (fields.size() != 5) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 5 fields, got " +
                             std::to_string(fields.size()));
        }
        RawAnnotation r;
        r.condition = fields[0];
        r.instance = fields[1];
        r.annotator = fields[2];
        r.lower = parse_number_field(fields[3], "lower", line_no);
        r.upper = parse_number_field(fields[4], "upper", line_no);
        r.where = "line " + std::to_string(line_no);
        raw.push_back(std::move(r));
    }
    if (!saw_header) throw ParseError("empty annotations file");
    return assemble(std::move(scale), std::move(instances), {}, std::move(raw), warnings);
}

}  // namespace

Dataset ingest_json(std::string_view text, std::vector<std::string>* warnings) {
    return guard_json([&] { return ingest_json_impl(text, warnings); });
}

Dataset ingest_csv(std::string_view annotations_csv, std::string_view sidecar_json,
                   std::vector<std::string>* warnings) {
    return guard_json([&] { return ingest_csv_impl(annotations_csv, sidecar_json, warnings); });
}

Dataset ingest_file(const std::filesystem::path& path,
                    const std::optional<std::filesystem::path>& sidecar,
                    std::vector<std::string>* warnings) {
    const std::string ext = path.extension().string();
    if (ext == ".json") {
        return ingest_json(read_file(path), warnings);
    }
    if (ext == ".csv") {
        if (!sidecar) {
            throw Error("CSV input requires a sidecar JSON (scale + instances)");
        }
        return ingest_csv(read_file(path), read_file(*sidecar), warnings);
    }
    throw Error("unrecognized dataset extension '" + ext + "' (expected .json or .csv)");
}

namespace {

json instances_to_json(const Dataset& d) {
    json arr = json::array();
    for (const auto& inst : d.instances) {
        json j;
        j["id"] = inst.id;
        j["content"] = inst.content;
        j["context"] = inst.context ? json(*inst.context) : json(nullptr);
        j["group"] = inst.group ? json(*inst.group) : json(nullptr);
        arr.push_back(std::move(j));
    }
    return arr;
}

json scale_to_json(const RatingScale& s) {
    json j;
    j["min"] = s.min;
    j["max"] = s.max;
    if (!s.label.empty()) j["label"] = s.label;
    return j;
}

}  // namespace

std::string dataset_to_json(const Dataset& d) {
    json doc;
    doc["scale"] = scale_to_json(d.scale);
    doc["instances"] = instances_to_json(d);
    json conds = json::array();
    for (const auto& cond : d.conditions) {
        json cj;
        cj["name"] = cond.name;
        json anns = json::array();
        for (const auto& a : cond.annotations) {
            json aj;
            aj["instance"] = a.instance_id;
            aj["annotator"] = a.annotator_id;
            aj["lower"] = raw_from_unit(a.lower, d.scale);
            aj["upper"] = raw_from_unit(a.upper, d.scale);
            anns.push_back(std::move(aj));
        }
        cj["annotations"] = std::move(anns);
        conds.push_back(std::move(cj));
    }
    doc["conditions"] = std::move(conds);
    return doc.dump(2) + "\n";
}

std::string dataset_to_csv(const Dataset& d) {
    std::string out = "condition,instance,annotator,lower,upper\n";
    for (const auto& cond : d.conditions) {
        for (const auto& a : cond.annotations) {
            out += csv_field(cond.name);
            out += ',';
            out += csv_field(a.instance_id);
            out += ',';
            out += csv_field(a.annotator_id);
            out += ',';
            out += format_double(raw_from_unit(a.lower, d.scale));
            out += ',';
            out += format_double(raw_from_unit(a.upper, d.scale));
            out += '\n';
        }
    }
    return out;
}

std::string dataset_to_sidecar_json(const Dataset& d) {
    json doc;
    doc["scale"] = scale_to_json(d.scale);
    doc["instances"] = instances_to_json(d);
    return doc.dump(2) + "\n";
}

}  // namespace sieve
