#include "sieve/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "sieve/error.hpp"
#include "sieve/metrics.hpp"
#include "sieve/numeric.hpp"
#include "sieve/rng.hpp"

namespace sieve {
namespace {

// Stream ids; every random draw is keyed on (seed, stream, indexes...) so
// generation is order- and schedule-independent.
constexpr std::uint64_t kLatentStream = 1;
constexpr std::uint64_t kPoolStream = 2;
constexpr std::uint64_t kAnnotateStream = 3;
constexpr std::uint64_t kIterPoolStream = 4;
constexpr std::uint64_t kIterAnnotateStream = 5;

double sample_dist(const DistSpec& spec, std::mt19937_64& g) {
    switch (spec.kind) {
        case DistSpec::Kind::Constant: return spec.a;
        case DistSpec::Kind::Uniform: return next_uniform(g, spec.a, spec.b);
    }
    return spec.a;
}

void validate_dist(const DistSpec& spec, std::string_view name, double lo, double hi) {
    if (spec.kind == DistSpec::Kind::Uniform && !(spec.a <= spec.b)) {
        throw Error("config: " + std::string(name) + " uniform bounds out of order");
    }
    if (!(spec.a >= lo && spec.a <= hi && spec.b >= lo && spec.b <= hi)) {
        throw Error("config: " + std::string(name) + " support must lie within [" +
                    std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
}

struct InstanceLatents {
    double true_value;
    double width_scale;
    double dispersion;
};

std::vector<InstanceLatents> draw_latents(const CrowdConfig& cfg) {
    std::vector<InstanceLatents> latents;
    latents.reserve(cfg.n_instances);
    for (int x = 0; x < cfg.n_instances; ++x) {
        auto g = make_rng(substream_key(cfg.seed, kLatentStream, x));
        InstanceLatents l;
        l.true_value = next_unit(g);
        l.width_scale = sample_dist(cfg.width_scale, g);
        l.dispersion = sample_dist(cfg.dispersion, g);
        latents.push_back(l);
    }
    return latents;
}

std::vector<double> draw_pool(const CrowdConfig& cfg, std::uint64_t stream,
                              std::uint64_t pool_index) {
    std::vector<double> biases;
    biases.reserve(cfg.n_annotators);
    for (int i = 0; i < cfg.n_annotators; ++i) {
        auto g = make_rng(substream_key(cfg.seed, stream, pool_index, i));
        biases.push_back(cfg.bias_spread * next_normal(g));
    }
    return biases;
}

// One annotator's range for one instance. Width and center dispersion are
// scaled by the cumulative effect multipliers; the range is clipped to the
// unit scale, which slightly shrinks widths near the boundaries.
RangeAnnotation draw_range(const CrowdConfig& cfg, const InstanceLatents& latent,
                           double width_mult, double dispersion_mult, double bias,
                           std::mt19937_64& g) {
    const double jitter = next_uniform(g, 1.0 - cfg.width_jitter, 1.0 + cfg.width_jitter);
    const double noise = cfg.center_jitter * next_normal(g);
    const double width = std::clamp(latent.width_scale * width_mult * jitter, 0.0, 1.0);
    const double center =
        std::clamp(latent.true_value + latent.dispersion * dispersion_mult * bias + noise, 0.0, 1.0);
    RangeAnnotation ann;
    ann.lower = std::max(center - width / 2.0, 0.0);
    ann.upper = std::min(center + width / 2.0, 1.0);
    return ann;
}

std::vector<RangeAnnotation> annotate_instance(const CrowdConfig& cfg,
                                               const InstanceLatents& latent,
                                               const std::string& instance_id,
                                               const std::vector<std::string>& annotator_ids,
                                               const std::vector<double>& biases,
                                               double width_mult, double dispersion_mult,
                                               std::uint64_t stream, std::uint64_t batch,
                                               std::uint64_t instance_index) {
    auto g = make_rng(substream_key(cfg.seed, stream, batch, instance_index));
    std::vector<RangeAnnotation> out;
    out.reserve(cfg.n_annotators);
    for (int i = 0; i < cfg.n_annotators; ++i) {
        RangeAnnotation ann = draw_range(cfg, latent, width_mult, dispersion_mult, biases[i], g);
        ann.instance_id = instance_id;
        ann.annotator_id = annotator_ids[i];
        out.push_back(std::move(ann));
    }
    return out;
}

std::string padded(int value, int width) {
    std::string digits = std::to_string(value);
    if (static_cast<int>(digits.size()) < width) {
        digits.insert(0, width - digits.size(), '0');
    }
    return digits;
}

std::vector<std::string> make_instance_ids(int n) {
    const int width = static_cast<int>(std::to_string(n).size());
    std::vector<std::string> ids;
    ids.reserve(n);
    for (int x = 0; x < n; ++x) ids.push_back("i" + padded(x + 1, width));
    return ids;
}

std::vector<std::string> make_annotator_ids(std::string_view prefix, int n) {
    const int width = static_cast<int>(std::to_string(n).size());
    std::vector<std::string> ids;
    ids.reserve(n);
    for (int i = 0; i < n; ++i) {
        ids.push_back(std::string(prefix) + "-w" + padded(i + 1, width));
    }
    return ids;
}

}  // namespace

void validate_config(const CrowdConfig& cfg) {
    if (cfg.n_instances < 1) throw Error("config: n_instances must be >= 1");
    if (cfg.n_annotators < 2) throw Error("config: n_annotators must be >= 2");
    if (cfg.n_groups < 1) throw Error("config: n_groups must be >= 1");
    validate_dist(cfg.width_scale, "width_scale", 0.0, 1.0);
    validate_dist(cfg.dispersion, "dispersion", 0.0, 1e9);
    if (!(cfg.bias_spread >= 0.0)) throw Error("config: bias_spread must be >= 0");
    if (!(cfg.width_jitter >= 0.0 && cfg.width_jitter <= 1.0)) {
        throw Error("config: width_jitter must lie in [0, 1]");
    }
    if (!(cfg.center_jitter >= 0.0)) throw Error("config: center_jitter must be >= 0");
}

void validate_effects(const EffectModel& fx) {
    if (!(fx.context_width_factor > 0.0 && fx.context_width_factor <= 1.0)) {
        throw Error("effects: context_width_factor must lie in (0, 1]");
    }
    if (!(fx.deliberation_dispersion_factor > 0.0 && fx.deliberation_dispersion_factor <= 1.0)) {
        throw Error("effects: deliberation_dispersion_factor must lie in (0, 1]");
    }
    if (!(fx.context_dispersion_factor > 0.0)) {
        throw Error("effects: context_dispersion_factor must be positive");
    }
    if (!(fx.deliberation_width_factor > 0.0)) {
        throw Error("effects: deliberation_width_factor must be positive");
    }
}

Dataset generate_dataset(const CrowdConfig& cfg, const EffectModel& fx) {
    validate_config(cfg);
    validate_effects(fx);

    const auto latents = draw_latents(cfg);
    const auto instance_ids = make_instance_ids(cfg.n_instances);
    const int group_size = (cfg.n_instances + cfg.n_groups - 1) / cfg.n_groups;

    Dataset d;
    d.scale = {0.0, 1.0, "unit"};
    d.instances.reserve(cfg.n_instances);
    for (int x = 0; x < cfg.n_instances; ++x) {
        Instance inst;
        inst.id = instance_ids[x];
        inst.content = "synthetic item " + std::to_string(x + 1);
        inst.group = "g" + std::to_string(x / group_size + 1);
        d.instances.push_back(std::move(inst));
    }

    struct CondSpec {
        std::string_view name;
        double width_mult;
        double dispersion_mult;
    };
    const CondSpec specs[] = {
        {kBaselineCondition, 1.0, 1.0},
        {kContextCondition, fx.context_width_factor, fx.context_dispersion_factor},
        {kDeliberationCondition, fx.deliberation_width_factor, fx.deliberation_dispersion_factor},
    };

    std::uint64_t cond_index = 0;
    for (const auto& spec : specs) {
        ConditionSet cond;
        cond.name = std::string(spec.name);
        const auto annotator_ids = make_annotator_ids(spec.name, cfg.n_annotators);
        const auto biases = draw_pool(cfg, kPoolStream, cond_index);
        cond.annotations.reserve(static_cast<std::size_t>(cfg.n_instances) * cfg.n_annotators);
        for (int x = 0; x < cfg.n_instances; ++x) {
            auto anns = annotate_instance(cfg, latents[x], instance_ids[x], annotator_ids, biases,
                                          spec.width_mult, spec.dispersion_mult, kAnnotateStream,
                                          cond_index, x);
            for (auto& a : anns) cond.annotations.push_back(std::move(a));
        }
        d.conditions.push_back(std::move(cond));
        ++cond_index;
    }

    std::sort(d.conditions.begin(), d.conditions.end(),
              [](const ConditionSet& a, const ConditionSet& b) { return a.name < b.name; });
    return d;
}

std::vector<RoundSummary> iterate_sieve(const CrowdConfig& cfg, const EffectModel& fx,
                                        const IterateOptions& opts) {
    validate_config(cfg);
    validate_effects(fx);
    if (opts.rounds < 1) throw Error("iterate: rounds must be >= 1");
    if (!(opts.fraction >= 0.0 && opts.fraction <= 1.0)) {
        throw Error("iterate: fraction must lie in [0, 1]");
    }

    const auto latents = draw_latents(cfg);
    const auto instance_ids = make_instance_ids(cfg.n_instances);
    const auto annotator_ids = make_annotator_ids("iter", cfg.n_annotators);

    std::vector<double> width_mult(cfg.n_instances, 1.0);
    std::vector<double> dispersion_mult(cfg.n_instances, 1.0);

    std::vector<std::vector<RangeAnnotation>> current(cfg.n_instances);
    {
        const auto biases = draw_pool(cfg, kIterPoolStream, 0);
        for (int x = 0; x < cfg.n_instances; ++x) {
            current[x] = annotate_instance(cfg, latents[x], instance_ids[x], annotator_ids, biases,
                                           1.0, 1.0, kIterAnnotateStream, 0, x);
        }
    }

    std::vector<double> ambiguity(cfg.n_instances);
    std::vector<double> disagreement(cfg.n_instances);
    auto rescore = [&](int x) {
        ambiguity[x] = instance_ambiguity(current[x]);
        disagreement[x] = instance_disagreement(current[x]);
    };
    for (int x = 0; x < cfg.n_instances; ++x) rescore(x);

    auto summarize = [&](int affected) {
        RoundSummary s;
        s.mean_ambiguity = compensated_mean(ambiguity);
        s.mean_disagreement = compensated_mean(disagreement);
        s.ci_ambiguity = bootstrap_ci(ambiguity, opts.boot);
        s.ci_disagreement = bootstrap_ci(disagreement, opts.boot);
        s.instance_count = cfg.n_instances;
        s.affected_count = affected;
        return s;
    };
    auto converged = [&](const RoundSummary& s) {
        return opts.tolerance > 0.0 && s.mean_ambiguity < opts.tolerance &&
               s.mean_disagreement < opts.tolerance;
    };

    std::vector<RoundSummary> trajectory;
    trajectory.push_back(summarize(0));
    if (converged(trajectory.back())) return trajectory;

    for (int round = 2; round <= opts.rounds; ++round) {
        // Generation-order ids are sorted, so the table rows line up with the
        // instance index.
        ScoreTable table;
        table.condition = "current";
        for (int x = 0; x < cfg.n_instances; ++x) {
            table.rows.push_back(
                {instance_ids[x], ambiguity[x], disagreement[x], cfg.n_annotators});
        }
        const auto assignments = assign_interventions(table, compute_cutoffs(table, opts.fraction));

        const std::uint64_t batch = static_cast<std::uint64_t>(round) - 1;
        std::vector<double> biases;
        int affected = 0;
        for (int x = 0; x < cfg.n_instances; ++x) {
            const Decision decision = assignments[x].decision;
            if (decision == Decision::None) continue;
            if (decision == Decision::Context) {
                width_mult[x] *= fx.context_width_factor;
                dispersion_mult[x] *= fx.context_dispersion_factor;
            } else {
                dispersion_mult[x] *= fx.deliberation_dispersion_factor;
                width_mult[x] *= fx.deliberation_width_factor;
            }
            if (biases.empty()) biases = draw_pool(cfg, kIterPoolStream, batch);
            current[x] = annotate_instance(cfg, latents[x], instance_ids[x], annotator_ids, biases,
                                           width_mult[x], dispersion_mult[x], kIterAnnotateStream,
                                           batch, x);
            rescore(x);
            ++affected;
        }

        trajectory.push_back(summarize(affected));
        if (converged(trajectory.back())) break;
    }
    return trajectory;
}

namespace {

DistSpec dist_from_json(const nlohmann::json& j, std::string_view name) {
    if (j.is_number()) {
        return DistSpec::constant(j.get<double>());
    }
    if (!j.is_object() || !j.contains("kind")) {
        throw ParseError("config: '" + std::string(name) +
                         "' must be a number or an object with 'kind'");
    }
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") {
        return DistSpec::constant(j.at("value").get<double>());
    }
    if (kind == "uniform") {
        return DistSpec::uniform(j.at("lo").get<double>(), j.at("hi").get<double>());
    }
    throw ParseError("config: unknown distribution kind '" + kind + "'");
}

nlohmann::ordered_json dist_to_json(const DistSpec& d) {
    nlohmann::ordered_json j;
    if (d.kind == DistSpec::Kind::Constant) {
        j["kind"] = "constant";
        j["value"] = d.a;
    } else {
        j["kind"] = "uniform";
        j["lo"] = d.a;
        j["hi"] = d.b;
    }
    return j;
}

}  // namespace

CrowdConfig crowd_config_from_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("config JSON parse error: ") + e.what());
    }
    CrowdConfig cfg;
    cfg.n_instances = doc.value("n_instances", cfg.n_instances);
    cfg.n_annotators = doc.value("n_annotators", cfg.n_annotators);
    cfg.n_groups = doc.value("n_groups", cfg.n_groups);
    if (doc.contains("width_scale")) cfg.width_scale = dist_from_json(doc.at("width_scale"), "width_scale");
    if (doc.contains("dispersion")) cfg.dispersion = dist_from_json(doc.at("dispersion"), "dispersion");
    cfg.bias_spread = doc.value("bias_spread", cfg.bias_spread);
    cfg.width_jitter = doc.value("width_jitter", cfg.width_jitter);
    cfg.center_jitter = doc.value("center_jitter", cfg.center_jitter);
    cfg.seed = doc.value("seed", cfg.seed);
    return cfg;
}

EffectModel effect_model_from_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("config JSON parse error: ") + e.what());
    }
    EffectModel fx;
    const nlohmann::json& e = doc.contains("effects") ? doc.at("effects") : doc;
    fx.context_width_factor = e.value("context_width_factor", fx.context_width_factor);
    fx.context_dispersion_factor = e.value("context_dispersion_factor", fx.context_dispersion_factor);
    fx.deliberation_dispersion_factor =
        e.value("deliberation_dispersion_factor", fx.deliberation_dispersion_factor);
    fx.deliberation_width_factor = e.value("deliberation_width_factor", fx.deliberation_width_factor);
    return fx;
}

std::string crowd_config_to_json(const CrowdConfig& cfg, const EffectModel& fx) {
    nlohmann::ordered_json doc;
    doc["n_instances"] = cfg.n_instances;
    doc["n_annotators"] = cfg.n_annotators;
    doc["n_groups"] = cfg.n_groups;
    doc["width_scale"] = dist_to_json(cfg.width_scale);
    doc["dispersion"] = dist_to_json(cfg.dispersion);
    doc["bias_spread"] = cfg.bias_spread;
    doc["width_jitter"] = cfg.width_jitter;
    doc["center_jitter"] = cfg.center_jitter;
    doc["seed"] = cfg.seed;
    nlohmann::ordered_json effects;
    effects["context_width_factor"] = fx.context_width_factor;
    effects["context_dispersion_factor"] = fx.context_dispersion_factor;
    effects["deliberation_dispersion_factor"] = fx.deliberation_dispersion_factor;
    effects["deliberation_width_factor"] = fx.deliberation_width_factor;
    doc["effects"] = std::move(effects);
    return doc.dump(2) + "\n";
}

}  // namespace sieve
