#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sieve/simulation.hpp"
#include "sieve/types.hpp"

namespace sieve {

// Scalar distribution for per-instance latent parameters.
struct DistSpec {
    enum class Kind { Constant, Uniform };

    Kind kind = Kind::Constant;
    double a = 0.0;  // constant value, or uniform lower bound
    double b = 0.0;  // uniform upper bound

    static DistSpec constant(double v) { return {Kind::Constant, v, v}; }
    static DistSpec uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }

    double mean() const { return kind == Kind::Constant ? a : (a + b) / 2.0; }
};

// Generative model of an annotator crowd. Each instance x carries a latent
// true value t_x ~ U[0,1], a width scale w_x, and a center dispersion s_x.
// Annotator i in a pool has a perspective offset b_i; their range centers on
// clamp(t_x + s_x * b_i + noise) with a width drawn around w_x. Everything is
// keyed on the seed, so identical configs produce byte-identical datasets.
struct CrowdConfig {
    int n_instances = 50;
    int n_annotators = 25;
    int n_groups = 5;
    DistSpec width_scale = DistSpec::uniform(0.10, 0.45);
    DistSpec dispersion = DistSpec::uniform(0.02, 0.20);
    double bias_spread = 1.0;     // scales annotator offsets (standard normal draws)
    double width_jitter = 0.25;   // per-annotator width multiplier U(1-j, 1+j)
    double center_jitter = 0.01;  // sd of the per-annotation center noise
    std::uint64_t seed = 0;
};

// Multiplicative impact of each intervention. Context shrinks widths
// (ambiguity); deliberation shrinks center dispersion (disagreement). The
// cross factors default slightly above 1 to mirror the observed side effects
// of each intervention on the metric it does not target.
struct EffectModel {
    double context_width_factor = 0.75;
    double context_dispersion_factor = 1.05;
    double deliberation_dispersion_factor = 0.8;
    double deliberation_width_factor = 1.05;
};

void validate_config(const CrowdConfig& cfg);
void validate_effects(const EffectModel& fx);

// Three-condition dataset on the unit scale: baseline as drawn, context with
// widths scaled by context_width_factor, deliberation with dispersion scaled
// by deliberation_dispersion_factor. Each condition gets a fresh annotator
// pool.
Dataset generate_dataset(const CrowdConfig& cfg, const EffectModel& fx);

struct IterateOptions {
    double fraction = 0.1;
    int rounds = 1;
    // Early stop once both mean metrics fall below this; 0 never stops early.
    double tolerance = 0.0;
    BootstrapConfig boot;
};

// Multi-round sieving over a single evolving annotation set. Round 1 scores
// the initial data; each later round assigns interventions from the current
// scores, re-annotates only the assigned instances with the effect factors
// applied cumulatively, and rescores.
std::vector<RoundSummary> iterate_sieve(const CrowdConfig& cfg, const EffectModel& fx,
                                        const IterateOptions& opts);

// JSON round trip for config files.
CrowdConfig crowd_config_from_json(std::string_view text);
std::string crowd_config_to_json(const CrowdConfig& cfg, const EffectModel& fx);
EffectModel effect_model_from_json(std::string_view text);

}  // namespace sieve
