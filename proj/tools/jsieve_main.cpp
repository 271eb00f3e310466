// jsieve: uncertainty decomposition and targeted-intervention simulation for
// range-based rating datasets.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sieve/dataset_io.hpp"
#include "sieve/error.hpp"
#include "sieve/io_util.hpp"
#include "sieve/manifest.hpp"
#include "sieve/metrics.hpp"
#include "sieve/policy.hpp"
#include "sieve/report.hpp"
#include "sieve/simulation.hpp"
#include "sieve/synthetic.hpp"
#include "sieve/version.hpp"

namespace fs = std::filesystem;
using namespace sieve;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;

struct CommonIn {
    std::string input;
    std::string sidecar;
};

void add_input_options(CLI::App* cmd, CommonIn& in) {
    cmd->add_option("input", in.input, "dataset file (.json, or .csv with --sidecar)")
        ->required();
    cmd->add_option("--sidecar", in.sidecar, "sidecar JSON (scale + instances) for CSV input");
}

Dataset load_dataset(RunManifest& m, const CommonIn& in) {
    std::vector<std::string> warnings;
    Dataset d;
    const fs::path path(in.input);
    if (path.extension() == ".csv") {
        if (in.sidecar.empty()) {
            throw CLI::ValidationError("--sidecar", "CSV input requires --sidecar");
        }
        const std::string annotations = read_input(m, path);
        const std::string sidecar = read_input(m, fs::path(in.sidecar));
        d = ingest_csv(annotations, sidecar, &warnings);
    } else {
        d = ingest_json(read_input(m, path), &warnings);
    }
    for (const auto& w : warnings) {
        std::cerr << "warning: " << w << "\n";
    }
    return d;
}

bool wants_json(const std::optional<std::string>& out) {
    return out && fs::path(*out).extension() == ".json";
}

// Writes the payload and its manifest (or prints to stdout when no -o).
void emit(RunManifest& m, const std::optional<std::string>& out, const std::string& payload) {
    if (!out) {
        std::cout << payload;
        return;
    }
    m.outputs.push_back(*out);
    atomic_write_file(fs::path(*out), payload);
    atomic_write_file(fs::path(*out + ".manifest.json"), manifest_to_json(m));
}

RunManifest new_manifest(std::string command) {
    RunManifest m;
    m.command = std::move(command);
    m.version = kVersion;
    m.timestamp = utc_timestamp();
    return m;
}

std::string fractions_to_string(const std::vector<double>& fs) {
    std::string out;
    for (std::size_t i = 0; i < fs.size(); ++i) {
        if (i) out += ',';
        out += format_double(fs[i]);
    }
    return out;
}

ScoreTable load_score_table(RunManifest& m, const std::string& path,
                            std::string_view fallback_label) {
    const std::string text = read_input(m, fs::path(path));
    if (fs::path(path).extension() == ".json") {
        return score_table_from_json(text);
    }
    return score_table_from_csv(text, fallback_label);
}

int run(int argc, char** argv) {
    CLI::App app{"uncertainty decomposition and targeted-intervention simulation "
                 "for range-based rating annotations"};
    app.set_version_flag("--version", std::string("jsieve ") + kVersion);
    app.require_subcommand(1);

    // validate
    auto* validate = app.add_subcommand("validate", "check a dataset against all invariants");
    CommonIn validate_in;
    add_input_options(validate, validate_in);

    // score
    auto* score = app.add_subcommand("score", "per-instance ambiguity/disagreement table");
    CommonIn score_in;
    std::string score_condition;
    std::optional<std::string> score_out;
    add_input_options(score, score_in);
    score->add_option("--condition", score_condition, "condition to score")->required();
    score->add_option("-o,--output", score_out, "output file (.csv or .json)");

    // sieve
    auto* sieve_cmd = app.add_subcommand("sieve", "assign per-instance interventions from baseline scores");
    CommonIn sieve_in;
    double sieve_fraction = 0.1;
    std::optional<double> sieve_frac_ambiguity;
    std::optional<double> sieve_frac_disagreement;
    std::optional<std::string> sieve_out;
    add_input_options(sieve_cmd, sieve_in);
    sieve_cmd->add_option("--fraction", sieve_fraction, "top-quantile share for both metrics")
        ->required();
    sieve_cmd->add_option("--fraction-ambiguity", sieve_frac_ambiguity,
                          "override the ambiguity fraction");
    sieve_cmd->add_option("--fraction-disagreement", sieve_frac_disagreement,
                          "override the disagreement fraction");
    sieve_cmd->add_option("-o,--output", sieve_out, "output file (.csv or .json)");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "evaluate one composed counterfactual round");
    CommonIn simulate_in;
    std::optional<double> simulate_fraction;
    std::optional<std::string> simulate_uniform;
    std::uint64_t simulate_seed = 0;
    int simulate_reps = 10000;
    std::optional<std::string> simulate_out;
    add_input_options(simulate, simulate_in);
    auto* sim_frac_opt =
        simulate->add_option("--fraction", simulate_fraction, "sieve fraction for targeted composition");
    auto* sim_uniform_opt =
        simulate->add_option("--uniform", simulate_uniform, "draw every instance from this condition");
    sim_frac_opt->excludes(sim_uniform_opt);
    sim_uniform_opt->excludes(sim_frac_opt);
    simulate->add_option("--seed", simulate_seed, "bootstrap seed")->required();
    simulate->add_option("--reps", simulate_reps, "bootstrap replicates");
    simulate->add_option("-o,--output", simulate_out, "output file (.csv or .json)");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "evaluate the sieve across several fractions");
    CommonIn sweep_in;
    std::vector<double> sweep_fractions;
    std::uint64_t sweep_seed = 0;
    int sweep_reps = 10000;
    std::optional<std::string> sweep_out;
    add_input_options(sweep, sweep_in);
    sweep->add_option("--fractions", sweep_fractions, "comma-separated fractions")
        ->required()
        ->delimiter(',');
    sweep->add_option("--seed", sweep_seed, "bootstrap seed")->required();
    sweep->add_option("--reps", sweep_reps, "bootstrap replicates");
    sweep->add_option("-o,--output", sweep_out, "output file (.csv)");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic three-condition dataset");
    std::optional<std::string> synth_config;
    std::uint64_t synth_seed = 0;
    std::optional<int> synth_instances;
    std::optional<int> synth_annotators;
    std::optional<std::string> synth_out;
    synth->add_option("--config", synth_config, "crowd/effect config JSON");
    synth->add_option("--seed", synth_seed, "generation seed")->required();
    synth->add_option("--instances", synth_instances, "override instance count");
    synth->add_option("--annotators", synth_annotators, "override annotator count");
    synth->add_option("-o,--output", synth_out, "output dataset (.json)");

    // iterate
    auto* iterate = app.add_subcommand("iterate", "multi-round sieving on synthetic data");
    std::optional<std::string> iterate_config;
    double iterate_fraction = 0.1;
    int iterate_rounds = 1;
    std::uint64_t iterate_seed = 0;
    int iterate_reps = 10000;
    double iterate_tolerance = 0.0;
    std::optional<std::string> iterate_out;
    iterate->add_option("--config", iterate_config, "crowd/effect config JSON");
    iterate->add_option("--fraction", iterate_fraction, "sieve fraction per round")->required();
    iterate->add_option("--rounds", iterate_rounds, "maximum rounds")->required();
    iterate->add_option("--seed", iterate_seed, "generation seed")->required();
    iterate->add_option("--reps", iterate_reps, "bootstrap replicates");
    iterate->add_option("--tolerance", iterate_tolerance,
                        "stop once both mean metrics fall below this (0 disables)");
    iterate->add_option("-o,--output", iterate_out, "output trajectory (.csv)");

    // report
    auto* report = app.add_subcommand("report", "plot-ready panel CSVs");
    std::vector<std::string> report_inputs;
    std::string report_style;
    double report_fraction = 0.1;
    std::optional<std::uint64_t> report_seed;
    int report_reps = 10000;
    std::optional<std::string> report_out;
    report->add_option("scores", report_inputs, "score tables (slices) or a sweep CSV (sweep)")
        ->required();
    report->add_option("--style", report_style, "slices | sweep")
        ->required()
        ->check(CLI::IsMember({"slices", "sweep"}));
    report->add_option("--fraction", report_fraction, "slice fraction (slices style)");
    report->add_option("--seed", report_seed, "bootstrap/permutation seed (slices style)");
    report->add_option("--reps", report_reps, "bootstrap/permutation replicates");
    report->add_option("-o,--output", report_out, "output file (.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (validate->parsed()) {
        RunManifest m = new_manifest("validate");
        const Dataset d = load_dataset(m, validate_in);
        const ValidationReport violations = validate_dataset(d);
        if (violations.empty()) {
            std::cout << "OK: " << d.instances.size() << " instance(s), " << d.conditions.size()
                      << " condition(s)\n";
            return kExitOk;
        }
        for (const auto& v : violations) {
            std::cout << v.code << ": " << v.message << "\n";
        }
        return kExitValidation;
    }

    if (score->parsed()) {
        RunManifest m = new_manifest("score");
        m.parameters.emplace_back("condition", score_condition);
        const Dataset d = load_dataset(m, score_in);
        const ScoreTable table = score_table(d, score_condition);
        for (const auto& w : table.warnings) {
            std::cerr << "warning: " << w << "\n";
        }
        emit(m, score_out, wants_json(score_out) ? score_table_to_json(table)
                                                 : score_table_to_csv(table));
        return kExitOk;
    }

    if (sieve_cmd->parsed()) {
        RunManifest m = new_manifest("sieve");
        const double fa = sieve_frac_ambiguity.value_or(sieve_fraction);
        const double fd = sieve_frac_disagreement.value_or(sieve_fraction);
        m.parameters.emplace_back("fraction_ambiguity", format_double(fa));
        m.parameters.emplace_back("fraction_disagreement", format_double(fd));
        const Dataset d = load_dataset(m, sieve_in);
        const ScoreTable table = score_table(d, kBaselineCondition);
        const SieveCutoffs cutoffs = compute_cutoffs(table, fa, fd);
        const auto assignments = assign_interventions(table, cutoffs);
        emit(m, sieve_out, wants_json(sieve_out) ? assignments_to_json(assignments, cutoffs)
                                                 : assignments_to_csv(assignments));
        return kExitOk;
    }

    if (simulate->parsed()) {
        if (!simulate_fraction && !simulate_uniform) {
            throw CLI::RequiredError("--fraction or --uniform");
        }
        RunManifest m = new_manifest("simulate");
        m.seed = simulate_seed;
        m.parameters.emplace_back("reps", std::to_string(simulate_reps));
        const BootstrapConfig boot{simulate_reps, 0.95, simulate_seed};
        const Dataset d = load_dataset(m, simulate_in);
        RoundSummary summary;
        if (simulate_uniform) {
            m.parameters.emplace_back("uniform", *simulate_uniform);
            summary = uniform_round(d, *simulate_uniform, boot);
        } else {
            m.parameters.emplace_back("fraction", format_double(*simulate_fraction));
            const ScoreTable table = score_table(d, kBaselineCondition);
            const SieveCutoffs cutoffs = compute_cutoffs(table, *simulate_fraction);
            const auto assignments = assign_interventions(table, cutoffs);
            summary = evaluate_round(compose_counterfactual(d, assignments), boot);
        }
        emit(m, simulate_out,
             wants_json(simulate_out) ? summary_to_json(summary) : summary_to_csv(summary));
        return kExitOk;
    }

    if (sweep->parsed()) {
        RunManifest m = new_manifest("sweep");
        m.seed = sweep_seed;
        m.parameters.emplace_back("fractions", fractions_to_string(sweep_fractions));
        m.parameters.emplace_back("reps", std::to_string(sweep_reps));
        const BootstrapConfig boot{sweep_reps, 0.95, sweep_seed};
        const Dataset d = load_dataset(m, sweep_in);
        const auto rows = threshold_sweep(d, sweep_fractions, boot);
        emit(m, sweep_out, sweep_to_csv(rows));
        return kExitOk;
    }

    if (synth->parsed()) {
        RunManifest m = new_manifest("synth");
        m.seed = synth_seed;
        CrowdConfig cfg;
        EffectModel fx;
        if (synth_config) {
            const std::string text = read_input(m, fs::path(*synth_config));
            cfg = crowd_config_from_json(text);
            fx = effect_model_from_json(text);
        }
        cfg.seed = synth_seed;
        if (synth_instances) cfg.n_instances = *synth_instances;
        if (synth_annotators) cfg.n_annotators = *synth_annotators;
        m.parameters.emplace_back("n_instances", std::to_string(cfg.n_instances));
        m.parameters.emplace_back("n_annotators", std::to_string(cfg.n_annotators));
        const Dataset d = generate_dataset(cfg, fx);
        emit(m, synth_out, dataset_to_json(d));
        return kExitOk;
    }

    if (iterate->parsed()) {
        RunManifest m = new_manifest("iterate");
        m.seed = iterate_seed;
        CrowdConfig cfg;
        EffectModel fx;
        if (iterate_config) {
            const std::string text = read_input(m, fs::path(*iterate_config));
            cfg = crowd_config_from_json(text);
            fx = effect_model_from_json(text);
        }
        cfg.seed = iterate_seed;
        m.parameters.emplace_back("fraction", format_double(iterate_fraction));
        m.parameters.emplace_back("rounds", std::to_string(iterate_rounds));
        m.parameters.emplace_back("reps", std::to_string(iterate_reps));
        m.parameters.emplace_back("tolerance", format_double(iterate_tolerance));
        IterateOptions opts;
        opts.fraction = iterate_fraction;
        opts.rounds = iterate_rounds;
        opts.tolerance = iterate_tolerance;
        opts.boot = BootstrapConfig{iterate_reps, 0.95, iterate_seed};
        const auto trajectory = iterate_sieve(cfg, fx, opts);
        emit(m, iterate_out, trajectory_to_csv(trajectory));
        return kExitOk;
    }

    if (report->parsed()) {
        RunManifest m = new_manifest("report");
        m.parameters.emplace_back("style", report_style);
        if (report_style == "sweep") {
            if (report_inputs.size() != 1) {
                throw CLI::ValidationError("scores", "sweep style takes exactly one sweep CSV");
            }
            const std::string text = read_input(m, fs::path(report_inputs[0]));
            emit(m, report_out, sweep_panels_from_csv(text));
            return kExitOk;
        }
        if (report_inputs.size() != 3) {
            throw CLI::ValidationError(
                "scores", "slices style takes three score tables: baseline context deliberation");
        }
        if (!report_seed) {
            throw CLI::RequiredError("--seed (slices style)");
        }
        m.seed = *report_seed;
        m.parameters.emplace_back("fraction", format_double(report_fraction));
        m.parameters.emplace_back("reps", std::to_string(report_reps));
        const ScoreTable baseline = load_score_table(m, report_inputs[0], "baseline");
        const ScoreTable context = load_score_table(m, report_inputs[1], "context");
        const ScoreTable deliberation = load_score_table(m, report_inputs[2], "deliberation");
        const BootstrapConfig boot{report_reps, 0.95, *report_seed};
        const auto rows =
            slice_panels(baseline, context, deliberation, report_fraction, boot, report_reps);
        emit(m, report_out, slice_panels_to_csv(rows));
        return kExitOk;
    }

    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\nrun with --help for usage\n";
        return kExitUsage;
    } catch (const sieve::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}
