#include "sieve/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <doctest.h>

#include "sieve/error.hpp"
#include "sieve/metrics.hpp"
#include "sieve/numeric.hpp"
#include "sieve/synthetic.hpp"

#include "test_helpers.hpp"

using namespace sieve;

namespace {

Dataset small_synth(std::uint64_t seed, int instances = 12, int annotators = 6) {
    CrowdConfig cfg;
    cfg.n_instances = instances;
    cfg.n_annotators = annotators;
    cfg.seed = seed;
    return generate_dataset(cfg, EffectModel{});
}

std::vector<InterventionAssignment> assignments_at(const Dataset& d, double fraction) {
    const ScoreTable table = score_table(d, kBaselineCondition);
    return assign_interventions(table, compute_cutoffs(table, fraction));
}

}  // namespace

TEST_CASE("fraction 0 composes the baseline verbatim") {
    const Dataset d = small_synth(31);
    const auto assignments = assignments_at(d, 0.0);
    const ComposedRound round = compose_counterfactual(d, assignments);
    CHECK(round.affected_count == 0);
    CHECK(round.annotations == d.find_condition(kBaselineCondition)->annotations);
    for (const auto& [id, cond] : round.sources) {
        CHECK(cond == kBaselineCondition);
    }
}

TEST_CASE("context assignments substitute the context annotations verbatim") {
    const Dataset d = small_synth(32);
    auto assignments = assignments_at(d, 0.0);
    assignments[3].decision = Decision::Context;
    const ComposedRound round = compose_counterfactual(d, assignments);
    CHECK(round.affected_count == 1);

    const auto groups = group_by_instance(round.annotations);
    const auto ctx_groups = group_by_instance(d.find_condition(kContextCondition)->annotations);
    const auto base_groups = group_by_instance(d.find_condition(kBaselineCondition)->annotations);
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const auto& expected = (i == 3) ? ctx_groups[i].second : base_groups[i].second;
        REQUIRE(groups[i].second.size() == expected.size());
        for (std::size_t j = 0; j < expected.size(); ++j) {
            CHECK(groups[i].second[j] == expected[j]);
        }
    }
}

TEST_CASE("composition fails when the target condition lacks the instance") {
    Dataset d = small_synth(33);
    auto assignments = assignments_at(d, 0.0);
    assignments[0].decision = Decision::Deliberation;
    // strip the deliberation annotations for that instance
    auto& delib = const_cast<ConditionSet&>(*d.find_condition(kDeliberationCondition));
    const std::string victim = assignments[0].instance_id;
    std::erase_if(delib.annotations,
                  [&](const RangeAnnotation& a) { return a.instance_id == victim; });
    CHECK_THROWS_WITH_AS(compose_counterfactual(d, assignments),
                         doctest::Contains(victim.c_str()), Error);
}

TEST_CASE("fraction 0 evaluation equals the baseline means bit for bit") {
    const Dataset d = small_synth(34);
    const BootstrapConfig boot{2000, 0.95, 7};
    const RoundSummary summary =
        evaluate_round(compose_counterfactual(d, assignments_at(d, 0.0)), boot);

    const ScoreTable table = score_table(d, kBaselineCondition);
    std::vector<double> ma;
    std::vector<double> md;
    for (const auto& row : table.rows) {
        ma.push_back(row.ambiguity);
        md.push_back(row.disagreement);
    }
    CHECK(summary.mean_ambiguity == compensated_mean(ma));
    CHECK(summary.mean_disagreement == compensated_mean(md));
    CHECK(summary.instance_count == static_cast<int>(table.rows.size()));
    CHECK(summary.affected_count == 0);
}

TEST_CASE("evaluation is deterministic in the seed") {
    const Dataset d = small_synth(35);
    const auto round = compose_counterfactual(d, assignments_at(d, 0.1));
    const RoundSummary a = evaluate_round(round, {3000, 0.95, 11});
    const RoundSummary b = evaluate_round(round, {3000, 0.95, 11});
    CHECK(a.ci_ambiguity == b.ci_ambiguity);
    CHECK(a.ci_disagreement == b.ci_disagreement);
    CHECK(a.ci_ambiguity.lo <= a.mean_ambiguity);
    CHECK(a.mean_ambiguity <= a.ci_ambiguity.hi);
    CHECK(a.ci_disagreement.lo <= a.mean_disagreement);
    CHECK(a.mean_disagreement <= a.ci_disagreement.hi);
}

TEST_CASE("changing one assignment only moves that instance's scores") {
    const Dataset d = small_synth(36);
    auto base_assignments = assignments_at(d, 0.0);
    auto changed = base_assignments;
    changed[5].decision = Decision::Context;

    const auto base_groups =
        group_by_instance(compose_counterfactual(d, base_assignments).annotations);
    const ComposedRound changed_round = compose_counterfactual(d, changed);
    const auto changed_groups = group_by_instance(changed_round.annotations);
    REQUIRE(base_groups.size() == changed_groups.size());
    for (std::size_t i = 0; i < base_groups.size(); ++i) {
        const double base_ma = instance_ambiguity(base_groups[i].second);
        const double changed_ma = instance_ambiguity(changed_groups[i].second);
        if (i == 5) continue;
        CHECK(base_ma == changed_ma);
        CHECK(instance_disagreement(base_groups[i].second) ==
              instance_disagreement(changed_groups[i].second));
    }
}

TEST_CASE("uniform baseline round reproduces the baseline summary") {
    const Dataset d = small_synth(37);
    const BootstrapConfig boot{2000, 0.95, 3};
    const RoundSummary uniform = uniform_round(d, kBaselineCondition, boot);
    const RoundSummary composed =
        evaluate_round(compose_counterfactual(d, assignments_at(d, 0.0)), boot);
    CHECK(uniform.mean_ambiguity == composed.mean_ambiguity);
    CHECK(uniform.mean_disagreement == composed.mean_disagreement);
    CHECK(uniform.ci_ambiguity == composed.ci_ambiguity);
    CHECK(uniform.ci_disagreement == composed.ci_disagreement);
    CHECK(uniform.affected_count == uniform.instance_count);
    CHECK_THROWS_AS(uniform_round(d, "missing", boot), Error);
}

TEST_CASE("slice membership comes from the baseline table") {
    // Hand-built dataset: instance "hi" is widest in baseline but narrow in
    // context; the most-ambiguous slice must still track "hi".
    Dataset d;
    d.scale = {0.0, 1.0, ""};
    d.instances.push_back({"hi", "", {}, {}});
    d.instances.push_back({"lo", "", {}, {}});
    auto add_condition = [&](const std::string& name, double hi_width, double lo_width) {
        ConditionSet cond;
        cond.name = name;
        cond.annotations = {
            test::ann("hi", "p1", 0.2, 0.2 + hi_width),
            test::ann("hi", "p2", 0.3, 0.3 + hi_width),
            test::ann("lo", "p1", 0.4, 0.4 + lo_width),
            test::ann("lo", "p2", 0.5, 0.5 + lo_width),
        };
        std::sort(cond.annotations.begin(), cond.annotations.end(),
                  [](const RangeAnnotation& a, const RangeAnnotation& b) {
                      return std::tie(a.instance_id, a.annotator_id) <
                             std::tie(b.instance_id, b.annotator_id);
                  });
        d.conditions.push_back(std::move(cond));
    };
    add_condition("baseline", 0.5, 0.1);
    add_condition("context", 0.05, 0.1);  // "hi" shrinks drastically
    add_condition("deliberation", 0.5, 0.1);

    const auto [ambiguous, disagreement] = slice_report(d, 0.5);
    REQUIRE(ambiguous.members.size() == 1);
    CHECK(ambiguous.members[0] == "hi");
    REQUIRE(ambiguous.per_condition.size() == 3);
    CHECK(ambiguous.per_condition[0].condition == "baseline");
    CHECK(ambiguous.per_condition[1].condition == "context");
    // context mean over the slice uses the context scores of the same member
    CHECK(ambiguous.per_condition[1].mean_ambiguity == doctest::Approx(0.05));
    // reduction reported per 100 * (baseline - condition) / baseline
    CHECK(ambiguous.per_condition[1].pct_change_ambiguity == doctest::Approx(90.0));
}

TEST_CASE("slice sizing follows the ceil rule with ties") {
    CrowdConfig cfg;
    cfg.n_instances = 50;
    cfg.n_annotators = 5;
    cfg.seed = 88;
    const Dataset d = generate_dataset(cfg, EffectModel{});
    const auto [ambiguous, disagreement] = slice_report(d, 0.1);
    CHECK(ambiguous.members.size() >= 5);
    CHECK(disagreement.members.size() >= 5);
    CHECK(ambiguous.per_condition.size() == 3);
}

TEST_CASE("identical conditions produce zero percent change") {
    Dataset d = small_synth(38);
    // overwrite context and deliberation with copies of baseline
    const auto& base = d.find_condition(kBaselineCondition)->annotations;
    for (auto& cond : d.conditions) {
        if (cond.name != kBaselineCondition) cond.annotations = base;
    }
    const auto [ambiguous, disagreement] = slice_report(d, 0.25);
    for (const auto* report : {&ambiguous, &disagreement}) {
        for (const auto& row : report->per_condition) {
            if (std::isnan(row.pct_change_ambiguity)) continue;
            CHECK(row.pct_change_ambiguity == 0.0);
            CHECK(row.pct_change_disagreement == 0.0);
        }
    }
}

TEST_CASE("slice report rejects missing conditions and empty slices") {
    Dataset d = small_synth(39);
    CHECK_THROWS_AS(slice_report(d, 0.0), Error);
    d.conditions.erase(d.conditions.begin());  // drop baseline
    CHECK_THROWS_AS(slice_report(d, 0.1), Error);
}

TEST_CASE("threshold sweep emits one row per fraction with consistent sources") {
    const Dataset d = small_synth(40, 20, 5);
    const std::vector<double> fractions = {0.0, 0.05, 0.1, 0.15, 0.2, 0.25};
    const BootstrapConfig boot{500, 0.95, 13};
    const auto rows = threshold_sweep(d, fractions, boot);
    REQUIRE(rows.size() == 6);

    // fraction 0 row equals a plain baseline evaluation, bit for bit
    const RoundSummary baseline =
        evaluate_round(compose_counterfactual(d, assignments_at(d, 0.0)), boot);
    CHECK(rows[0].second.mean_ambiguity == baseline.mean_ambiguity);
    CHECK(rows[0].second.mean_disagreement == baseline.mean_disagreement);
    CHECK(rows[0].second.ci_ambiguity == baseline.ci_ambiguity);
    CHECK(rows[0].second.ci_disagreement == baseline.ci_disagreement);
    CHECK(rows[0].second.affected_count == 0);

    // affected counts are nondecreasing over sorted fractions
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].second.affected_count >= rows[i - 1].second.affected_count);
    }

    // the affected count matches the non-None assignments at each fraction
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto assignments = assignments_at(d, fractions[i]);
        const auto affected = std::count_if(
            assignments.begin(), assignments.end(),
            [](const InterventionAssignment& a) { return a.decision != Decision::None; });
        CHECK(rows[i].second.affected_count == affected);
    }

    CHECK(sweep_to_csv(rows) == sweep_to_csv(threshold_sweep(d, fractions, boot)));

    const std::vector<double> bad = {0.5, 1.5};
    CHECK_THROWS_AS(threshold_sweep(d, bad, boot), Error);
}

TEST_CASE("sweep rows change exactly the assigned instances") {
    const Dataset d = small_synth(41, 20, 5);
    const ScoreTable table = score_table(d, kBaselineCondition);
    const auto assignments = assign_interventions(table, compute_cutoffs(table, 0.2));
    const ComposedRound round = compose_counterfactual(d, assignments);
    std::set<std::string> moved;
    for (const auto& [id, cond] : round.sources) {
        if (cond != kBaselineCondition) moved.insert(id);
    }
    std::set<std::string> assigned;
    for (const auto& a : assignments) {
        if (a.decision != Decision::None) assigned.insert(a.instance_id);
    }
    CHECK(moved == assigned);
}

TEST_CASE("a width-shrinking context effect lowers the uniform-round ambiguity") {
    EffectModel fx;
    fx.context_width_factor = 0.5;
    fx.context_dispersion_factor = 1.0;
    CrowdConfig cfg;
    cfg.n_instances = 30;
    cfg.n_annotators = 10;
    cfg.seed = 451;
    const Dataset d = generate_dataset(cfg, fx);
    const BootstrapConfig boot{500, 0.95, 4};
    CHECK(uniform_round(d, kContextCondition, boot).mean_ambiguity <
          uniform_round(d, kBaselineCondition, boot).mean_ambiguity);
}

TEST_CASE("summary serializers are stable") {
    const Dataset d = small_synth(42);
    const RoundSummary s = uniform_round(d, kContextCondition, {200, 0.95, 1});
    CHECK(summary_to_csv(s) == summary_to_csv(s));
    CHECK(summary_to_json(s).find("mean_ambiguity") != std::string::npos);
    const auto [ambiguous, disagreement] = slice_report(d, 0.25);
    const std::string csv = slices_to_csv(ambiguous, disagreement);
    CHECK(csv.find("most_ambiguous") != std::string::npos);
    CHECK(csv.find("most_disagreement") != std::string::npos);
}
