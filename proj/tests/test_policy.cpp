#include "sieve/policy.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <doctest.h>

#include "sieve/error.hpp"
#include "sieve/rng.hpp"

using namespace sieve;

namespace {

ScoreTable random_table(int n, std::uint64_t seed) {
    ScoreTable table;
    table.condition = "baseline";
    auto g = make_rng(substream_key(seed, 0xF00));
    for (int i = 0; i < n; ++i) {
        InstanceScores row;
        row.instance_id = "i" + std::to_string(1000 + i);
        row.ambiguity = next_unit(g);
        row.disagreement = next_uniform(g, -2.0, 2.0);
        row.annotator_count = 5;
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::set<std::string> selected_ids(const std::vector<InterventionAssignment>& assignments,
                                   bool include_deliberation) {
    std::set<std::string> out;
    for (const auto& a : assignments) {
        if (a.decision == Decision::Context ||
            (include_deliberation && a.decision == Decision::Deliberation)) {
            out.insert(a.instance_id);
        }
    }
    return out;
}

}  // namespace

TEST_CASE("quantile_cutoff picks the k-th largest score") {
    std::vector<double> scores;
    for (int i = 1; i <= 50; ++i) scores.push_back(static_cast<double>(i));
    // k = ceil(0.1 * 50) = 5, so the cutoff is the 5th largest value.
    CHECK(quantile_cutoff(scores, 0.1) == 46.0);
    CHECK(quantile_cutoff(scores, 1.0) == 1.0);
}

TEST_CASE("quantile_cutoff fraction 0 disqualifies everything") {
    std::vector<double> scores = {1.0, 2.0, 3.0};
    CHECK(std::isinf(quantile_cutoff(scores, 0.0)));
}

TEST_CASE("ties at the cutoff all qualify") {
    std::vector<double> scores(50, 0.7);
    const double cutoff = quantile_cutoff(scores, 0.1);
    CHECK(cutoff == 0.7);
    const auto qualifying = std::count_if(scores.begin(), scores.end(),
                                          [&](double s) { return s >= cutoff; });
    CHECK(qualifying == 50);
}

TEST_CASE("quantile_cutoff rejects bad input") {
    CHECK_THROWS_AS(quantile_cutoff({}, 0.1), Error);
    std::vector<double> scores = {1.0};
    CHECK_THROWS_AS(quantile_cutoff(scores, -0.1), Error);
    CHECK_THROWS_AS(quantile_cutoff(scores, 1.5), Error);
}

TEST_CASE("ambiguity is checked before disagreement") {
    ScoreTable table;
    table.condition = "baseline";
    table.rows = {
        {"both-high", 0.9, 1.5, 5},   // qualifies on both -> Context wins
        {"only-disagree", 0.1, 1.8, 5},
        {"neither", 0.1, -1.0, 5},
        {"only-ambiguous", 0.95, -1.5, 5},
    };
    SieveCutoffs cutoffs;
    cutoffs.fraction = 0.5;
    cutoffs.ambiguity_cutoff = 0.9;
    cutoffs.disagreement_cutoff = 1.0;
    const auto assignments = assign_interventions(table, cutoffs);
    REQUIRE(assignments.size() == 4);
    auto decision_of = [&](const std::string& id) {
        for (const auto& a : assignments) {
            if (a.instance_id == id) return a.decision;
        }
        FAIL("missing assignment");
        return Decision::None;
    };
    CHECK(decision_of("both-high") == Decision::Context);
    CHECK(decision_of("only-disagree") == Decision::Deliberation);
    CHECK(decision_of("neither") == Decision::None);
    CHECK(decision_of("only-ambiguous") == Decision::Context);
}

TEST_CASE("every instance gets exactly one decision and coverage holds") {
    for (int n : {10, 50, 200}) {
        for (double f : {0.0, 0.05, 0.1, 0.25}) {
            const ScoreTable table = random_table(n, 42 + n);
            const auto assignments = assign_interventions(table, compute_cutoffs(table, f));
            CHECK(assignments.size() == static_cast<std::size_t>(n));
            const auto context = selected_ids(assignments, false);
            const auto both = selected_ids(assignments, true);
            const auto k = static_cast<std::size_t>(std::ceil(f * n - 1e-9));
            if (f > 0.0) {
                CHECK(context.size() >= k);
            } else {
                CHECK(both.empty());
            }
            CHECK(both.size() <= static_cast<std::size_t>(n));
        }
    }
}

TEST_CASE("raising the fraction never drops an instance from the selection") {
    const double fractions[] = {0.0, 0.05, 0.1, 0.25, 0.5, 1.0};
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        const ScoreTable table = random_table(60, seed);
        std::set<std::string> previous;
        for (double f : fractions) {
            const auto assignments = assign_interventions(table, compute_cutoffs(table, f));
            const auto current = selected_ids(assignments, true);
            CHECK(std::includes(current.begin(), current.end(), previous.begin(),
                                previous.end()));
            previous = current;
        }
    }
}

TEST_CASE("assignments are deterministic") {
    const ScoreTable table = random_table(30, 7);
    const auto a = assign_interventions(table, compute_cutoffs(table, 0.2));
    const auto b = assign_interventions(table, compute_cutoffs(table, 0.2));
    CHECK(assignments_to_csv(a) == assignments_to_csv(b));
}

TEST_CASE("scaling all ambiguity scores leaves the Context set unchanged") {
    ScoreTable table = random_table(40, 11);
    const auto before =
        selected_ids(assign_interventions(table, compute_cutoffs(table, 0.15)), false);
    ScoreTable scaled = table;
    for (auto& row : scaled.rows) row.ambiguity *= 3.7;
    const auto after =
        selected_ids(assign_interventions(scaled, compute_cutoffs(scaled, 0.15)), false);
    CHECK(before == after);
}

TEST_CASE("separate per-metric fractions keep the cutoff invariant") {
    const ScoreTable table = random_table(40, 13);
    const SieveCutoffs cutoffs = compute_cutoffs(table, 0.0, 0.2);
    CHECK(std::isinf(cutoffs.ambiguity_cutoff));
    CHECK(!std::isinf(cutoffs.disagreement_cutoff));
    CHECK(cutoffs.fraction == 0.2);

    const SieveCutoffs none = compute_cutoffs(table, 0.0, 0.0);
    CHECK(none.fraction == 0.0);
    CHECK(std::isinf(none.ambiguity_cutoff));
    CHECK(std::isinf(none.disagreement_cutoff));
}

TEST_CASE("decision strings round-trip") {
    for (Decision d : {Decision::None, Decision::Context, Decision::Deliberation}) {
        CHECK(decision_from_string(to_string(d)) == d);
    }
    CHECK_THROWS_AS(decision_from_string("bogus"), Error);
}
