#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "scamwatch/runner.hpp"

using namespace scamwatch;

namespace {

std::vector<Trajectory> small_dataset() {
    auto trajs = testutil::make_linking_benchmark(4);
    // Add two normal trajectories so FAR has zero-overlap mass.
    auto filler = testutil::make_linking_benchmark(2);
    for (std::size_t i = 0; i < filler.size(); ++i) {
        Trajectory t = filler[i];
        t.trajectory_id = "norm" + std::to_string(i);
        t.scam_segment.reset();
        for (auto& ev : t.events) {
            ev.content_summary = "routine activity";
            ev.entities.clear();
        }
        trajs.push_back(std::move(t));
    }
    return trajs;
}

AssessorFn rule_fn() {
    return [](const AugmentedWindow& aug, const SkillLibrary& lib) {
        return assess_rule(aug, lib);
    };
}

}  // namespace

TEST_CASE("runner emits sorted predictions and a coherent report") {
    auto dataset = small_dataset();
    SkillLibrary lib = seed_library({"fake_online_investment_financial_scam"});
    RunOptions opt;
    auto result = run_dataset(dataset, lib, rule_fn(), opt);

    const auto spans = enumerate_windows(40, opt.stream);
    CHECK(result.predictions.size() == dataset.size() * spans.size());
    for (std::size_t i = 1; i < result.predictions.size(); ++i) {
        const auto& a = result.predictions[i - 1];
        const auto& b = result.predictions[i];
        CHECK((a.trajectory_id < b.trajectory_id ||
               (a.trajectory_id == b.trajectory_id && a.e_w < b.e_w)));
    }
    CHECK(result.report.n_scam_trajectories == 4);
    CHECK(result.report.n_normal_trajectories == 2);
    CHECK(result.report.far == 0.0);
}

TEST_CASE("parallel execution reproduces the sequential run") {
    auto dataset = small_dataset();
    SkillLibrary lib = seed_library({"fake_online_investment_financial_scam"});
    lib.set_frozen(true);

    RunOptions seq;
    RunOptions par = seq;
    par.parallel = 4;
    SkillLibrary lib2 = lib;
    auto a = run_dataset(dataset, lib, rule_fn(), seq);
    auto b = run_dataset(dataset, lib2, rule_fn(), par);
    CHECK(predictions_to_jsonl(a.predictions) == predictions_to_jsonl(b.predictions));
    CHECK(report_to_json(a.report) == report_to_json(b.report));
}

TEST_CASE("evolution demands a sequential run") {
    auto dataset = small_dataset();
    SkillLibrary lib = seed_library({"fake_online_investment_financial_scam"});
    RunOptions opt;
    opt.evolve = true;
    opt.parallel = 2;
    CHECK_THROWS_WITH(run_dataset(dataset, lib, rule_fn(), opt),
                      "evolution-requires-sequential");
}

TEST_CASE("ground-truth gating restricts evolution to overlapping windows") {
    auto dataset = small_dataset();
    SkillLibrary lib = seed_library({"fake_online_investment_financial_scam"});
    RunOptions opt;
    opt.evolve = true;
    opt.evolve_on_ground_truth = true;
    auto result = run_dataset(dataset, lib, rule_fn(), opt);
    CHECK_FALSE(result.predictions.empty());
}

TEST_CASE("predictions round-trip through JSONL") {
    auto dataset = small_dataset();
    SkillLibrary lib = seed_library({"fake_online_investment_financial_scam"});
    auto result = run_dataset(dataset, lib, rule_fn(), RunOptions{});
    const std::string jsonl = predictions_to_jsonl(result.predictions);
    auto rows = predictions_from_jsonl(jsonl);
    CHECK(predictions_to_jsonl(rows) == jsonl);
}

TEST_CASE("reports rebuilt from stored predictions match the original") {
    auto dataset = small_dataset();
    SkillLibrary lib = seed_library({"fake_online_investment_financial_scam"});
    RunOptions opt;
    auto result = run_dataset(dataset, lib, rule_fn(), opt);

    auto rows = predictions_from_jsonl(predictions_to_jsonl(result.predictions));
    auto rebuilt = compute_report(
        metric_inputs_from_predictions(dataset, rows, opt.stream.window_size));
    CHECK(report_to_json(rebuilt) == report_to_json(result.report));

    SECTION("missing trajectories are rejected") {
        rows.erase(rows.begin());
        while (!rows.empty() && rows.front().trajectory_id == result.predictions[0].trajectory_id)
            rows.erase(rows.begin());
        CHECK_THROWS_AS(
            metric_inputs_from_predictions(dataset, rows, opt.stream.window_size),
            std::invalid_argument);
    }
    SECTION("unknown trajectories are rejected") {
        rows.push_back({"ghost", 0, 9, Label::Normal, 0.1, false});
        CHECK_THROWS_AS(
            metric_inputs_from_predictions(dataset, rows, opt.stream.window_size),
            std::invalid_argument);
    }
}

TEST_CASE("per-scam-type breakdown emits one row per manifest type") {
    auto dataset = small_dataset();
    SkillLibrary lib = seed_library({"fake_online_investment_financial_scam"});
    RunOptions opt;
    auto result = run_dataset(dataset, lib, rule_fn(), opt);
    const std::string csv =
        per_scam_type_csv(dataset, result.predictions,
                          {"fake_online_investment_financial_scam", "loan_scam"},
                          opt.stream.window_size);
    std::size_t rows = 0;
    for (char c : csv)
        if (c == '\n') ++rows;
    CHECK(rows == 3);  // header + 2 types
    CHECK(csv.find("loan_scam,0,") != std::string::npos);
}

TEST_CASE("memory-scaling bins partition every prediction window") {
    auto dataset = small_dataset();
    SkillLibrary lib = seed_library({"fake_online_investment_financial_scam"});
    RunOptions opt;
    auto result = run_dataset(dataset, lib, rule_fn(), opt);
    auto bins = memory_scaling_bins(dataset, result.predictions);
    REQUIRE(bins.size() == 5);
    std::int64_t total = 0;
    for (const auto& b : bins) {
        total += b.windows;
        CHECK(b.correct <= b.windows);
    }
    CHECK(total == static_cast<std::int64_t>(result.predictions.size()));
    const std::string csv = memory_scaling_csv(bins);
    CHECK(csv.rfind("bin_lo,bin_hi,windows,accuracy\n", 0) == 0);
}
