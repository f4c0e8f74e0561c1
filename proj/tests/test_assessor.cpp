#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "scamwatch/assessor.hpp"

using namespace scamwatch;
using testutil::make_event;

namespace {

AugmentedWindow plain_window(std::int64_t start,
                             std::vector<std::pair<AppCategory, std::string>> evs) {
    AugmentedWindow aug;
    aug.window.start_index = start;
    aug.window.end_index = start + static_cast<std::int64_t>(evs.size()) - 1;
    for (std::size_t i = 0; i < evs.size(); ++i)
        aug.window.events.push_back(make_event(start + static_cast<std::int64_t>(i),
                                               evs[i].first, evs[i].second));
    return aug;
}

}  // namespace

TEST_CASE("probability bands map to the three labels") {
    CHECK(label_from_probability(0.9) == Label::Scam);
    CHECK(label_from_probability(0.67) == Label::Scam);
    CHECK(label_from_probability(0.66) == Label::Risky);
    CHECK(label_from_probability(0.34) == Label::Risky);
    CHECK(label_from_probability(0.33) == Label::Normal);
    CHECK(label_from_probability(0.0) == Label::Normal);
}

TEST_CASE("rule assessor matches the closed-form sigmoid") {
    SkillLibrary lib = seed_library({"fake_online_investment_financial_scam"});

    SECTION("no evidence lands near zero") {
        auto aug = plain_window(0, {{AppCategory::Tools, "weather"},
                                    {AppCategory::Tools, "alarm"}});
        auto a = assess_rule(aug, lib);
        CHECK(a.probability == Catch::Approx(sigmoid((0.0 - 2.0) / 0.5)).margin(1e-12));
        CHECK(a.label == Label::Normal);
        CHECK(a.window_end == 1);
    }
    SECTION("hits and retrieved evidence raise the raw score") {
        // 2 window indicator hits + 1 retrieved hit + one retrieved entity.
        auto aug = plain_window(
            20, {{AppCategory::InstantMessaging,
                  "invited to a private group promising high returns"},
                 {AppCategory::Financial, "opened the dashboard"}});
        aug.retrieved.push_back(
            {2, AppCategory::InstantMessaging, "asked me about an investment plan", "ana"});
        auto a = assess_rule(aug, lib);
        const double affinity =
            detail::best_sequence_affinity({AppCategory::InstantMessaging,
                                            AppCategory::Financial},
                                           lib);
        const double raw = 2.0 + affinity + 1.0 + 0.5;
        CHECK(a.probability == Catch::Approx(sigmoid((raw - 2.0) / 0.5)).margin(1e-12));
        CHECK(a.probability > 0.5);
    }
    SECTION("identical inputs give identical assessments") {
        auto aug = plain_window(0, {{AppCategory::Financial, "high returns promised"},
                                    {AppCategory::Tools, "alarm"}});
        auto a = assess_rule(aug, lib);
        auto b = assess_rule(aug, lib);
        CHECK(a.probability == b.probability);
        CHECK(a.rationale == b.rationale);
    }
}

TEST_CASE("logistic assessor with zero weights gives p = 0.5") {
    SkillLibrary lib;
    LogisticParams p;
    p.theta_shared.assign(kFeatureDim, 0.0);
    auto aug = plain_window(0, {{AppCategory::Tools, "x"}, {AppCategory::Tools, "y"}});
    auto a = assess_logistic(aug, p, lib);
    CHECK(a.probability == 0.5);
    CHECK(a.label == Label::Risky);
    CHECK_THROWS_AS(assess_logistic(aug, LogisticParams{{1.0}, {}}, lib),
                    std::invalid_argument);
}

TEST_CASE("feature map invariants") {
    SkillLibrary lib = seed_library({"fake_online_investment_financial_scam"});
    auto aug = plain_window(10, {{AppCategory::Financial, "investment tips"},
                                 {AppCategory::Tools, "weather"},
                                 {AppCategory::Financial, "checked balance"},
                                 {AppCategory::InstantMessaging, "chat"}});
    const auto f = features(aug, lib, 5);

    SECTION("category fractions sum to 1 and bias is constant") {
        double sum = 0.0;
        for (std::size_t i = 0; i < kNumCategories; ++i) sum += f[i];
        CHECK(sum == Catch::Approx(1.0).margin(1e-12));
        CHECK(f[kFeatureDim - 1] == 1.0);
        CHECK(f[static_cast<std::size_t>(AppCategory::Financial)] ==
              Catch::Approx(0.5).margin(1e-12));
    }
    SECTION("only sequence affinity depends on event order") {
        auto shuffled = aug;
        std::reverse(shuffled.window.events.begin(), shuffled.window.events.end());
        const auto g = features(shuffled, lib, 5);
        for (std::size_t i = 0; i < kFeatureDim; ++i)
            if (i != 15) CHECK(f[i] == Catch::Approx(g[i]).margin(1e-12));
    }
    SECTION("retrieved fill is budget-relative") {
        auto with = aug;
        with.retrieved.push_back({1, AppCategory::Tools, "note", "ana"});
        CHECK(features(with, lib, 5)[16] == Catch::Approx(0.2).margin(1e-12));
        CHECK(features(with, lib, 0)[16] == 0.0);
    }
}

TEST_CASE("logistic probability is monotone in a positively weighted feature") {
    SkillLibrary lib = seed_library({"fake_online_investment_financial_scam"});
    LogisticParams p;
    p.theta_shared.assign(kFeatureDim, 0.0);
    p.theta_shared[13] = 1.0;  // window indicator hits
    auto none = plain_window(0, {{AppCategory::Tools, "alarm"}, {AppCategory::Tools, "x"}});
    auto one = plain_window(0, {{AppCategory::Tools, "investment pitch"},
                                {AppCategory::Tools, "x"}});
    auto two = plain_window(0, {{AppCategory::Tools, "investment pitch"},
                                {AppCategory::Tools, "promises high returns"}});
    const double p0 = assess_logistic(none, p, lib).probability;
    const double p1 = assess_logistic(one, p, lib).probability;
    const double p2 = assess_logistic(two, p, lib).probability;
    CHECK(p0 < p1);
    CHECK(p1 < p2);
}

TEST_CASE("parameter JSON round-trip") {
    LogisticParams p;
    std::mt19937_64 rng(3);
    for (std::size_t i = 0; i < kFeatureDim; ++i)
        p.theta_shared.push_back(static_cast<double>(rng() % 1000) / 500.0 - 1.0);
    p.theta_priv = {0.25, -0.5, 1.5};
    auto back = params_from_json(params_to_json(p, {"a", "b", "c"}));
    CHECK(back.theta_shared == p.theta_shared);
    CHECK(back.theta_priv == p.theta_priv);
}

namespace {

TrajectoryAssessments flat_assessments(std::string id, std::int64_t length,
                                       std::optional<ScamSegment> seg,
                                       std::vector<std::pair<std::int64_t, double>> probs,
                                       std::int64_t w = 10) {
    TrajectoryAssessments t;
    t.trajectory_id = std::move(id);
    t.length = length;
    t.segment = seg;
    t.window_size = w;
    for (auto [end, p] : probs) t.probabilities.push_back({{end - w + 1, end}, p});
    return t;
}

}  // namespace

TEST_CASE("calibration sweep covers the whole grid") {
    auto val = flat_assessments("v", 30, ScamSegment{10, 19, "t"},
                                {{9, 0.1}, {14, 0.8}, {19, 0.9}, {24, 0.2}, {29, 0.1}});
    auto result = calibrate_tau({val}, 0.05);
    REQUIRE(result.sweep.size() == 101);
    CHECK(result.sweep.front().tau == 0.0);
    CHECK(result.sweep.back().tau == 1.0);
    for (std::size_t i = 1; i < result.sweep.size(); ++i) {
        CHECK(result.sweep[i].tau > result.sweep[i - 1].tau);
        // flagged sets shrink as tau rises, so FAR is non-increasing.
        CHECK(result.sweep[i].far <= result.sweep[i - 1].far + 1e-12);
    }
    const auto roundtrip = calibration_from_json(calibration_to_json(result));
    CHECK(roundtrip.tau == result.tau);
    CHECK(roundtrip.sweep.size() == result.sweep.size());
}

TEST_CASE("degenerate all-zero probabilities calibrate to tau 1.00") {
    auto scam = flat_assessments("s", 30, ScamSegment{10, 19, "t"},
                                 {{9, 0.0}, {14, 0.0}, {19, 0.0}, {24, 0.0}});
    auto norm = flat_assessments("n", 30, std::nullopt,
                                 {{9, 0.0}, {14, 0.0}, {19, 0.0}, {24, 0.0}, {29, 0.0}});
    auto result = calibrate_tau({scam, norm}, 0.05);
    CHECK(result.tau == 1.0);
}

TEST_CASE("separable probabilities calibrate to the largest feasible tau") {
    // Candidates at 0.9, every zero-overlap window at 0.1: all taus in
    // [0.10, 0.89] are optimal; ties resolve upward.
    std::vector<TrajectoryAssessments> val;
    val.push_back(flat_assessments("s", 30, ScamSegment{10, 19, "t"},
                                   {{9, 0.1}, {14, 0.9}, {19, 0.9}, {24, 0.1}, {29, 0.1}}));
    val.push_back(flat_assessments(
        "n", 30, std::nullopt, {{9, 0.1}, {14, 0.1}, {19, 0.1}, {24, 0.1}, {29, 0.1}}));
    auto result = calibrate_tau(val, 0.05);
    CHECK(result.tau == Catch::Approx(0.89).margin(1e-12));
    CHECK(result.objective_value == 1.0);
    CHECK_THROWS_AS(calibrate_tau({}, 0.05), std::invalid_argument);
}
