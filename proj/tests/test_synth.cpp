#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "helpers.hpp"
#include "scamwatch/synth.hpp"

using namespace scamwatch;

namespace {

const std::vector<std::string> kTypes = {"fake_online_investment_financial_scam",
                                         "fake_part_time_job_scam"};

SynthOutput build(SynthConfig cfg) {
    auto normal = generate_normal_pool(12, 3);
    auto scam = generate_scam_pool(kTypes, 3, 3);
    return synthesize(normal, scam, cfg);
}

}  // namespace

TEST_CASE("synthesis is deterministic under a fixed seed") {
    SynthConfig cfg;
    cfg.n_trajectories = 20;
    cfg.seed = 11;
    auto a = build(cfg);
    auto b = build(cfg);
    CHECK(trajectories_to_jsonl(a.trajectories) == trajectories_to_jsonl(b.trajectories));
    CHECK(a.manifest.dump() == b.manifest.dump());

    cfg.seed = 12;
    auto c = build(cfg);
    CHECK(trajectories_to_jsonl(a.trajectories) != trajectories_to_jsonl(c.trajectories));
}

TEST_CASE("synthesized trajectories meet the structural contract") {
    SynthConfig cfg;
    cfg.n_trajectories = 30;
    cfg.seed = 5;
    auto out = build(cfg);
    REQUIRE(out.trajectories.size() == 30);

    std::int64_t scam_count = 0;
    for (const auto& traj : out.trajectories) {
        CHECK(traj.length() >= cfg.target_length);
        CHECK(traj.length() <= cfg.max_length);
        for (std::size_t i = 0; i < traj.events.size(); ++i) {
            CHECK(traj.events[i].order == static_cast<std::int64_t>(i));
            // Every entity is suffixed with the trajectory id: no leakage.
            for (const auto& e : traj.events[i].entities) {
                const std::string suffix = "_" + traj.trajectory_id;
                REQUIRE(e.size() > suffix.size());
                CHECK(e.compare(e.size() - suffix.size(), suffix.size(), suffix) == 0);
            }
        }
        if (traj.scam_segment) {
            ++scam_count;
            CHECK(traj.scam_segment->start >= 0);
            CHECK(traj.scam_segment->end < traj.length());
        }
    }
    CHECK(scam_count == 15);
    CHECK(out.manifest.at("n_scam") == 15);
    const auto& counts = out.manifest.at("split_counts");
    CHECK(counts.at("train").get<std::int64_t>() +
              counts.at("validation").get<std::int64_t>() +
              counts.at("test").get<std::int64_t>() ==
          30);
    CHECK(out.manifest.at("content_hash") ==
          hex64(fnv1a64(trajectories_to_jsonl(out.trajectories))));
}

TEST_CASE("multi-segment insertion tracks the hull and contamination") {
    SynthConfig cfg;
    cfg.n_trajectories = 16;
    cfg.insertion_mode = InsertionMode::MultiSegment;
    cfg.seed = 9;
    auto out = build(cfg);
    for (const auto& rec : out.manifest.at("per_trajectory")) {
        if (!rec.contains("contamination")) continue;
        CHECK(rec.at("mode") == "multi_segment");
        const double c = rec.at("contamination").get<double>();
        CHECK(c > 0.0);
        CHECK(c <= 1.0);
    }
}

TEST_CASE("split assignment is a pure function of id and seed") {
    CHECK(assign_split("t00001", 4, 0.6, 0.2) == assign_split("t00001", 4, 0.6, 0.2));
    std::map<SplitTag, int> hist;
    for (int i = 0; i < 2000; ++i)
        ++hist[assign_split("traj" + std::to_string(i), 7, 0.6, 0.2)];
    CHECK(hist[SplitTag::Train] > 1000);
    CHECK(hist[SplitTag::Validation] > 250);
    CHECK(hist[SplitTag::Test] > 250);
}

TEST_CASE("validator accepts clean output and flags planted corruption") {
    SynthConfig cfg;
    cfg.n_trajectories = 24;
    cfg.seed = 21;
    auto out = build(cfg);
    const std::string jsonl = trajectories_to_jsonl(out.trajectories);
    auto lines = parse_jsonl_lines(jsonl);

    SECTION("clean dataset has zero violations") {
        CHECK(validate_dataset(lines, out.manifest).empty());
    }

    // Pick two scam lines on different splits for the corruptions.
    auto scam_line = [&](const std::string& split,
                         const std::string& avoid = "") -> json* {
        for (auto& j : lines)
            if (!j.at("scam_segment").is_null() && j.at("split_tag") == split &&
                j.at("trajectory_id") != avoid)
                return &j;
        return nullptr;
    };

    SECTION("an off-taxonomy category is reported") {
        lines[0].at("events")[0]["app_category"] = "Gaming";
        auto v = validate_dataset(lines, out.manifest);
        REQUIRE_FALSE(v.empty());
        CHECK(std::any_of(v.begin(), v.end(),
                          [](const Violation& x) { return x.check == "category"; }));
    }
    SECTION("a corrupted in-segment summary breaks segment integrity") {
        json* line = scam_line("train");
        if (!line) line = scam_line("test");
        REQUIRE(line != nullptr);
        const auto s = line->at("scam_segment").at("start").get<std::int64_t>();
        line->at("events")[static_cast<std::size_t>(s)]["content_summary"] = "tampered";
        auto v = validate_dataset(lines, out.manifest);
        CHECK(std::any_of(v.begin(), v.end(), [](const Violation& x) {
            return x.check == "segment_integrity";
        }));
    }
    SECTION("a scam entity shared across splits is leakage") {
        json* a = scam_line("train");
        json* b = scam_line("test");
        if (!b) b = scam_line("validation");
        REQUIRE(a != nullptr);
        REQUIRE(b != nullptr);
        const auto sa = a->at("scam_segment").at("start").get<std::int64_t>();
        const auto sb = b->at("scam_segment").at("start").get<std::int64_t>();
        auto& ents_a = a->at("events")[static_cast<std::size_t>(sa)].at("entities");
        REQUIRE_FALSE(ents_a.empty());
        b->at("events")[static_cast<std::size_t>(sb)]["entities"].push_back(ents_a[0]);
        auto v = validate_dataset(lines, out.manifest);
        CHECK(std::any_of(v.begin(), v.end(),
                          [](const Violation& x) { return x.check == "leakage"; }));
    }
    SECTION("length bounds from the manifest are enforced") {
        json tight = out.manifest;
        tight["config"]["min_length"] = 10000;
        auto v = validate_dataset(lines, tight);
        CHECK(v.size() == lines.size());
        for (const auto& x : v) CHECK(x.check == "length");
    }
}

TEST_CASE("short traces round-trip through JSON") {
    auto pool = generate_scam_pool({"loan_scam"}, 2, 8);
    REQUIRE_FALSE(pool.empty());
    for (const auto& t : pool) {
        auto back = short_trace_from_json(short_trace_to_json(t));
        CHECK(back.trace_id == t.trace_id);
        CHECK(back.is_scam == t.is_scam);
        CHECK(back.scam_type == t.scam_type);
        CHECK(back.stage_boundaries == t.stage_boundaries);
        REQUIRE(back.events.size() == t.events.size());
        for (std::size_t i = 0; i < t.events.size(); ++i) {
            CHECK(back.events[i].content_summary == t.events[i].content_summary);
            CHECK(back.events[i].app_category == t.events[i].app_category);
        }
    }
}

TEST_CASE("synthesis rejects bad inputs") {
    auto normal = generate_normal_pool(4, 1);
    auto scam = generate_scam_pool({"loan_scam"}, 1, 1);
    SynthConfig cfg;
    SECTION("empty pools") {
        CHECK_THROWS_AS(synthesize({}, scam, cfg), std::invalid_argument);
        CHECK_THROWS_AS(synthesize(normal, {}, cfg), std::invalid_argument);
    }
    SECTION("split ratios must sum to 1") {
        cfg.train_ratio = 0.9;
        CHECK_THROWS_AS(synthesize(normal, scam, cfg), std::invalid_argument);
    }
    SECTION("scam trace longer than the target") {
        cfg.target_length = 4;
        CHECK_THROWS_AS(synthesize(normal, scam, cfg), std::invalid_argument);
    }
}
