#pragma once
// Shared test fixtures: event/trajectory builders, a brute-force
// metrics oracle (independent re-implementation of the set definitions
// by literal enumeration), random metric-input generators, and the
// constructed benchmarks used by the directional criteria.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "scamwatch/core.hpp"
#include "scamwatch/metrics.hpp"
#include "scamwatch/synth.hpp"

namespace testutil {

using namespace scamwatch;

inline AppEvent make_event(std::int64_t order, AppCategory cat, std::string summary = "",
                           std::vector<std::string> entities = {}) {
    AppEvent ev;
    ev.order = order;
    ev.app_category = cat;
    ev.content_summary = std::move(summary);
    ev.entities = std::move(entities);
    return ev;
}

inline Trajectory make_trajectory(std::string id, std::vector<AppEvent> events,
                                  std::optional<ScamSegment> seg = std::nullopt,
                                  SplitTag split = SplitTag::Test) {
    Trajectory t;
    t.trajectory_id = std::move(id);
    for (std::size_t i = 0; i < events.size(); ++i)
        events[i].order = static_cast<std::int64_t>(i);
    t.events = std::move(events);
    t.scam_segment = seg;
    t.split_tag = split;
    return t;
}

// ----- brute-force oracle -----
// Applies the metric set definitions by exhaustive enumeration, with
// its own overlap arithmetic (index loops, no shared helpers).

struct OracleResult {
    double hr = 0.0;
    double edp_mean = 1.0;
    double far = 0.0;
    double par = 0.0;
    double consistency = 1.0;
    double inconsistency_rate = 0.0;
    double flip_count_mean = 0.0;
};

inline std::int64_t oracle_overlap(std::int64_t ws, std::int64_t we, std::int64_t s,
                                   std::int64_t e) {
    std::int64_t count = 0;
    for (std::int64_t i = ws; i <= we; ++i)
        if (i >= s && i <= e) ++count;
    return count;
}

inline OracleResult oracle_metrics(const std::vector<TrajectoryMetricInput>& inputs) {
    OracleResult out;
    std::int64_t scam_trajs = 0, hits = 0;
    double edp_sum = 0.0;
    std::int64_t cand = 0, cand_flagged = 0, outside = 0, outside_flagged = 0;
    std::int64_t flips = 0, pairs = 0, traj_with_pairs = 0, total_flips = 0;

    for (const auto& in : inputs) {
        if (in.segment) {
            ++scam_trajs;
            const std::int64_t s = in.segment->start, e = in.segment->end;
            const double seg_len = static_cast<double>(e - s + 1);
            // EDP / HR: min normalized position over flagged windows ending in [s,e].
            double best = 2.0;
            for (const auto& p : in.predictions) {
                if (!p.scam_flag) continue;
                if (p.window.end < s || p.window.end > e) continue;
                const double pos = static_cast<double>(p.window.end - s) / seg_len;
                if (pos < best) best = pos;
            }
            const double traj_edp = best <= 1.0 ? best : 1.0;
            if (best <= 1.0) ++hits;
            edp_sum += traj_edp;
            // PAR candidates and FAR zero-overlap windows.
            for (const auto& p : in.predictions) {
                const std::int64_t ov =
                    oracle_overlap(p.window.start, p.window.end, s, e);
                const double cov = static_cast<double>(ov) / seg_len;
                if (p.window.end >= s && p.window.end <= e && cov >= 0.5) {
                    ++cand;
                    if (p.scam_flag) ++cand_flagged;
                }
                if (ov == 0) {
                    ++outside;
                    if (p.scam_flag) ++outside_flagged;
                }
            }
        } else {
            for (const auto& p : in.predictions) {
                ++outside;
                if (p.scam_flag) ++outside_flagged;
            }
        }
        if (in.predictions.size() >= 2) {
            std::int64_t f = 0;
            for (std::size_t i = 1; i < in.predictions.size(); ++i)
                if (in.predictions[i].scam_flag != in.predictions[i - 1].scam_flag) ++f;
            flips += f;
            total_flips += f;
            pairs += static_cast<std::int64_t>(in.predictions.size()) - 1;
            ++traj_with_pairs;
        }
    }

    if (scam_trajs > 0) {
        out.hr = static_cast<double>(hits) / static_cast<double>(scam_trajs);
        out.edp_mean = edp_sum / static_cast<double>(scam_trajs);
    }
    if (outside > 0)
        out.far = static_cast<double>(outside_flagged) / static_cast<double>(outside);
    if (cand > 0) out.par = static_cast<double>(cand_flagged) / static_cast<double>(cand);
    if (pairs > 0) {
        out.inconsistency_rate = static_cast<double>(flips) / static_cast<double>(pairs);
        out.consistency = 1.0 - out.inconsistency_rate;
    }
    if (traj_with_pairs > 0)
        out.flip_count_mean =
            static_cast<double>(total_flips) / static_cast<double>(traj_with_pairs);
    return out;
}

// Random metric inputs: random window width, stride, segment, flags.
inline std::vector<TrajectoryMetricInput> random_metric_inputs(std::size_t n,
                                                               std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto draw = [&](std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
    };
    std::vector<TrajectoryMetricInput> inputs;
    for (std::size_t i = 0; i < n; ++i) {
        TrajectoryMetricInput in;
        in.trajectory_id = "r" + std::to_string(i);
        const std::int64_t w = draw(2, 10);
        in.window_size = w;
        in.length = draw(w, 40);
        const std::int64_t stride = draw(1, w);
        if (rng() % 2 == 0) {
            const std::int64_t s = draw(0, in.length - 1);
            in.segment = ScamSegment{s, draw(s, in.length - 1), "type_a"};
        }
        for (std::int64_t end = w - 1; end <= in.length - 1; end += stride)
            in.predictions.push_back({{end - w + 1, end}, (rng() % 3) == 0});
        if (!in.predictions.empty() && in.predictions.back().window.end != in.length - 1)
            in.predictions.push_back(
                {{in.length - w, in.length - 1}, (rng() % 3) == 0});
        inputs.push_back(std::move(in));
    }
    return inputs;
}

// ----- constructed benchmark: scam detectable only by linking an
// entity's early contact to a later financial action >= W apart -----
//
// Each trajectory: a grooming contact at order 2 (one indicator in the
// summary), indicator-free filler, then a scam segment [28,35] of
// financial events mentioning the same entity, with a single weak
// indicator at order 30. Without retrieval no window crosses tau=0.5;
// with retrieval the early evidence plus entity recurrence does.
inline std::vector<Trajectory> make_linking_benchmark(std::size_t n) {
    std::vector<Trajectory> out;
    for (std::size_t i = 0; i < n; ++i) {
        const std::string contact = "Groomer" + std::to_string(i);
        std::vector<AppEvent> events;
        const std::vector<std::pair<AppCategory, std::string>> filler = {
            {AppCategory::Multimedia, "watched a short cooking video"},
            {AppCategory::Entertainment, "played a puzzle level"},
            {AppCategory::HealthFitness, "logged a morning run"},
            {AppCategory::Tools, "checked the weather forecast"},
            {AppCategory::Productivity, "updated the grocery list"},
        };
        for (std::int64_t k = 0; k < 40; ++k) {
            if (k == 2) {
                events.push_back(make_event(
                    k, AppCategory::InstantMessaging,
                    "new contact invited me to a private group for advice", {contact}));
            } else if (k >= 28 && k <= 35) {
                if (k == 30) {
                    events.push_back(make_event(
                        k, AppCategory::Financial,
                        "made a test withdrawal on the new app with " + contact,
                        {contact}));
                } else {
                    events.push_back(make_event(k, AppCategory::Financial,
                                                "opened the account dashboard",
                                                {contact}));
                }
            } else {
                const auto& [cat, text] = filler[static_cast<std::size_t>(k) % filler.size()];
                events.push_back(make_event(k, cat, text));
            }
        }
        out.push_back(make_trajectory(
            "link" + std::to_string(i), std::move(events),
            ScamSegment{28, 35, "fake_online_investment_financial_scam"}));
    }
    return out;
}

// ----- constructed-separability dataset for the distillation
// direction check: the only base-feature signal in scam windows is an
// elevated financial-category fraction, which correlates with the
// privileged scam-type indicator the teacher sees -----
inline std::vector<Trajectory> make_separability_dataset(std::size_t n_scam,
                                                         std::size_t n_normal,
                                                         std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
    const std::vector<AppCategory> benign_cats = {
        AppCategory::Multimedia, AppCategory::SocialMedia, AppCategory::Tools,
        AppCategory::Entertainment, AppCategory::Productivity,
    };
    std::vector<Trajectory> out;
    auto make = [&](std::size_t idx, bool scam, SplitTag split) {
        std::vector<AppEvent> events;
        const std::int64_t len = 40;
        const std::int64_t s = 20, e = 31;
        for (std::int64_t k = 0; k < len; ++k) {
            AppCategory cat;
            if (scam && k >= s && k <= e) {
                // High financial fraction with a little noise.
                cat = pick(10) < 8 ? AppCategory::Financial
                                   : benign_cats[pick(benign_cats.size())];
            } else {
                // Benign background with occasional financial events.
                cat = pick(10) < 2 ? AppCategory::Financial
                                   : benign_cats[pick(benign_cats.size())];
            }
            events.push_back(make_event(k, cat, "routine activity"));
        }
        std::optional<ScamSegment> seg;
        if (scam) seg = ScamSegment{s, e, "fake_online_investment_financial_scam"};
        out.push_back(make_trajectory(
            (scam ? "sep_scam" : "sep_norm") + std::to_string(idx), std::move(events),
            seg, split));
    };
    for (std::size_t i = 0; i < n_scam; ++i)
        make(i, true, i % 4 == 3 ? SplitTag::Validation : SplitTag::Train);
    for (std::size_t i = 0; i < n_normal; ++i)
        make(i, false, i % 4 == 3 ? SplitTag::Validation : SplitTag::Train);
    return out;
}

}  // namespace testutil
