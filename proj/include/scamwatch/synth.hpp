#pragma once
// Long-horizon benchmark synthesizer: interleaves short scam traces
// into concatenated normal traces under a fixed seed, emits a manifest
// with per-split counts and a content hash, and validates the output
// with deterministic rules (entity leakage, segment integrity, category
// taxonomy, length bounds).

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "scamwatch/core.hpp"
#include "scamwatch/io.hpp"
#include "scamwatch/skills.hpp"

namespace scamwatch {

struct ShortTrace {
    std::string trace_id;
    bool is_scam = false;
    std::string scam_type;  // required when is_scam
    std::vector<AppEvent> events;  // local 0-based orders
    std::vector<std::int64_t> stage_boundaries;  // strictly increasing, interior
};

enum class InsertionMode : std::uint8_t { Contiguous, MultiSegment };

struct SynthConfig {
    std::int64_t target_length = 96;
    InsertionMode insertion_mode = InsertionMode::Contiguous;
    int max_segments = 3;
    std::uint64_t seed = 1;
    double train_ratio = 0.6;
    double validation_ratio = 0.2;
    double test_ratio = 0.2;
    std::int64_t n_trajectories = 50;
    double scam_ratio = 0.5;
    std::int64_t min_length = 48;
    std::int64_t max_length = 192;

    void validate() const {
        if (target_length < 2) throw std::invalid_argument("target_length too small");
        if (std::abs(train_ratio + validation_ratio + test_ratio - 1.0) > 1e-9)
            throw std::invalid_argument("split ratios must sum to 1");
        if (n_trajectories < 1) throw std::invalid_argument("n_trajectories must be >= 1");
        if (scam_ratio < 0.0 || scam_ratio > 1.0)
            throw std::invalid_argument("scam_ratio must be in [0,1]");
    }
};

namespace detail {

inline double u01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

inline std::size_t bounded(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

// Fingerprint of a contiguous event slice: category, app name, summary
// and entity list per event. Entity names enter after renaming, so the
// validator can recompute it from the emitted trajectory alone.
inline std::uint64_t slice_fingerprint(const std::vector<AppEvent>& events,
                                       std::size_t begin, std::size_t end_incl) {
    std::ostringstream ss;
    for (std::size_t i = begin; i <= end_incl; ++i) {
        const AppEvent& ev = events[i];
        ss << to_string(ev.app_category) << '|' << (ev.app_name ? *ev.app_name : "")
           << '|' << ev.content_summary << '|';
        for (const auto& e : ev.entities) ss << e << ',';
        ss << ';';
    }
    return fnv1a64(ss.str());
}

}  // namespace detail

// Split assignment is a pure function of (trajectory_id, seed, ratios).
inline SplitTag assign_split(const std::string& trajectory_id, std::uint64_t seed,
                             double train_ratio, double validation_ratio) {
    const std::uint64_t h = fnv1a64(trajectory_id + "#" + std::to_string(seed));
    const double u = static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
    if (u < train_ratio) return SplitTag::Train;
    if (u < train_ratio + validation_ratio) return SplitTag::Validation;
    return SplitTag::Test;
}

struct SynthOutput {
    std::vector<Trajectory> trajectories;
    json manifest;
};

inline SynthOutput synthesize(const std::vector<ShortTrace>& normal_pool,
                              const std::vector<ShortTrace>& scam_pool,
                              const SynthConfig& config) {
    config.validate();
    if (normal_pool.empty() || scam_pool.empty())
        throw std::invalid_argument("pools must be non-empty");
    for (const auto& t : scam_pool) {
        if (!t.is_scam || t.scam_type.empty())
            throw std::invalid_argument("scam pool trace without scam_type");
        if (static_cast<std::int64_t>(t.events.size()) >= config.target_length)
            throw std::invalid_argument("scam trace longer than target_length");
    }

    SynthOutput out;
    const std::int64_t n_scam = static_cast<std::int64_t>(
        std::llround(config.scam_ratio * static_cast<double>(config.n_trajectories)));
    std::set<std::string> scam_types_seen;
    json per_trajectory = json::array();
    std::map<std::string, std::int64_t> split_counts;

    for (std::int64_t idx = 0; idx < config.n_trajectories; ++idx) {
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "t%05lld", static_cast<long long>(idx));
        const std::string traj_id = idbuf;
        std::mt19937_64 rng(fnv1a64(traj_id, config.seed));  // per-trajectory stream

        const bool is_scam = idx < n_scam;
        const ShortTrace* scam = nullptr;
        std::int64_t scam_len = 0;
        if (is_scam) {
            scam = &scam_pool[detail::bounded(rng, scam_pool.size())];
            scam_len = static_cast<std::int64_t>(scam->events.size());
            scam_types_seen.insert(scam->scam_type);
        }

        // Concatenate normal traces (with replacement) until the base is
        // long enough; renamed entities prevent cross-trajectory collisions.
        const std::string suffix = "_" + traj_id;
        std::vector<AppEvent> base;
        const std::int64_t needed = config.target_length - scam_len;
        while (static_cast<std::int64_t>(base.size()) < needed) {
            const ShortTrace& src =
                normal_pool[detail::bounded(rng, normal_pool.size())];
            for (const auto& ev : src.events) {
                AppEvent copy = ev;
                for (auto& e : copy.entities) e += suffix;
                base.push_back(std::move(copy));
            }
        }

        Trajectory traj;
        traj.trajectory_id = traj_id;
        traj.split_tag = assign_split(traj_id, config.seed, config.train_ratio,
                                      config.validation_ratio);
        double contamination = 1.0;

        if (!is_scam) {
            traj.events = std::move(base);
        } else {
            std::vector<AppEvent> scam_events;
            scam_events.reserve(scam->events.size());
            for (const auto& ev : scam->events) {
                AppEvent copy = ev;
                for (auto& e : copy.entities) e += suffix;
                scam_events.push_back(std::move(copy));
            }
            const std::size_t base_len = base.size();

            if (config.insertion_mode == InsertionMode::Contiguous) {
                const std::size_t pos = detail::bounded(rng, base_len + 1);
                traj.events.assign(base.begin(), base.begin() + pos);
                traj.events.insert(traj.events.end(), scam_events.begin(),
                                   scam_events.end());
                traj.events.insert(traj.events.end(), base.begin() + pos, base.end());
                traj.scam_segment = ScamSegment{
                    static_cast<std::int64_t>(pos),
                    static_cast<std::int64_t>(pos + scam_events.size() - 1),
                    scam->scam_type};
            } else {
                // Split at stage boundaries (or uniformly) and insert the
                // segments in order with >= 1 normal event between them.
                std::vector<std::int64_t> cuts = scam->stage_boundaries;
                if (cuts.empty() && config.max_segments > 1) {
                    const std::int64_t k =
                        std::min<std::int64_t>(config.max_segments, scam_len);
                    for (std::int64_t j = 1; j < k; ++j)
                        cuts.push_back(j * scam_len / k);
                }
                std::vector<std::pair<std::size_t, std::size_t>> pieces;  // [lo, hi)
                std::size_t lo = 0;
                for (std::int64_t c : cuts) {
                    if (c <= 0 || c >= scam_len || static_cast<std::size_t>(c) <= lo)
                        throw std::invalid_argument("invalid stage boundaries");
                    pieces.emplace_back(lo, static_cast<std::size_t>(c));
                    lo = static_cast<std::size_t>(c);
                }
                pieces.emplace_back(lo, static_cast<std::size_t>(scam_len));

                // Distinct insertion points, sorted; >=1 base event between.
                const std::size_t k = pieces.size();
                std::set<std::size_t> points;
                while (points.size() < k && points.size() <= base_len)
                    points.insert(detail::bounded(rng, base_len + 1));
                std::vector<std::size_t> ins(points.begin(), points.end());
                while (ins.size() < k) ins.push_back(base_len);  // degenerate tiny base

                std::size_t base_cursor = 0;
                std::int64_t first = -1, last = -1, scam_count = 0;
                for (std::size_t p = 0; p < k; ++p) {
                    for (; base_cursor < ins[p] && base_cursor < base_len; ++base_cursor)
                        traj.events.push_back(base[base_cursor]);
                    if (first < 0) first = static_cast<std::int64_t>(traj.events.size());
                    for (std::size_t j = pieces[p].first; j < pieces[p].second; ++j) {
                        traj.events.push_back(scam_events[j]);
                        ++scam_count;
                    }
                    last = static_cast<std::int64_t>(traj.events.size()) - 1;
                }
                for (; base_cursor < base_len; ++base_cursor)
                    traj.events.push_back(base[base_cursor]);
                traj.scam_segment = ScamSegment{first, last, scam->scam_type};
                contamination = static_cast<double>(scam_count) /
                                static_cast<double>(last - first + 1);
            }
        }

        for (std::size_t i = 0; i < traj.events.size(); ++i)
            traj.events[i].order = static_cast<std::int64_t>(i);
        validate_trajectory(traj);
        ++split_counts[std::string(to_string(traj.split_tag))];

        json rec{{"trajectory_id", traj.trajectory_id},
                 {"split_tag", std::string(to_string(traj.split_tag))},
                 {"length", traj.length()}};
        if (traj.scam_segment) {
            rec["scam_type"] = traj.scam_segment->scam_type;
            rec["segment"] = {{"start", traj.scam_segment->start},
                              {"end", traj.scam_segment->end}};
            rec["contamination"] = contamination;
            rec["source_trace_id"] = scam->trace_id;
            rec["segment_fingerprint"] = hex64(detail::slice_fingerprint(
                traj.events, static_cast<std::size_t>(traj.scam_segment->start),
                static_cast<std::size_t>(traj.scam_segment->end)));
            rec["mode"] = config.insertion_mode == InsertionMode::Contiguous
                              ? "contiguous"
                              : "multi_segment";
        }
        per_trajectory.push_back(std::move(rec));
        out.trajectories.push_back(std::move(traj));
    }

    const std::string jsonl = trajectories_to_jsonl(out.trajectories);
    json counts;
    for (const char* name : {"train", "validation", "test"})
        counts[name] = split_counts.count(name) ? split_counts[name] : 0;
    out.manifest = json{
        {"n_trajectories", config.n_trajectories},
        {"n_scam", n_scam},
        {"split_counts", std::move(counts)},
        {"scam_types", std::vector<std::string>(scam_types_seen.begin(),
                                                scam_types_seen.end())},
        {"config",
         {{"target_length", config.target_length},
          {"insertion_mode",
           config.insertion_mode == InsertionMode::Contiguous ? "contiguous"
                                                              : "multi_segment"},
          {"max_segments", config.max_segments},
          {"seed", config.seed},
          {"split_ratios", {config.train_ratio, config.validation_ratio, config.test_ratio}},
          {"scam_ratio", config.scam_ratio},
          {"min_length", config.min_length},
          {"max_length", config.max_length}}},
        {"content_hash", hex64(fnv1a64(jsonl))},
        {"per_trajectory", std::move(per_trajectory)}};
    return out;
}

// ----- validation -----

struct Violation {
    std::string trajectory_id;
    std::string check;   // leakage | segment_integrity | category | length | structure
    std::string detail;
};

// Rule-based quality control over raw JSONL lines (so taxonomy and
// structural damage are detectable, not just post-parse values).
inline std::vector<Violation> validate_dataset(const std::vector<json>& lines,
                                               const json& manifest) {
    std::vector<Violation> violations;
    const json& cfg = manifest.at("config");
    const std::int64_t min_len = cfg.value("min_length", std::int64_t{0});
    const std::int64_t max_len = cfg.value("max_length",
                                           std::numeric_limits<std::int64_t>::max());

    std::map<std::string, json> manifest_by_id;
    for (const auto& rec : manifest.at("per_trajectory"))
        manifest_by_id[rec.at("trajectory_id").get<std::string>()] = rec;

    // Scam-related entities per split, for the leakage check.
    std::map<std::string, std::set<std::string>> scam_entities_by_split;

    for (const auto& j : lines) {
        const std::string id = j.value("trajectory_id", std::string("<missing-id>"));
        const std::string split = j.value("split_tag", std::string("train"));
        const auto& events = j.at("events");
        const std::int64_t len = static_cast<std::int64_t>(events.size());

        if (len < min_len || len > max_len)
            violations.push_back({id, "length",
                                  "length " + std::to_string(len) + " outside bounds"});

        bool categories_ok = true;
        for (std::size_t i = 0; i < events.size(); ++i) {
            const auto& ev = events[i];
            const std::string cat = ev.value("app_category", std::string{});
            if (!category_from_string(cat)) {
                violations.push_back({id, "category", "unknown category '" + cat +
                                                          "' at event " +
                                                          std::to_string(i)});
                categories_ok = false;
            }
            if (ev.value("order", std::int64_t{-1}) != static_cast<std::int64_t>(i))
                violations.push_back({id, "structure",
                                      "event order mismatch at index " +
                                          std::to_string(i)});
        }

        if (j.contains("scam_segment") && !j.at("scam_segment").is_null()) {
            const auto& seg = j.at("scam_segment");
            const std::int64_t s = seg.at("start").get<std::int64_t>();
            const std::int64_t e = seg.at("end").get<std::int64_t>();
            if (s < 0 || s > e || e >= len) {
                violations.push_back({id, "structure", "segment out of bounds"});
            } else {
                for (std::int64_t i = s; i <= e; ++i)
                    for (const auto& ent : events[static_cast<std::size_t>(i)]
                                               .value("entities", std::vector<std::string>{}))
                        scam_entities_by_split[split].insert(ent);

                // Segment integrity: fingerprint of the slice must match
                // the manifest record (contiguous mode only).
                auto it = manifest_by_id.find(id);
                if (categories_ok && it != manifest_by_id.end() &&
                    it->second.value("mode", std::string{}) == "contiguous" &&
                    it->second.contains("segment_fingerprint")) {
                    std::vector<AppEvent> parsed;
                    parsed.reserve(static_cast<std::size_t>(e - s + 1));
                    bool parse_ok = true;
                    for (std::int64_t i = s; i <= e; ++i) {
                        try {
                            parsed.push_back(
                                event_from_json(events[static_cast<std::size_t>(i)]));
                        } catch (const std::exception&) {
                            parse_ok = false;
                            break;
                        }
                    }
                    if (parse_ok) {
                        const std::string fp = hex64(detail::slice_fingerprint(
                            parsed, 0, parsed.size() - 1));
                        if (fp != it->second.at("segment_fingerprint").get<std::string>())
                            violations.push_back(
                                {id, "segment_integrity",
                                 "segment slice does not match the source scam trace"});
                    }
                }
            }
        }
    }

    // Leakage: scam-related entity sets must be disjoint across splits.
    const std::array<std::string, 3> splits = {"train", "validation", "test"};
    for (std::size_t a = 0; a < splits.size(); ++a) {
        for (std::size_t b = a + 1; b < splits.size(); ++b) {
            const auto& sa = scam_entities_by_split[splits[a]];
            const auto& sb = scam_entities_by_split[splits[b]];
            for (const auto& ent : sa) {
                if (sb.count(ent))
                    violations.push_back({"<corpus>", "leakage",
                                          "scam entity '" + ent + "' appears in both " +
                                              splits[a] + " and " + splits[b]});
            }
        }
    }
    return violations;
}

inline std::vector<json> parse_jsonl_lines(const std::string& content) {
    std::vector<json> lines;
    std::istringstream in(content);
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        lines.push_back(json::parse(line));
    }
    return lines;
}

// ----- synthetic short-trace pools (desk-scale stand-in for the
// licensed source corpora; also used by tests and the CLI demo) -----

inline std::vector<ShortTrace> generate_normal_pool(std::size_t count, std::uint64_t seed) {
    static const std::vector<std::pair<AppCategory, std::string>> benign = {
        {AppCategory::Multimedia, "watched a short cooking video"},
        {AppCategory::SocialMedia, "scrolled the feed and liked a photo"},
        {AppCategory::Tools, "checked the weather forecast for the week"},
        {AppCategory::Productivity, "updated the shared grocery list"},
        {AppCategory::Communication, "called mom about weekend plans"},
        {AppCategory::InstantMessaging, "chatted with a classmate about homework"},
        {AppCategory::TravelLocal, "looked up bus times to the library"},
        {AppCategory::Shopping, "browsed sneakers and saved one to wishlist"},
        {AppCategory::Entertainment, "played a puzzle level"},
        {AppCategory::HealthFitness, "logged a morning run"},
        {AppCategory::Financial, "checked the monthly budget summary"},
        {AppCategory::Others, "cleared notification backlog"},
    };
    static const std::vector<std::string> names = {
        "Avery", "Brook", "Casey", "Drew", "Ellis", "Frankie", "Gale", "Harper",
    };
    std::vector<ShortTrace> pool;
    std::mt19937_64 rng(fnv1a64("normal-pool", seed));
    for (std::size_t i = 0; i < count; ++i) {
        ShortTrace t;
        t.trace_id = "normal_" + std::to_string(i);
        const std::size_t len = 6 + detail::bounded(rng, 9);
        for (std::size_t k = 0; k < len; ++k) {
            const auto& [cat, summary] = benign[detail::bounded(rng, benign.size())];
            AppEvent ev;
            ev.order = static_cast<std::int64_t>(k);
            ev.app_category = cat;
            ev.content_summary = summary;
            if (detail::bounded(rng, 3) == 0)
                ev.entities.push_back(names[detail::bounded(rng, names.size())]);
            t.events.push_back(std::move(ev));
        }
        pool.push_back(std::move(t));
    }
    return pool;
}

// Scam traces follow the seed skill for their type: the typical app
// sequence interleaved with messaging filler, indicator phrases in the
// summaries, and one persistent scam contact entity.
inline std::vector<ShortTrace> generate_scam_pool(const std::vector<std::string>& scam_types,
                                                  std::size_t per_type, std::uint64_t seed) {
    std::vector<ShortTrace> pool;
    std::mt19937_64 rng(fnv1a64("scam-pool", seed));
    for (const auto& type : scam_types) {
        const Skill skill = make_seed_skill(type);
        for (std::size_t i = 0; i < per_type; ++i) {
            ShortTrace t;
            t.trace_id = "scam_" + type + "_" + std::to_string(i);
            t.is_scam = true;
            t.scam_type = type;
            const std::string contact = "Mx" + type.substr(0, 4) + std::to_string(i);
            const std::size_t len = 8 + detail::bounded(rng, 6);
            for (std::size_t k = 0; k < len; ++k) {
                AppEvent ev;
                ev.order = static_cast<std::int64_t>(k);
                const auto& seq = skill.typical_app_sequence;
                ev.app_category =
                    k < seq.size() ? seq[k] : (k % 2 == 0 ? AppCategory::InstantMessaging
                                                          : AppCategory::Financial);
                const std::string& ind =
                    skill.early_indicators[k % skill.early_indicators.size()];
                ev.content_summary = "message from " + contact + " about " + ind;
                ev.entities.push_back(contact);
                t.events.push_back(std::move(ev));
            }
            // Uniform thirds as victim-description stages.
            t.stage_boundaries = {static_cast<std::int64_t>(len / 3),
                                  static_cast<std::int64_t>(2 * len / 3)};
            pool.push_back(std::move(t));
        }
    }
    return pool;
}

inline json short_trace_to_json(const ShortTrace& t) {
    json j;
    j["trace_id"] = t.trace_id;
    j["kind"] = t.is_scam ? "scam" : "normal";
    if (t.is_scam) j["scam_type"] = t.scam_type;
    if (!t.stage_boundaries.empty()) j["stage_boundaries"] = t.stage_boundaries;
    json events = json::array();
    for (const auto& ev : t.events) events.push_back(event_to_json(ev));
    j["events"] = std::move(events);
    return j;
}

inline ShortTrace short_trace_from_json(const json& j) {
    ShortTrace t;
    t.trace_id = j.at("trace_id").get<std::string>();
    t.is_scam = j.at("kind").get<std::string>() == "scam";
    if (t.is_scam) t.scam_type = j.at("scam_type").get<std::string>();
    if (j.contains("stage_boundaries"))
        t.stage_boundaries = j.at("stage_boundaries").get<std::vector<std::int64_t>>();
    for (const auto& je : j.at("events")) t.events.push_back(event_from_json(je));
    return t;
}

}  // namespace scamwatch
