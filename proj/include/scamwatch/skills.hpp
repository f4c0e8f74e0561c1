#pragma once
// Skill library: scam-pattern records (early indicators, typical app
// sequences, reflections, prompt enhancements) that drive memory
// retrieval ranking and evolve from assessor rationales.
//
// Evolution is rule-based term extraction: monotone (indicators and
// skills are never removed) and deterministic.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "scamwatch/core.hpp"
#include "scamwatch/io.hpp"
#include "scamwatch/memory.hpp"

namespace scamwatch {

struct Skill {
    std::string scam_type;
    std::string description;
    std::vector<std::string> early_indicators;      // lowercase phrases
    std::vector<AppCategory> typical_app_sequence;
    std::vector<std::string> example_reflections;
    std::string prompt_enhancement;
    bool evolved = false;  // provenance: seed or evolved
    std::int64_t update_count = 0;
};

struct RetrievalWeights {
    double keyword = 1.0;
    double sequence = 0.5;
    double recency = 0.5;
    double recency_horizon = 48.0;  // synthetic "48 hours" at 1 event per hour
};

// Count of distinct indicator phrases present in the summary
// (hit count, not density: repeating text does not change the score).
inline int indicator_hits(std::string_view summary,
                          const std::vector<std::string>& indicators) {
    const std::string lower = to_lower(summary);
    int hits = 0;
    for (const auto& ind : indicators)
        if (!ind.empty() && lower.find(ind) != std::string::npos) ++hits;
    return hits;
}

inline double recency_weight(std::int64_t delta_order, double horizon) {
    if (delta_order < 0) return 0.0;
    return std::max(0.0, 1.0 - static_cast<double>(delta_order) / horizon);
}

struct EvolveOutcome {
    bool frozen_noop = false;
    bool created_skill = false;
    std::string target_skill;
    std::vector<std::string> added_terms;
    bool added_bigram = false;
};

namespace detail {

inline const std::set<std::string>& stopwords() {
    static const std::set<std::string> words = {
        "a", "an", "and", "app", "are", "as", "at", "be", "been", "but", "by",
        "for", "from", "has", "have", "in", "into", "is", "it", "its", "label",
        "matched", "message", "of", "on", "or", "scam", "skill", "that", "the",
        "then", "this", "to", "was", "were", "window", "with", "user", "event",
        "events", "risky", "normal", "indicators", "sequence", "category",
        "retrieved", "history", "evidence", "probability", "score",
    };
    return words;
}

// Lowercase tokens of letters/digits, hyphens kept, length >= 3.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        while (!cur.empty() && cur.back() == '-') cur.pop_back();
        while (!cur.empty() && cur.front() == '-') cur.erase(cur.begin());
        if (cur.size() >= 3) out.push_back(cur);
        cur.clear();
    };
    for (char c : to_lower(text)) {
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-') cur += c;
        else flush();
    }
    flush();
    return out;
}

}  // namespace detail

class SkillLibrary {
public:
    SkillLibrary() = default;

    void add(Skill skill) {
        const std::string key = skill.scam_type;
        if (skills_.count(key)) throw std::invalid_argument("duplicate scam_type: " + key);
        skills_.emplace(key, std::move(skill));
    }

    const std::map<std::string, Skill>& skills() const { return skills_; }
    bool empty() const { return skills_.empty(); }
    const Skill* find(const std::string& scam_type) const {
        auto it = skills_.find(scam_type);
        return it == skills_.end() ? nullptr : &it->second;
    }

    bool frozen() const { return frozen_; }
    void set_frozen(bool frozen) { frozen_ = frozen; }

    // Retrieval score for a memory entry against the current window:
    // max over skills of keyword + sequence-affinity + recency terms.
    double score_candidate(const QueryHit& entry, const ObservationWindow& window,
                           std::int64_t now_order,
                           const RetrievalWeights& w = {}) const {
        double best = 0.0;  // max over an empty library is 0
        std::set<AppCategory> window_cats;
        for (const auto& ev : window.events) window_cats.insert(ev.app_category);
        const double rec = recency_weight(now_order - entry.order, w.recency_horizon);
        for (const auto& [key, skill] : skills_) {
            const double kw = static_cast<double>(
                indicator_hits(entry.summary, skill.early_indicators));
            double seq = 0.0;
            if (!skill.typical_app_sequence.empty()) {
                bool entry_in_seq = std::find(skill.typical_app_sequence.begin(),
                                              skill.typical_app_sequence.end(),
                                              entry.category) !=
                                    skill.typical_app_sequence.end();
                if (entry_in_seq) {
                    std::set<AppCategory> seq_cats(skill.typical_app_sequence.begin(),
                                                   skill.typical_app_sequence.end());
                    std::size_t overlap = 0;
                    for (auto c : seq_cats)
                        if (window_cats.count(c)) ++overlap;
                    seq = static_cast<double>(overlap) /
                          static_cast<double>(seq_cats.size());
                }
            }
            best = std::max(best, kw * w.keyword + seq * w.sequence + rec * w.recency);
        }
        return best;
    }

    // Top-K memory entries for the window's entities, scored by
    // score_candidate; ties broken by higher order then entity name;
    // output re-sorted chronologically.
    std::vector<QueryHit> rank(const MemoryStore& memory,
                               const std::vector<std::string>& entities,
                               const ObservationWindow& window, std::int64_t budget,
                               const RetrievalWeights& w = {}) const {
        if (budget < 0) throw std::invalid_argument("budget must be >= 0");
        auto candidates = memory.query(entities, window.start_index);
        if (budget == 0 || candidates.empty()) return {};

        struct Scored {
            double score;
            QueryHit hit;
        };
        std::vector<Scored> scored;
        scored.reserve(candidates.size());
        for (auto& c : candidates) {
            const double s = score_candidate(c, window, window.end_index, w);
            scored.push_back({s, std::move(c)});
        }
        std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
            if (a.score != b.score) return a.score > b.score;
            if (a.hit.order != b.hit.order) return a.hit.order > b.hit.order;
            return a.hit.entity < b.hit.entity;
        });
        if (static_cast<std::int64_t>(scored.size()) > budget)
            scored.resize(static_cast<std::size_t>(budget));
        std::sort(scored.begin(), scored.end(),
                  [](const Scored& a, const Scored& b) { return a.hit.order < b.hit.order; });
        std::vector<QueryHit> out;
        out.reserve(scored.size());
        for (auto& s : scored) out.push_back(std::move(s.hit));
        return out;
    }

    // Distill an assessor rationale into the library: append up to 3
    // novel salient terms to the best-matching skill's indicators and
    // the window's dominant category bigram to its typical sequence.
    EvolveOutcome evolve(const std::string& rationale, const ObservationWindow& window,
                         Label label) {
        if (label == Label::Normal)
            throw std::invalid_argument("evolve requires a Risky or Scam label");
        EvolveOutcome outcome;
        if (frozen_) {
            outcome.frozen_noop = true;
            return outcome;
        }

        // Idempotence: an identical (rationale, window) pair only bumps the
        // update counter of the skill it previously targeted.
        std::ostringstream fp_ss;
        fp_ss << rationale << '\x1f';
        for (const auto& ev : window.events) fp_ss << to_string(ev.app_category) << ',';
        const std::uint64_t fingerprint = fnv1a64(fp_ss.str());
        if (auto it = seen_.find(fingerprint); it != seen_.end()) {
            auto skill_it = skills_.find(it->second);
            if (skill_it != skills_.end()) {
                ++skill_it->second.update_count;
                outcome.target_skill = it->second;
            }
            return outcome;
        }

        // Target skill: most rationale indicator hits; new skill if none match.
        Skill* target = nullptr;
        int best_hits = 0;
        for (auto& [key, skill] : skills_) {
            const int hits = indicator_hits(rationale, skill.early_indicators);
            if (hits > best_hits) {
                best_hits = hits;
                target = &skill;
            }
        }
        if (target == nullptr) {
            Skill fresh;
            fresh.scam_type = "evolved_" + std::to_string(evolved_counter_++);
            fresh.description = "pattern distilled from assessor rationales";
            fresh.evolved = true;
            auto [it, ok] = skills_.emplace(fresh.scam_type, std::move(fresh));
            target = &it->second;
            outcome.created_skill = true;
        }
        outcome.target_skill = target->scam_type;

        // Salient terms: frequency desc, then length desc, then lexicographic.
        std::map<std::string, int> freq;
        std::vector<std::string> first_seen;
        for (const auto& tok : detail::tokenize(rationale)) {
            if (detail::stopwords().count(tok)) continue;
            if (++freq[tok] == 1) first_seen.push_back(tok);
        }
        std::sort(first_seen.begin(), first_seen.end(),
                  [&](const std::string& a, const std::string& b) {
                      if (freq[a] != freq[b]) return freq[a] > freq[b];
                      if (a.size() != b.size()) return a.size() > b.size();
                      return a < b;
                  });
        int added = 0;
        for (const auto& term : first_seen) {
            if (added == 3) break;
            bool known = false;
            for (const auto& ind : target->early_indicators)
                if (ind.find(term) != std::string::npos) { known = true; break; }
            if (known) continue;
            target->early_indicators.push_back(term);
            outcome.added_terms.push_back(term);
            ++added;
        }

        // Dominant category bigram of the window, appended if absent.
        if (window.events.size() >= 2) {
            std::map<std::pair<AppCategory, AppCategory>, int> bigrams;
            std::pair<AppCategory, AppCategory> best{};
            int best_count = 0;
            for (std::size_t i = 1; i < window.events.size(); ++i) {
                auto bg = std::make_pair(window.events[i - 1].app_category,
                                         window.events[i].app_category);
                const int c = ++bigrams[bg];
                if (c > best_count || (c == best_count && bg < best)) {
                    best_count = c;
                    best = bg;
                }
            }
            bool present = false;
            auto& seq = target->typical_app_sequence;
            for (std::size_t i = 0; i + 1 < seq.size(); ++i)
                if (seq[i] == best.first && seq[i + 1] == best.second) { present = true; break; }
            if (!present) {
                seq.push_back(best.first);
                seq.push_back(best.second);
                outcome.added_bigram = true;
            }
        }

        ++target->update_count;
        seen_.emplace(fingerprint, target->scam_type);
        return outcome;
    }

    json to_json() const {
        json skills = json::array();
        for (const auto& [key, s] : skills_) {
            json seq = json::array();
            for (auto c : s.typical_app_sequence) seq.push_back(std::string(to_string(c)));
            skills.push_back({{"scam_type", s.scam_type},
                              {"description", s.description},
                              {"early_indicators", s.early_indicators},
                              {"typical_app_sequence", std::move(seq)},
                              {"example_reflections", s.example_reflections},
                              {"prompt_enhancement", s.prompt_enhancement},
                              {"provenance", s.evolved ? "evolved" : "seed"},
                              {"update_count", s.update_count}});
        }
        json seen = json::array();
        for (const auto& [fp, target] : seen_)
            seen.push_back({{"fingerprint", hex64(fp)}, {"target", target}});
        return json{{"frozen", frozen_},
                    {"evolved_counter", evolved_counter_},
                    {"seen", std::move(seen)},
                    {"skills", std::move(skills)}};
    }

    static SkillLibrary from_json(const json& j) {
        SkillLibrary lib;
        lib.frozen_ = j.value("frozen", false);
        lib.evolved_counter_ = j.value("evolved_counter", std::int64_t{0});
        if (j.contains("seen")) {
            for (const auto& js : j.at("seen")) {
                const std::string hexfp = js.at("fingerprint").get<std::string>();
                lib.seen_.emplace(std::stoull(hexfp, nullptr, 16),
                                  js.at("target").get<std::string>());
            }
        }
        for (const auto& js : j.at("skills")) {
            Skill s;
            s.scam_type = js.at("scam_type").get<std::string>();
            s.description = js.value("description", std::string{});
            s.early_indicators = js.at("early_indicators").get<std::vector<std::string>>();
            for (const auto& cat : js.at("typical_app_sequence")) {
                auto c = category_from_string(cat.get<std::string>());
                if (!c) throw std::runtime_error("unknown category in skill sequence");
                s.typical_app_sequence.push_back(*c);
            }
            if (js.contains("example_reflections"))
                s.example_reflections = js.at("example_reflections").get<std::vector<std::string>>();
            s.prompt_enhancement = js.value("prompt_enhancement", std::string{});
            s.evolved = js.value("provenance", std::string("seed")) == "evolved";
            s.update_count = js.value("update_count", std::int64_t{0});
            lib.add(std::move(s));
        }
        return lib;
    }

private:
    std::map<std::string, Skill> skills_;
    bool frozen_ = false;
    std::int64_t evolved_counter_ = 0;
    std::map<std::uint64_t, std::string> seen_;  // evolve fingerprints -> target
};

// One seed skill per scam type present in the dataset manifest. The
// investment skill carries the full curated content; other types get a
// keyword-family template chosen by substring match on the type name.
inline Skill make_seed_skill(const std::string& scam_type) {
    Skill s;
    s.scam_type = scam_type;
    s.evolved = false;
    const std::string t = to_lower(scam_type);
    auto has = [&](std::string_view needle) { return t.find(needle) != std::string::npos; };

    if (has("investment") || has("financial")) {
        s.description =
            "Victims are lured into fraudulent investment schemes through social "
            "platforms, messaging groups, or malicious financial apps promising high "
            "returns.";
        s.early_indicators = {
            "investment", "high returns", "qr code", "private group",
            "exclusive investment advice", "test withdrawal", "unfamiliar investment",
            "customer service",
        };
        s.typical_app_sequence = {AppCategory::SocialMedia, AppCategory::InstantMessaging,
                                  AppCategory::Financial};
        s.example_reflections = {
            "The victim downloaded an unfamiliar investment application and initiated "
            "contact with a so-called customer service representative.",
            "The victim scanned a QR code from an unknown social media contact and "
            "joined a private group for investment advice.",
        };
        s.prompt_enhancement =
            "Focus on investment-related app installations, abnormal QR code scanning, "
            "and early interactions on social media or messaging platforms. Initial "
            "test transactions and group-joining activities are critical early signals.";
    } else if (has("job") || has("part-time") || has("part_time") || has("rebate") ||
               has("task")) {
        s.description =
            "Victims are recruited for fake part-time tasks promising commissions, "
            "then pressured to recharge increasing amounts.";
        s.early_indicators = {"part-time", "easy money", "commission", "task app",
                              "recharge", "rebate"};
        s.typical_app_sequence = {AppCategory::InstantMessaging, AppCategory::Tools,
                                  AppCategory::Financial};
        s.example_reflections = {
            "The victim received an unsolicited part-time job offer and installed a "
            "third-party task application.",
        };
        s.prompt_enhancement =
            "Watch for unsolicited job offers followed by installs of task or rebate "
            "apps and small trial payouts before larger recharges.";
    } else if (has("loan")) {
        s.description =
            "Fake loan services charge deposit or unfreezing fees before any loan is "
            "disbursed.";
        s.early_indicators = {"low interest", "loan approval", "deposit fee", "unfreeze",
                              "credit limit"};
        s.typical_app_sequence = {AppCategory::Communication, AppCategory::Tools,
                                  AppCategory::Financial};
        s.example_reflections = {
            "The victim was offered an instant loan and asked to pay a fee to unfreeze "
            "the funds.",
        };
        s.prompt_enhancement =
            "Prioritize loan-offer contacts followed by requests for upfront fees or "
            "identity verification payments.";
    } else if (has("impersonat") || has("police") || has("official") || has("authority")) {
        s.description =
            "Scammers impersonate officials or institutions and coerce transfers to a "
            "so-called safe account.";
        s.early_indicators = {"safe account", "arrest warrant", "case number",
                              "verification code", "money laundering"};
        s.typical_app_sequence = {AppCategory::Communication, AppCategory::InstantMessaging,
                                  AppCategory::Financial};
        s.example_reflections = {
            "The victim was contacted by a supposed official citing a case number and "
            "urged to transfer funds to a safe account.",
        };
        s.prompt_enhancement =
            "Watch for authority claims, case numbers, secrecy demands, and transfers "
            "to unfamiliar accounts shortly after a call.";
    } else if (has("shopping") || has("refund") || has("courier")) {
        s.description =
            "Fake refund or courier-compensation flows direct victims to phishing "
            "payment pages.";
        s.early_indicators = {"refund", "compensation", "courier", "claim", "order problem"};
        s.typical_app_sequence = {AppCategory::Shopping, AppCategory::InstantMessaging,
                                  AppCategory::Financial};
        s.example_reflections = {
            "The victim was told an order had a problem and followed a refund link "
            "outside the shopping platform.",
        };
        s.prompt_enhancement =
            "Prioritize refund or compensation claims that move off-platform toward "
            "payment or banking actions.";
    } else if (has("romance") || has("dating")) {
        s.description =
            "Long-grooming romance contacts eventually introduce urgent money needs or "
            "joint investments.";
        s.early_indicators = {"never met", "urgent money", "overseas", "lonely",
                              "joint investment"};
        s.typical_app_sequence = {AppCategory::SocialMedia, AppCategory::InstantMessaging,
                                  AppCategory::Financial};
        s.example_reflections = {
            "The victim developed an online-only relationship that escalated to "
            "requests for money transfers.",
        };
        s.prompt_enhancement =
            "Track long-running contacts that pivot from emotional topics to financial "
            "requests.";
    } else {
        s.description = "Generic cross-app scam pattern: unknown contact leading to "
                        "financial action.";
        s.early_indicators = {"unknown contact", "transfer", "verification code",
                              "remote control", "screen sharing"};
        s.typical_app_sequence = {AppCategory::InstantMessaging, AppCategory::Financial};
        s.example_reflections = {
            "An unknown contact steered the victim toward a financial transaction.",
        };
        s.prompt_enhancement =
            "Watch for unknown contacts whose conversations lead to payment, transfer, "
            "or credential actions.";
    }
    return s;
}

inline SkillLibrary seed_library(const std::vector<std::string>& scam_types) {
    SkillLibrary lib;
    for (const auto& t : scam_types)
        if (!lib.find(t)) lib.add(make_seed_skill(t));
    return lib;
}

}  // namespace scamwatch
