#pragma once
// Screen analyzer abstraction and augmented-window construction: raw
// events become (entities, summary) pairs, and each observation window
// is prefixed with skill-ranked historical memory entries.

#include <memory>
#include <optional>
#include <set>
#include <type_traits>
#include <sstream>
#include <string>
#include <vector>

#include "scamwatch/core.hpp"
#include "scamwatch/memory.hpp"
#include "scamwatch/skills.hpp"

namespace scamwatch {

struct ScreenParse {
    std::set<std::string> entities;
    std::string summary;
};

// Maps a raw event to extracted entities and a content summary.
class ScreenAnalyzer {
public:
    virtual ~ScreenAnalyzer() = default;
    virtual ScreenParse analyze(const AppEvent& event) = 0;
};

// Benchmark events are pre-parsed; the default analyzer passes the
// stored entities and summary through unchanged.
class PassThroughAnalyzer final : public ScreenAnalyzer {
public:
    ScreenParse analyze(const AppEvent& event) override {
        ScreenParse p;
        p.entities.insert(event.entities.begin(), event.entities.end());
        p.summary = event.content_summary;
        return p;
    }
};

struct AugmentedWindow {
    std::vector<QueryHit> retrieved;  // chronological, all orders < window.start
    ObservationWindow window;
};

// Entities of the window (union over per-event parses), then top-K
// memory retrieval ranked by the skill library. Retrieval sees only
// history strictly before the window start.
inline AugmentedWindow build_augmented_window(const ObservationWindow& window,
                                              const MemoryStore& memory,
                                              const SkillLibrary& library,
                                              std::int64_t budget,
                                              ScreenAnalyzer& analyzer,
                                              const RetrievalWeights& weights = {}) {
    std::set<std::string> entity_set;
    for (const auto& ev : window.events) {
        auto parse = analyzer.analyze(ev);
        entity_set.insert(parse.entities.begin(), parse.entities.end());
    }
    std::vector<std::string> entities(entity_set.begin(), entity_set.end());
    AugmentedWindow aug;
    aug.window = window;
    aug.retrieved = library.rank(memory, entities, window, budget, weights);
    return aug;
}

inline AugmentedWindow build_augmented_window(const ObservationWindow& window,
                                              const MemoryStore& memory,
                                              const SkillLibrary& library,
                                              std::int64_t budget,
                                              const RetrievalWeights& weights = {}) {
    PassThroughAnalyzer analyzer;
    return build_augmented_window(window, memory, library, budget, analyzer, weights);
}

// Deterministic textual rendering of the augmented window for
// assessors: history lines, window lines, then the prompt enhancements
// of every skill with at least one indicator hit in the rendered
// summaries. Byte-identical for identical inputs.
inline std::string render_context(const AugmentedWindow& aug, const SkillLibrary& library) {
    std::ostringstream out;
    for (const auto& hit : aug.retrieved) {
        out << "[HISTORY order=" << hit.order << " category=" << to_string(hit.category)
            << " entity=" << hit.entity << "] " << hit.summary << '\n';
    }
    for (const auto& ev : aug.window.events) {
        out << "[NOW order=" << ev.order << " category=" << to_string(ev.app_category)
            << "] " << ev.content_summary << '\n';
    }
    std::string all_text;
    for (const auto& hit : aug.retrieved) all_text += hit.summary + '\n';
    for (const auto& ev : aug.window.events) all_text += ev.content_summary + '\n';
    for (const auto& [key, skill] : library.skills()) {
        if (skill.prompt_enhancement.empty()) continue;
        if (indicator_hits(all_text, skill.early_indicators) > 0)
            out << "[SKILL " << key << "] " << skill.prompt_enhancement << '\n';
    }
    return out.str();
}

// Optional evolve request returned by a streaming callback.
struct EvolveRequest {
    std::string rationale;
    Label label = Label::Risky;
};

// Drives one trajectory through the streaming protocol: ingest the
// window's events into memory, build the augmented window (retrieval
// sees only orders before the window start), hand it to the callback,
// and apply any requested skill evolution. The callback may return an
// EvolveRequest (std::optional) or void.
template <typename Callback>
void stream_trajectory(const Trajectory& traj, const StreamConfig& config,
                       MemoryStore& memory, SkillLibrary& library, std::int64_t budget,
                       ScreenAnalyzer& analyzer, Callback&& callback,
                       const RetrievalWeights& weights = {}) {
    const auto spans = enumerate_windows(traj.length(), config);
    std::int64_t cursor = 0;
    for (const auto& span : spans) {
        for (; cursor <= span.end; ++cursor) memory.update(traj.events[cursor]);
        auto aug = build_augmented_window(make_window(traj, span), memory, library,
                                          budget, analyzer, weights);
        if constexpr (std::is_void_v<decltype(callback(aug))>) {
            callback(aug);
        } else {
            std::optional<EvolveRequest> req = callback(aug);
            if (req && !library.frozen())
                library.evolve(req->rationale, aug.window, req->label);
        }
    }
}

}  // namespace scamwatch
