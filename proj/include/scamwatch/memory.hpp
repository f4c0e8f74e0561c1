#pragma once
// Person-centric memory store: an entity-keyed chronological archive of
// past interactions, updated strictly per event. One store per
// simulated user (trajectory); stores are never shared across users.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "scamwatch/core.hpp"
#include "scamwatch/io.hpp"

namespace scamwatch {

struct MemoryEntry {
    std::int64_t order = 0;
    AppCategory category = AppCategory::Others;
    std::string summary;
};

struct PersonRecord {
    std::string person_id;  // hex digest of the canonical entity name
    std::vector<std::string> entity_names;
    std::int64_t first_seen_order = 0;
    std::int64_t last_seen_order = 0;
    std::vector<MemoryEntry> history;  // strictly increasing order
};

// Case-folded, whitespace-trimmed exact match; fuzzy resolution is out
// of scope.
inline std::string canonical_entity(std::string_view name) {
    return to_lower(trim(name));
}

struct QueryHit {
    std::int64_t order = 0;
    AppCategory category = AppCategory::Others;
    std::string summary;
    std::string entity;  // canonical owner
};

class MemoryStore {
public:
    // Ingest one event; every mentioned entity gains a history entry.
    // Events must arrive strictly sequentially.
    void update(const AppEvent& event) {
        if (event.order != event_count_)
            throw std::invalid_argument("non-sequential-event");
        for (const auto& name : event.entities) {
            const std::string key = canonical_entity(name);
            if (key.empty()) continue;
            auto [it, inserted] = records_.try_emplace(key);
            PersonRecord& rec = it->second;
            if (inserted) {
                rec.person_id = hex64(fnv1a64(key));
                rec.first_seen_order = event.order;
            }
            bool known_alias = false;
            for (const auto& alias : rec.entity_names)
                if (alias == name) { known_alias = true; break; }
            if (!known_alias) rec.entity_names.push_back(name);
            rec.last_seen_order = event.order;
            rec.history.push_back({event.order, event.app_category, event.content_summary});
        }
        ++event_count_;
    }

    // Union of the queried entities' histories strictly before
    // `before_order`, deduplicated by source event, sorted by order.
    std::vector<QueryHit> query(const std::vector<std::string>& entities,
                                std::int64_t before_order) const {
        std::map<std::int64_t, QueryHit> by_order;  // dedup: one hit per source event
        for (const auto& name : entities) {
            const std::string key = canonical_entity(name);
            auto it = records_.find(key);
            if (it == records_.end()) continue;
            for (const auto& entry : it->second.history) {
                if (entry.order >= before_order) break;
                auto [hit_it, inserted] =
                    by_order.try_emplace(entry.order, QueryHit{entry.order, entry.category,
                                                               entry.summary, key});
                if (!inserted && key < hit_it->second.entity) hit_it->second.entity = key;
            }
        }
        std::vector<QueryHit> out;
        out.reserve(by_order.size());
        for (auto& [order, hit] : by_order) out.push_back(std::move(hit));
        return out;
    }

    std::int64_t event_count() const { return event_count_; }

    const std::map<std::string, PersonRecord>& records() const { return records_; }

    const PersonRecord* find(std::string_view entity) const {
        auto it = records_.find(canonical_entity(entity));
        return it == records_.end() ? nullptr : &it->second;
    }

    // Snapshot mirroring the person-record layout (person id, aliases,
    // first/last seen order, related application history).
    json to_json() const {
        json j;
        j["event_count"] = event_count_;
        json recs = json::array();
        for (const auto& [key, rec] : records_) {
            json entries = json::array();
            for (const auto& e : rec.history) {
                entries.push_back({{"order", e.order},
                                   {"app_category", std::string(to_string(e.category))},
                                   {"summary", e.summary}});
            }
            recs.push_back({{"person_id", rec.person_id},
                            {"entity_names", rec.entity_names},
                            {"first_seen_order", rec.first_seen_order},
                            {"last_seen_order", rec.last_seen_order},
                            {"related_application_history", std::move(entries)}});
        }
        j["records"] = std::move(recs);
        return j;
    }

private:
    std::map<std::string, PersonRecord> records_;
    std::int64_t event_count_ = 0;
};

}  // namespace scamwatch
