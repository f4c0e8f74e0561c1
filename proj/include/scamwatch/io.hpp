#pragma once
// JSONL serialization for trajectories and the small hashing / string
// helpers shared by the dataset pipeline.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "scamwatch/core.hpp"

namespace scamwatch {

using json = nlohmann::json;

// 64-bit FNV-1a. Used for content hashes and stable id derivation.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 14695981039346656037ull) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

inline std::string trim(std::string_view s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline json event_to_json(const AppEvent& ev) {
    json j;
    j["order"] = ev.order;
    j["app_category"] = std::string(to_string(ev.app_category));
    j["app_name"] = ev.app_name ? json(*ev.app_name) : json(nullptr);
    j["content_summary"] = ev.content_summary;
    j["entities"] = ev.entities;
    return j;
}

inline AppEvent event_from_json(const json& j) {
    AppEvent ev;
    ev.order = j.at("order").get<std::int64_t>();
    auto cat = category_from_string(j.at("app_category").get<std::string>());
    if (!cat) throw std::runtime_error("unknown app_category: " + j.at("app_category").get<std::string>());
    ev.app_category = *cat;
    if (j.contains("app_name") && !j.at("app_name").is_null())
        ev.app_name = j.at("app_name").get<std::string>();
    ev.content_summary = j.value("content_summary", std::string{});
    if (j.contains("entities")) ev.entities = j.at("entities").get<std::vector<std::string>>();
    return ev;
}

inline json trajectory_to_json(const Trajectory& traj) {
    json j;
    j["trajectory_id"] = traj.trajectory_id;
    j["split_tag"] = std::string(to_string(traj.split_tag));
    json events = json::array();
    for (const auto& ev : traj.events) events.push_back(event_to_json(ev));
    j["events"] = std::move(events);
    if (traj.scam_segment) {
        j["scam_segment"] = {{"start", traj.scam_segment->start},
                             {"end", traj.scam_segment->end},
                             {"scam_type", traj.scam_segment->scam_type}};
    } else {
        j["scam_segment"] = nullptr;
    }
    return j;
}

inline Trajectory trajectory_from_json(const json& j) {
    Trajectory traj;
    traj.trajectory_id = j.at("trajectory_id").get<std::string>();
    auto split = split_from_string(j.at("split_tag").get<std::string>());
    if (!split) throw std::runtime_error("unknown split_tag");
    traj.split_tag = *split;
    for (const auto& je : j.at("events")) traj.events.push_back(event_from_json(je));
    if (j.contains("scam_segment") && !j.at("scam_segment").is_null()) {
        const auto& js = j.at("scam_segment");
        traj.scam_segment = ScamSegment{js.at("start").get<std::int64_t>(),
                                        js.at("end").get<std::int64_t>(),
                                        js.at("scam_type").get<std::string>()};
    }
    validate_trajectory(traj);
    return traj;
}

// One JSON object per line, LF endings, stable key order via dump().
inline std::string trajectories_to_jsonl(const std::vector<Trajectory>& trajs) {
    std::ostringstream out;
    for (const auto& t : trajs) out << trajectory_to_json(t).dump() << '\n';
    return out.str();
}

inline std::vector<Trajectory> trajectories_from_jsonl(std::istream& in) {
    std::vector<Trajectory> out;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        out.push_back(trajectory_from_json(json::parse(line)));
    }
    return out;
}

inline std::vector<Trajectory> load_trajectories(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset: " + path);
    return trajectories_from_jsonl(in);
}

inline void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace scamwatch
