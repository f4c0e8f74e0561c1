#pragma once
// Core domain types for the streaming scam-anticipation harness:
// app events, trajectories, the sliding-window protocol, and the
// threshold alerting policy. Everything here is an immutable value;
// the operations are pure functions.

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scamwatch {

// The 12 functional app categories used across the dataset.
enum class AppCategory : std::uint8_t {
    Communication = 0,
    InstantMessaging,
    SocialMedia,
    Tools,
    Financial,
    Multimedia,
    Productivity,
    TravelLocal,
    Shopping,
    Entertainment,
    HealthFitness,
    Others,
};

inline constexpr std::size_t kNumCategories = 12;

inline constexpr std::array<std::string_view, kNumCategories> kCategoryNames = {
    "Communication",   "Instant Messaging", "Social Media", "Tools",
    "Financial",       "Multimedia",        "Productivity", "Travel & Local",
    "Shopping",        "Entertainment",     "Health & Fitness", "Others",
};

inline std::string_view to_string(AppCategory c) {
    return kCategoryNames[static_cast<std::size_t>(c)];
}

inline std::optional<AppCategory> category_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kNumCategories; ++i) {
        if (kCategoryNames[i] == name) return static_cast<AppCategory>(i);
    }
    return std::nullopt;
}

// One timestamped app interaction. `order` is the global 0-based
// position within the owning trajectory. `entities` holds the names
// extracted from the screen content (no duplicates).
struct AppEvent {
    std::int64_t order = 0;
    AppCategory app_category = AppCategory::Others;
    std::optional<std::string> app_name;
    std::string content_summary;
    std::vector<std::string> entities;
};

// Contiguous span of event indices occupied by scam behavior.
struct ScamSegment {
    std::int64_t start = 0;
    std::int64_t end = 0;
    std::string scam_type;

    std::int64_t length() const { return end - start + 1; }
    bool contains(std::int64_t idx) const { return idx >= start && idx <= end; }
};

enum class SplitTag : std::uint8_t { Train, Validation, Test };

inline std::string_view to_string(SplitTag s) {
    switch (s) {
        case SplitTag::Train: return "train";
        case SplitTag::Validation: return "validation";
        case SplitTag::Test: return "test";
    }
    return "train";
}

inline std::optional<SplitTag> split_from_string(std::string_view s) {
    if (s == "train") return SplitTag::Train;
    if (s == "validation") return SplitTag::Validation;
    if (s == "test") return SplitTag::Test;
    return std::nullopt;
}

struct Trajectory {
    std::string trajectory_id;
    std::vector<AppEvent> events;
    std::optional<ScamSegment> scam_segment;
    SplitTag split_tag = SplitTag::Train;

    std::int64_t length() const { return static_cast<std::int64_t>(events.size()); }
};

// Sliding-window protocol parameters. stride <= W keeps windows
// overlapping or adjacent so no event is skipped.
struct StreamConfig {
    std::int64_t window_size = 10;
    std::int64_t stride = 5;

    void validate() const {
        if (window_size < 1) throw std::invalid_argument("window_size must be >= 1");
        if (stride < 1) throw std::invalid_argument("stride must be >= 1");
        if (stride > window_size) throw std::invalid_argument("stride must be <= window_size");
    }
};

struct ObservationWindow {
    std::int64_t start_index = 0;
    std::int64_t end_index = 0;
    std::vector<AppEvent> events;  // contiguous slice [start_index, end_index]

    std::int64_t width() const { return end_index - start_index + 1; }
};

enum class Label : std::uint8_t { Normal, Risky, Scam };

inline std::string_view to_string(Label l) {
    switch (l) {
        case Label::Normal: return "Normal";
        case Label::Risky: return "Risky";
        case Label::Scam: return "Scam";
    }
    return "Normal";
}

inline std::optional<Label> label_from_string(std::string_view s) {
    if (s == "Normal") return Label::Normal;
    if (s == "Risky") return Label::Risky;
    if (s == "Scam") return Label::Scam;
    return std::nullopt;
}

// Per-window assessor output.
struct Assessment {
    std::string rationale;
    Label label = Label::Normal;
    double probability = 0.0;  // scam probability in [0,1]
    std::int64_t window_end = 0;
};

struct AlertPolicy {
    double tau = 0.5;

    void validate() const {
        if (tau < 0.0 || tau > 1.0) throw std::invalid_argument("tau must be in [0,1]");
    }
};

struct WindowSpan {
    std::int64_t start = 0;
    std::int64_t end = 0;

    bool operator==(const WindowSpan&) const = default;
};

// Window ends step W-1, W-1+stride, ... ; a final window ending at L-1
// is forced if the stepping rule would leave trailing events uncovered.
inline std::vector<WindowSpan> enumerate_windows(std::int64_t trajectory_length,
                                                 const StreamConfig& config) {
    config.validate();
    const std::int64_t w = config.window_size;
    if (trajectory_length < w) throw std::invalid_argument("trajectory-too-short");

    std::vector<WindowSpan> out;
    for (std::int64_t end = w - 1; end <= trajectory_length - 1; end += config.stride) {
        out.push_back({end - w + 1, end});
    }
    if (out.empty() || out.back().end != trajectory_length - 1) {
        const std::int64_t end = trajectory_length - 1;
        out.push_back({end - w + 1, end});
    }
    return out;
}

inline ObservationWindow make_window(const Trajectory& traj, WindowSpan span) {
    if (span.start < 0 || span.end >= traj.length() || span.start > span.end)
        throw std::out_of_range("window span outside trajectory");
    ObservationWindow w;
    w.start_index = span.start;
    w.end_index = span.end;
    w.events.assign(traj.events.begin() + span.start, traj.events.begin() + span.end + 1);
    return w;
}

// Alert iff p > tau, strict.
inline bool apply_alert_policy(const Assessment& a, const AlertPolicy& policy) {
    policy.validate();
    return a.probability > policy.tau;
}

inline void validate_trajectory(const Trajectory& traj) {
    for (std::int64_t i = 0; i < traj.length(); ++i) {
        if (traj.events[i].order != i)
            throw std::invalid_argument("event order must equal its index");
    }
    if (traj.scam_segment) {
        const auto& seg = *traj.scam_segment;
        if (seg.start < 0 || seg.start > seg.end || seg.end >= traj.length())
            throw std::invalid_argument("scam segment out of bounds");
    }
}

}  // namespace scamwatch
