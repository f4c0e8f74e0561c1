#pragma once
// Streaming evaluation metrics: HR, EDP, FAR, PAR and the
// prediction-consistency family. All definitions are set-based and
// checkable by exhaustive enumeration.
//
// Binary prediction semantics: a window counts as a scam prediction
// iff its post-policy alert flag is set; the three-way label is
// reporting metadata only.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "scamwatch/core.hpp"

namespace scamwatch {

struct WindowPrediction {
    WindowSpan window;
    bool scam_flag = false;
};

struct TrajectoryMetricInput {
    std::string trajectory_id;
    std::int64_t length = 0;
    std::optional<ScamSegment> segment;
    std::vector<WindowPrediction> predictions;  // sorted by window.end, unique ends
    std::int64_t window_size = 10;
};

// Normalized position of a window end inside the scam segment,
// (e_w - s) / (e - s + 1), in [0, 1).
inline double normalized_position(std::int64_t e_w, const ScamSegment& seg) {
    if (e_w < seg.start || e_w > seg.end)
        throw std::invalid_argument("window end outside scam segment");
    return static_cast<double>(e_w - seg.start) / static_cast<double>(seg.length());
}

// Fraction of the segment intersected by the window.
inline double coverage(WindowSpan window, const ScamSegment& seg) {
    const std::int64_t lo = std::max(window.start, seg.start);
    const std::int64_t hi = std::min(window.end, seg.end);
    if (hi < lo) return 0.0;
    return static_cast<double>(hi - lo + 1) / static_cast<double>(seg.length());
}

// Earliest Detection Position: min normalized position over valid
// detections (scam-flagged windows ending inside the segment); 1 when
// the trajectory is missed.
inline double edp(const TrajectoryMetricInput& input) {
    if (!input.segment) throw std::invalid_argument("edp-requires-scam-segment");
    const auto& seg = *input.segment;
    double best = 1.0;
    bool any = false;
    for (const auto& p : input.predictions) {
        if (!p.scam_flag) continue;
        if (!seg.contains(p.window.end)) continue;
        const double pos = normalized_position(p.window.end, seg);
        if (!any || pos < best) best = pos;
        any = true;
    }
    return any ? best : 1.0;
}

// Fraction of scam trajectories with at least one valid detection.
inline double hit_rate(const std::vector<TrajectoryMetricInput>& inputs) {
    std::int64_t scam = 0, hit = 0;
    for (const auto& in : inputs) {
        if (!in.segment) continue;
        ++scam;
        if (edp(in) < 1.0) ++hit;
    }
    if (scam == 0) throw std::invalid_argument("hit-rate-requires-scam-trajectory");
    return static_cast<double>(hit) / static_cast<double>(scam);
}

// Micro-averaged pre-alert rate over candidate windows: windows ending
// inside the segment with coverage >= 0.5.
inline double par(const std::vector<TrajectoryMetricInput>& inputs) {
    std::int64_t candidates = 0, flagged = 0;
    for (const auto& in : inputs) {
        if (!in.segment) continue;
        const auto& seg = *in.segment;
        for (const auto& p : in.predictions) {
            if (!seg.contains(p.window.end)) continue;
            if (coverage(p.window, seg) < 0.5) continue;
            ++candidates;
            if (p.scam_flag) ++flagged;
        }
    }
    if (candidates == 0) throw std::invalid_argument("par-undefined");
    return static_cast<double>(flagged) / static_cast<double>(candidates);
}

// Scam-flagged windows with zero segment overlap, over all
// zero-overlap windows. Every window of a normal trajectory has zero
// overlap; partially overlapping windows are excluded from both counts.
inline double false_alert_rate(const std::vector<TrajectoryMetricInput>& inputs) {
    std::int64_t outside = 0, flagged = 0;
    for (const auto& in : inputs) {
        for (const auto& p : in.predictions) {
            const bool zero_overlap = !in.segment || coverage(p.window, *in.segment) == 0.0;
            if (!zero_overlap) continue;
            ++outside;
            if (p.scam_flag) ++flagged;
        }
    }
    if (outside == 0) throw std::invalid_argument("far-undefined");
    return static_cast<double>(flagged) / static_cast<double>(outside);
}

struct ConsistencyResult {
    double consistency = 1.0;
    double inconsistency_rate = 0.0;
    std::int64_t flip_count = 0;
};

// Stability of the binary flag across adjacent windows.
inline ConsistencyResult consistency_metrics(const std::vector<WindowPrediction>& predictions) {
    const std::size_t n = predictions.size();
    if (n < 2) throw std::invalid_argument("consistency-requires-two-predictions");
    std::int64_t flips = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (predictions[i].scam_flag != predictions[i - 1].scam_flag) ++flips;
    ConsistencyResult r;
    r.flip_count = flips;
    r.inconsistency_rate = static_cast<double>(flips) / static_cast<double>(n - 1);
    r.consistency = 1.0 - r.inconsistency_rate;
    return r;
}

struct PerTrajectoryRecord {
    std::string trajectory_id;
    bool is_scam = false;
    double edp = 1.0;
    bool hit = false;
    std::int64_t candidates = 0;
    std::int64_t candidates_flagged = 0;
    std::int64_t zero_overlap = 0;
    std::int64_t zero_overlap_flagged = 0;
    std::int64_t flips = 0;
    std::int64_t n_predictions = 0;
};

struct MetricsReport {
    double hr = 0.0;
    double edp_mean = 1.0;
    double far = 0.0;
    double par = 0.0;
    double consistency = 1.0;
    double inconsistency_rate = 0.0;
    double flip_count_mean = 0.0;
    std::int64_t n_scam_trajectories = 0;
    std::int64_t n_normal_trajectories = 0;
    std::vector<PerTrajectoryRecord> per_trajectory;
};

// Corpus-level aggregation. HR/EDP average over scam trajectories
// (misses contribute EDP = 1); FAR and PAR are micro-averages over
// windows; consistency is micro-averaged over adjacent pairs.
inline MetricsReport compute_report(const std::vector<TrajectoryMetricInput>& inputs) {
    MetricsReport rep;
    std::int64_t hits = 0;
    double edp_sum = 0.0;
    std::int64_t cand = 0, cand_flagged = 0, outside = 0, outside_flagged = 0;
    std::int64_t flips = 0, pairs = 0, traj_with_pairs = 0;

    for (const auto& in : inputs) {
        PerTrajectoryRecord rec;
        rec.trajectory_id = in.trajectory_id;
        rec.is_scam = in.segment.has_value();
        rec.n_predictions = static_cast<std::int64_t>(in.predictions.size());
        if (in.segment) {
            ++rep.n_scam_trajectories;
            rec.edp = edp(in);
            rec.hit = rec.edp < 1.0;
            if (rec.hit) ++hits;
            edp_sum += rec.edp;
            for (const auto& p : in.predictions) {
                const double c = coverage(p.window, *in.segment);
                if (in.segment->contains(p.window.end) && c >= 0.5) {
                    ++rec.candidates;
                    if (p.scam_flag) ++rec.candidates_flagged;
                }
                if (c == 0.0) {
                    ++rec.zero_overlap;
                    if (p.scam_flag) ++rec.zero_overlap_flagged;
                }
            }
        } else {
            ++rep.n_normal_trajectories;
            for (const auto& p : in.predictions) {
                ++rec.zero_overlap;
                if (p.scam_flag) ++rec.zero_overlap_flagged;
            }
        }
        if (in.predictions.size() >= 2) {
            const auto c = consistency_metrics(in.predictions);
            rec.flips = c.flip_count;
            flips += c.flip_count;
            pairs += rec.n_predictions - 1;
            ++traj_with_pairs;
        }
        cand += rec.candidates;
        cand_flagged += rec.candidates_flagged;
        outside += rec.zero_overlap;
        outside_flagged += rec.zero_overlap_flagged;
        rep.per_trajectory.push_back(std::move(rec));
    }

    if (rep.n_scam_trajectories > 0) {
        rep.hr = static_cast<double>(hits) / static_cast<double>(rep.n_scam_trajectories);
        rep.edp_mean = edp_sum / static_cast<double>(rep.n_scam_trajectories);
    }
    if (outside > 0)
        rep.far = static_cast<double>(outside_flagged) / static_cast<double>(outside);
    if (cand > 0)
        rep.par = static_cast<double>(cand_flagged) / static_cast<double>(cand);
    if (pairs > 0) {
        rep.inconsistency_rate = static_cast<double>(flips) / static_cast<double>(pairs);
        rep.consistency = 1.0 - rep.inconsistency_rate;
    }
    if (traj_with_pairs > 0) {
        std::int64_t total_flips = 0;
        for (const auto& r : rep.per_trajectory) total_flips += r.flips;
        rep.flip_count_mean =
            static_cast<double>(total_flips) / static_cast<double>(traj_with_pairs);
    }
    return rep;
}

}  // namespace scamwatch
