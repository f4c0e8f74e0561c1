#pragma once
// Streaming evaluation runner: drives a dataset through the window
// protocol with a pluggable assessor, emits per-window predictions and
// the corpus metrics report, and rebuilds reports from stored
// predictions (including the per-scam-type and memory-scaling
// breakdowns).

#include <algorithm>
#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "scamwatch/assessor.hpp"
#include "scamwatch/context.hpp"
#include "scamwatch/core.hpp"
#include "scamwatch/io.hpp"
#include "scamwatch/metrics.hpp"
#include "scamwatch/skills.hpp"

namespace scamwatch {

// Any assessor behind one interface; runner output schema is identical
// for local and remote kinds.
using AssessorFn =
    std::function<Assessment(const AugmentedWindow&, const SkillLibrary&)>;

struct RunOptions {
    StreamConfig stream;
    AlertPolicy alert;
    std::int64_t retrieval_budget = 5;
    RetrievalWeights weights;
    bool evolve = false;                  // skill evolution during the run
    bool evolve_on_ground_truth = false;  // gate evolution on true overlap
    int parallel = 1;
};

struct PredictionRow {
    std::string trajectory_id;
    std::int64_t s_w = 0;
    std::int64_t e_w = 0;
    Label label = Label::Normal;
    double probability = 0.0;
    bool alert = false;
};

struct RunResult {
    std::vector<PredictionRow> predictions;  // sorted by (trajectory_id, e_w)
    MetricsReport report;
};

namespace detail {

inline std::vector<PredictionRow> run_one(const Trajectory& traj, SkillLibrary& library,
                                          const AssessorFn& assess,
                                          const RunOptions& opt) {
    std::vector<PredictionRow> rows;
    MemoryStore memory;
    PassThroughAnalyzer analyzer;
    stream_trajectory(
        traj, opt.stream, memory, library, opt.retrieval_budget, analyzer,
        [&](const AugmentedWindow& aug) -> std::optional<EvolveRequest> {
            const Assessment a = assess(aug, library);
            PredictionRow row;
            row.trajectory_id = traj.trajectory_id;
            row.s_w = aug.window.start_index;
            row.e_w = aug.window.end_index;
            row.label = a.label;
            row.probability = a.probability;
            row.alert = apply_alert_policy(a, opt.alert);
            rows.push_back(row);

            if (opt.evolve && a.label != Label::Normal) {
                bool allowed = true;
                if (opt.evolve_on_ground_truth) {
                    allowed = traj.scam_segment &&
                              coverage({aug.window.start_index, aug.window.end_index},
                                       *traj.scam_segment) > 0.0;
                }
                if (allowed) return EvolveRequest{a.rationale, a.label};
            }
            return std::nullopt;
        },
        opt.weights);
    return rows;
}

}  // namespace detail

inline std::vector<TrajectoryMetricInput> metric_inputs_from_predictions(
    const std::vector<Trajectory>& dataset, const std::vector<PredictionRow>& rows,
    std::int64_t window_size) {
    std::map<std::string, std::vector<WindowPrediction>> by_id;
    for (const auto& r : rows)
        by_id[r.trajectory_id].push_back({{r.s_w, r.e_w}, r.alert});

    std::vector<TrajectoryMetricInput> inputs;
    for (const auto& traj : dataset) {
        auto it = by_id.find(traj.trajectory_id);
        if (it == by_id.end())
            throw std::invalid_argument("predictions missing trajectory " +
                                        traj.trajectory_id);
        TrajectoryMetricInput in;
        in.trajectory_id = traj.trajectory_id;
        in.length = traj.length();
        in.segment = traj.scam_segment;
        in.window_size = window_size;
        in.predictions = it->second;
        std::sort(in.predictions.begin(), in.predictions.end(),
                  [](const WindowPrediction& a, const WindowPrediction& b) {
                      return a.window.end < b.window.end;
                  });
        inputs.push_back(std::move(in));
        by_id.erase(it);
    }
    if (!by_id.empty())
        throw std::invalid_argument("predictions reference unknown trajectory " +
                                    by_id.begin()->first);
    return inputs;
}

// Run the whole dataset. With parallel > 1 the skill library must be
// frozen (evolution is sequential by contract).
inline RunResult run_dataset(const std::vector<Trajectory>& dataset, SkillLibrary& library,
                             const AssessorFn& assess, const RunOptions& opt) {
    if (opt.parallel > 1 && opt.evolve)
        throw std::invalid_argument("evolution-requires-sequential");

    RunResult result;
    if (opt.parallel > 1) {
        const SkillLibrary& frozen_lib = library;
        std::vector<std::future<std::vector<PredictionRow>>> futures;
        futures.reserve(dataset.size());
        for (const auto& traj : dataset) {
            futures.push_back(std::async(std::launch::async, [&traj, &frozen_lib, &assess,
                                                              &opt] {
                SkillLibrary local = frozen_lib;  // value copy; never evolves
                local.set_frozen(true);
                return detail::run_one(traj, local, assess, opt);
            }));
        }
        for (auto& f : futures) {
            auto rows = f.get();
            result.predictions.insert(result.predictions.end(), rows.begin(), rows.end());
        }
    } else {
        for (const auto& traj : dataset) {
            auto rows = detail::run_one(traj, library, assess, opt);
            result.predictions.insert(result.predictions.end(), rows.begin(), rows.end());
        }
    }

    std::sort(result.predictions.begin(), result.predictions.end(),
              [](const PredictionRow& a, const PredictionRow& b) {
                  if (a.trajectory_id != b.trajectory_id)
                      return a.trajectory_id < b.trajectory_id;
                  return a.e_w < b.e_w;
              });
    result.report = compute_report(metric_inputs_from_predictions(
        dataset, result.predictions, opt.stream.window_size));
    return result;
}

// Per-trajectory probabilities in calibration shape.
inline std::vector<TrajectoryAssessments> assessments_from_predictions(
    const std::vector<Trajectory>& dataset, const std::vector<PredictionRow>& rows,
    std::int64_t window_size) {
    std::map<std::string, std::vector<std::pair<WindowSpan, double>>> by_id;
    for (const auto& r : rows)
        by_id[r.trajectory_id].push_back({{r.s_w, r.e_w}, r.probability});
    std::vector<TrajectoryAssessments> out;
    for (const auto& traj : dataset) {
        auto it = by_id.find(traj.trajectory_id);
        if (it == by_id.end()) continue;
        TrajectoryAssessments t;
        t.trajectory_id = traj.trajectory_id;
        t.length = traj.length();
        t.segment = traj.scam_segment;
        t.window_size = window_size;
        t.probabilities = it->second;
        std::sort(t.probabilities.begin(), t.probabilities.end(),
                  [](const auto& a, const auto& b) { return a.first.end < b.first.end; });
        out.push_back(std::move(t));
    }
    return out;
}

// ----- serialization -----

inline std::string predictions_to_jsonl(const std::vector<PredictionRow>& rows) {
    std::ostringstream out;
    for (const auto& r : rows) {
        json j{{"trajectory_id", r.trajectory_id}, {"s_w", r.s_w},     {"e_w", r.e_w},
               {"label", std::string(to_string(r.label))},
               {"probability", r.probability},    {"alert", r.alert}};
        out << j.dump() << '\n';
    }
    return out.str();
}

inline std::vector<PredictionRow> predictions_from_jsonl(const std::string& content) {
    std::vector<PredictionRow> rows;
    std::istringstream in(content);
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const json j = json::parse(line);
        PredictionRow r;
        r.trajectory_id = j.at("trajectory_id").get<std::string>();
        r.s_w = j.at("s_w").get<std::int64_t>();
        r.e_w = j.at("e_w").get<std::int64_t>();
        auto label = label_from_string(j.at("label").get<std::string>());
        if (!label) throw std::runtime_error("unknown label in predictions");
        r.label = *label;
        r.probability = j.at("probability").get<double>();
        r.alert = j.at("alert").get<bool>();
        rows.push_back(std::move(r));
    }
    return rows;
}

inline json report_to_json(const MetricsReport& rep) {
    json per = json::array();
    for (const auto& r : rep.per_trajectory) {
        per.push_back({{"trajectory_id", r.trajectory_id},
                       {"is_scam", r.is_scam},
                       {"edp", r.edp},
                       {"hit", r.hit},
                       {"candidates", r.candidates},
                       {"candidates_flagged", r.candidates_flagged},
                       {"zero_overlap", r.zero_overlap},
                       {"zero_overlap_flagged", r.zero_overlap_flagged},
                       {"flips", r.flips},
                       {"n_predictions", r.n_predictions}});
    }
    return json{{"hr", rep.hr},
                {"edp_mean", rep.edp_mean},
                {"far", rep.far},
                {"par", rep.par},
                {"consistency", rep.consistency},
                {"inconsistency_rate", rep.inconsistency_rate},
                {"flip_count_mean", rep.flip_count_mean},
                {"n_scam_trajectories", rep.n_scam_trajectories},
                {"n_normal_trajectories", rep.n_normal_trajectories},
                {"per_trajectory", std::move(per)}};
}

// ----- report breakdowns -----

// One CSV row per scam type in the manifest.
inline std::string per_scam_type_csv(const std::vector<Trajectory>& dataset,
                                     const std::vector<PredictionRow>& rows,
                                     const std::vector<std::string>& scam_types,
                                     std::int64_t window_size) {
    auto inputs = metric_inputs_from_predictions(dataset, rows, window_size);
    std::map<std::string, std::optional<ScamSegment>> seg_by_id;
    for (const auto& t : dataset) seg_by_id[t.trajectory_id] = t.scam_segment;

    std::ostringstream out;
    out << "scam_type,n_trajectories,hr,edp_mean,far,par\n";
    for (const auto& type : scam_types) {
        std::vector<TrajectoryMetricInput> subset;
        for (const auto& in : inputs)
            if (in.segment && in.segment->scam_type == type) subset.push_back(in);
        double hr = 0.0, edp_mean = 1.0, far_v = 0.0, par_v = 0.0;
        if (!subset.empty()) {
            hr = hit_rate(subset);
            double edp_sum = 0.0;
            for (const auto& in : subset) edp_sum += edp(in);
            edp_mean = edp_sum / static_cast<double>(subset.size());
            try { far_v = false_alert_rate(subset); } catch (const std::invalid_argument&) {}
            try { par_v = par(subset); } catch (const std::invalid_argument&) {}
        }
        out << type << ',' << subset.size() << ',' << hr << ',' << edp_mean << ','
            << far_v << ',' << par_v << '\n';
    }
    return out.str();
}

// Memory-scaling breakdown: window-level accuracy binned by how many
// scam-related memory entries were stored when the window was assessed.
// A scam-related entry is a (event, entity) history item whose source
// event lies inside the scam segment; the window's true label is scam
// iff coverage >= 0.5. Bins partition [0, inf).
struct MemoryScalingBin {
    std::int64_t lo = 0;
    std::int64_t hi = 0;  // inclusive; -1 = unbounded
    std::int64_t windows = 0;
    std::int64_t correct = 0;
};

inline std::vector<MemoryScalingBin> memory_scaling_bins(
    const std::vector<Trajectory>& dataset, const std::vector<PredictionRow>& rows) {
    std::vector<MemoryScalingBin> bins = {
        {0, 0}, {1, 2}, {3, 5}, {6, 10}, {11, -1}};
    std::map<std::string, const Trajectory*> by_id;
    for (const auto& t : dataset) by_id[t.trajectory_id] = &t;

    for (const auto& r : rows) {
        const Trajectory* traj = by_id.at(r.trajectory_id);
        std::int64_t stored = 0;
        bool true_scam = false;
        if (traj->scam_segment) {
            const auto& seg = *traj->scam_segment;
            const std::int64_t hi = std::min(seg.end, r.e_w);
            for (std::int64_t i = seg.start; i <= hi; ++i)
                stored += static_cast<std::int64_t>(traj->events[i].entities.size());
            true_scam = coverage({r.s_w, r.e_w}, seg) >= 0.5;
        }
        const bool correct = r.alert == true_scam;
        for (auto& b : bins) {
            if (stored >= b.lo && (b.hi < 0 || stored <= b.hi)) {
                ++b.windows;
                if (correct) ++b.correct;
                break;
            }
        }
    }
    return bins;
}

inline std::string memory_scaling_csv(const std::vector<MemoryScalingBin>& bins) {
    std::ostringstream out;
    out << "bin_lo,bin_hi,windows,accuracy\n";
    for (const auto& b : bins) {
        out << b.lo << ',' << (b.hi < 0 ? std::string("inf") : std::to_string(b.hi)) << ','
            << b.windows << ',';
        out << (b.windows > 0
                    ? static_cast<double>(b.correct) / static_cast<double>(b.windows)
                    : 0.0)
            << '\n';
    }
    return out.str();
}

}  // namespace scamwatch
