#pragma once
// Scam-risk assessors: a deterministic rule baseline and a logistic
// model over a fixed 18-dim feature map, plus threshold calibration on
// a validation sweep. Remote (HTTP) assessors live in remote.hpp
// behind the same Assessment contract.

#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "scamwatch/context.hpp"
#include "scamwatch/core.hpp"
#include "scamwatch/metrics.hpp"
#include "scamwatch/skills.hpp"

namespace scamwatch {

inline double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// Probability bands for the three-way label. Risky is a low-confidence
// scam prediction; metrics only consume the alert flag.
inline Label label_from_probability(double p) {
    if (p > 0.66) return Label::Scam;
    if (p > 0.33) return Label::Risky;
    return Label::Normal;
}

inline constexpr std::size_t kFeatureDim = 18;

inline const std::array<std::string, kFeatureDim>& feature_names() {
    static const std::array<std::string, kFeatureDim> names = {
        "cat_communication", "cat_instant_messaging", "cat_social_media", "cat_tools",
        "cat_financial",     "cat_multimedia",        "cat_productivity", "cat_travel_local",
        "cat_shopping",      "cat_entertainment",     "cat_health_fitness", "cat_others",
        "entity_recurrence", "window_indicator_hits", "retrieved_indicator_hits",
        "sequence_affinity", "retrieved_fill",        "bias",
    };
    return names;
}

using FeatureVector = std::array<double, kFeatureDim>;

namespace detail {

// Distinct indicator phrases across the whole library.
inline std::vector<std::string> all_indicators(const SkillLibrary& library) {
    std::set<std::string> uniq;
    for (const auto& [key, skill] : library.skills())
        uniq.insert(skill.early_indicators.begin(), skill.early_indicators.end());
    return {uniq.begin(), uniq.end()};
}

// Longest in-order (subsequence) match of the skill's typical app
// sequence within the window's category sequence, normalized by the
// sequence length; max over skills.
inline double best_sequence_affinity(const std::vector<AppCategory>& window_cats,
                                     const SkillLibrary& library) {
    double best = 0.0;
    for (const auto& [key, skill] : library.skills()) {
        const auto& seq = skill.typical_app_sequence;
        if (seq.empty()) continue;
        std::size_t matched = 0;
        for (auto c : window_cats) {
            if (matched < seq.size() && c == seq[matched]) ++matched;
        }
        best = std::max(best, static_cast<double>(matched) /
                                  static_cast<double>(seq.size()));
    }
    return best;
}

}  // namespace detail

// The student-visible feature map. No privileged dimensions: teachers
// in the distillation module append their own block.
inline FeatureVector features(const AugmentedWindow& aug, const SkillLibrary& library,
                              std::int64_t budget) {
    FeatureVector f{};
    const auto& events = aug.window.events;
    const double w = static_cast<double>(events.size());
    std::vector<AppCategory> cats;
    cats.reserve(events.size());
    std::string window_text, retrieved_text;
    for (const auto& ev : events) {
        f[static_cast<std::size_t>(ev.app_category)] += 1.0 / w;
        cats.push_back(ev.app_category);
        window_text += ev.content_summary + '\n';
    }
    std::set<std::string> retrieved_entities;
    for (const auto& hit : aug.retrieved) {
        retrieved_entities.insert(hit.entity);
        retrieved_text += hit.summary + '\n';
    }
    const auto indicators = detail::all_indicators(library);
    f[12] = static_cast<double>(retrieved_entities.size());
    f[13] = static_cast<double>(indicator_hits(window_text, indicators));
    f[14] = static_cast<double>(indicator_hits(retrieved_text, indicators));
    f[15] = detail::best_sequence_affinity(cats, library);
    f[16] = budget > 0 ? static_cast<double>(aug.retrieved.size()) /
                             static_cast<double>(budget)
                       : 0.0;
    f[17] = 1.0;
    for (double v : f)
        if (!std::isfinite(v)) throw std::runtime_error("non-finite feature");
    return f;
}

struct RuleAssessorConfig {
    double bias = 2.0;   // raw score at which p = 0.5
    double scale = 0.5;  // sigmoid temperature
};

// Deterministic baseline: indicator hits + sequence affinity +
// retrieved evidence, squashed through a fixed sigmoid.
inline Assessment assess_rule(const AugmentedWindow& aug, const SkillLibrary& library,
                              const RuleAssessorConfig& cfg = {}) {
    std::string window_text, retrieved_text;
    std::vector<AppCategory> cats;
    for (const auto& ev : aug.window.events) {
        window_text += ev.content_summary + '\n';
        cats.push_back(ev.app_category);
    }
    std::set<std::string> retrieved_entities;
    for (const auto& hit : aug.retrieved) {
        retrieved_text += hit.summary + '\n';
        retrieved_entities.insert(hit.entity);
    }

    const auto indicators = detail::all_indicators(library);
    std::vector<std::string> matched;
    {
        const std::string lower = to_lower(window_text + retrieved_text);
        for (const auto& ind : indicators)
            if (lower.find(ind) != std::string::npos) matched.push_back(ind);
    }
    const int window_hits = indicator_hits(window_text, indicators);
    const int retrieved_hits = indicator_hits(retrieved_text, indicators);
    const double affinity = detail::best_sequence_affinity(cats, library);
    const double raw = static_cast<double>(window_hits) + affinity +
                       static_cast<double>(retrieved_hits) +
                       0.5 * static_cast<double>(retrieved_entities.size());

    Assessment a;
    a.probability = sigmoid((raw - cfg.bias) / cfg.scale);
    a.label = label_from_probability(a.probability);
    a.window_end = aug.window.end_index;

    std::ostringstream r;
    r << "rule assessor: " << window_hits << " window and " << retrieved_hits
      << " retrieved indicator hits";
    if (!matched.empty()) {
        r << " (";
        for (std::size_t i = 0; i < matched.size(); ++i)
            r << (i ? ", " : "") << matched[i];
        r << ")";
    }
    r << "; sequence affinity " << affinity << "; " << aug.retrieved.size()
      << " retrieved entries";
    std::vector<std::string> matched_skills;
    {
        const std::string all_text = window_text + retrieved_text;
        for (const auto& [key, skill] : library.skills())
            if (indicator_hits(all_text, skill.early_indicators) > 0)
                matched_skills.push_back(key);
    }
    if (!matched_skills.empty()) {
        r << "; skills:";
        for (const auto& k : matched_skills) r << ' ' << k;
    }
    a.rationale = r.str();
    return a;
}

struct LogisticParams {
    std::vector<double> theta_shared;  // kFeatureDim weights for the student path
    std::vector<double> theta_priv;    // privileged weights, teacher path only

    void validate() const {
        for (double v : theta_shared)
            if (!std::isfinite(v)) throw std::runtime_error("non-finite theta_shared");
        for (double v : theta_priv)
            if (!std::isfinite(v)) throw std::runtime_error("non-finite theta_priv");
    }
};

inline double dot(const std::vector<double>& w, const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * x[i];
    return s;
}

inline Assessment assess_logistic(const AugmentedWindow& aug, const LogisticParams& params,
                                  const SkillLibrary& library, std::int64_t budget = 5) {
    params.validate();
    if (params.theta_shared.size() != kFeatureDim)
        throw std::invalid_argument("theta_shared must have 18 entries");
    const FeatureVector f = features(aug, library, budget);
    const double z = dot(params.theta_shared, f.data(), kFeatureDim);

    Assessment a;
    a.probability = sigmoid(z);
    a.label = label_from_probability(a.probability);
    a.window_end = aug.window.end_index;

    // Top-3 absolute feature contributions.
    std::array<std::size_t, kFeatureDim> idx{};
    for (std::size_t i = 0; i < kFeatureDim; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
        const double a_ = std::abs(params.theta_shared[i] * f[i]);
        const double b_ = std::abs(params.theta_shared[j] * f[j]);
        if (a_ != b_) return a_ > b_;
        return i < j;
    });
    std::ostringstream r;
    r << "logistic assessor: top contributions";
    for (std::size_t k = 0; k < 3; ++k)
        r << ' ' << feature_names()[idx[k]] << '='
          << params.theta_shared[idx[k]] * f[idx[k]];
    a.rationale = r.str();
    return a;
}

// Parameter file round-trip.
inline json params_to_json(const LogisticParams& p,
                           const std::vector<std::string>& priv_names) {
    return json{{"version", 1},
                {"feature_names", std::vector<std::string>(feature_names().begin(),
                                                           feature_names().end())},
                {"theta_shared", p.theta_shared},
                {"theta_priv", p.theta_priv},
                {"priv_feature_names", priv_names}};
}

inline LogisticParams params_from_json(const json& j) {
    LogisticParams p;
    p.theta_shared = j.at("theta_shared").get<std::vector<double>>();
    p.theta_priv = j.at("theta_priv").get<std::vector<double>>();
    p.validate();
    return p;
}

// ----- threshold calibration -----

struct TrajectoryAssessments {
    std::string trajectory_id;
    std::int64_t length = 0;
    std::optional<ScamSegment> segment;
    std::int64_t window_size = 10;
    std::vector<std::pair<WindowSpan, double>> probabilities;  // sorted by window end
};

struct SweepPoint {
    double tau = 0.0;
    double hr = 0.0;
    double far = 0.0;
    double par = 0.0;
};

struct CalibrationResult {
    double tau = 0.5;
    double objective_value = 0.0;  // PAR at the chosen threshold
    std::vector<SweepPoint> sweep;
};

inline std::vector<TrajectoryMetricInput> flags_at_tau(
    const std::vector<TrajectoryAssessments>& val, double tau) {
    std::vector<TrajectoryMetricInput> inputs;
    inputs.reserve(val.size());
    for (const auto& t : val) {
        TrajectoryMetricInput in;
        in.trajectory_id = t.trajectory_id;
        in.length = t.length;
        in.segment = t.segment;
        in.window_size = t.window_size;
        for (const auto& [span, p] : t.probabilities)
            in.predictions.push_back({span, p > tau});
        inputs.push_back(std::move(in));
    }
    return inputs;
}

// 101-point grid sweep; pick the tau maximizing PAR subject to
// FAR <= budget (ties to larger tau); if no grid point is feasible,
// minimize FAR instead.
inline CalibrationResult calibrate_tau(const std::vector<TrajectoryAssessments>& validation,
                                       double far_budget = 0.05) {
    if (validation.empty()) throw std::invalid_argument("empty validation set");
    CalibrationResult result;
    result.sweep.reserve(101);
    for (int i = 0; i <= 100; ++i) {
        const double tau = static_cast<double>(i) / 100.0;
        auto inputs = flags_at_tau(validation, tau);
        SweepPoint pt;
        pt.tau = tau;
        try { pt.hr = hit_rate(inputs); } catch (const std::invalid_argument&) { pt.hr = 0.0; }
        try { pt.far = false_alert_rate(inputs); } catch (const std::invalid_argument&) { pt.far = 0.0; }
        try { pt.par = par(inputs); } catch (const std::invalid_argument&) { pt.par = 0.0; }
        result.sweep.push_back(pt);
    }

    const SweepPoint* chosen = nullptr;
    for (const auto& pt : result.sweep) {  // feasible: max PAR, ties to larger tau
        if (pt.far > far_budget) continue;
        if (!chosen || pt.par >= chosen->par) chosen = &pt;
    }
    if (!chosen) {
        for (const auto& pt : result.sweep) {  // infeasible: min FAR, ties to larger tau
            if (!chosen || pt.far <= chosen->far) chosen = &pt;
        }
    }
    result.tau = chosen->tau;
    result.objective_value = chosen->par;
    return result;
}

inline json calibration_to_json(const CalibrationResult& r) {
    json sweep = json::array();
    for (const auto& pt : r.sweep)
        sweep.push_back({{"tau", pt.tau}, {"hr", pt.hr}, {"far", pt.far}, {"par", pt.par}});
    return json{{"tau", r.tau}, {"objective_value", r.objective_value},
                {"sweep", std::move(sweep)}};
}

inline CalibrationResult calibration_from_json(const json& j) {
    CalibrationResult r;
    r.tau = j.at("tau").get<double>();
    r.objective_value = j.at("objective_value").get<double>();
    for (const auto& pt : j.at("sweep"))
        r.sweep.push_back({pt.at("tau").get<double>(), pt.at("hr").get<double>(),
                           pt.at("far").get<double>(), pt.at("par").get<double>()});
    return r;
}

}  // namespace scamwatch
