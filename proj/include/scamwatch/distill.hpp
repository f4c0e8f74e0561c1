#pragma once
// Desk-scale on-policy self-distillation for the logistic assessor.
//
// The teacher shares the student's parameters and additionally sees a
// privileged block built from a rule-generated anti-scam reflection
// (scam-type one-hot, full-trace indicator evidence, stage progress).
// Training runs in two stages: CE-only SFT over the full parameter
// vector, then OPSD where each step samples fresh rollouts with the
// current student and takes one gradient step of reverse-KL + lambda*CE
// on the shared parameters only. All gradients are analytic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "scamwatch/assessor.hpp"
#include "scamwatch/context.hpp"
#include "scamwatch/core.hpp"
#include "scamwatch/memory.hpp"
#include "scamwatch/metrics.hpp"
#include "scamwatch/skills.hpp"

namespace scamwatch {

struct Reflection {
    std::string text;
    std::vector<double> privileged_features;  // [one-hot scam types..., evidence, stage]
};

struct DistillConfig {
    double lambda = 0.1;          // CE weight inside the combined loss
    double learning_rate = 0.5;
    int sft_epochs = 3;
    int opsd_epochs = 2;
    int batch_size = 8;
    std::uint64_t seed = 1;
    double coverage_threshold = 0.5;  // scam label for CE, matching PAR candidates
    bool evolve_during_rollouts = false;

    void validate() const {
        if (lambda <= 0.0) throw std::invalid_argument("lambda must be > 0");
        if (learning_rate <= 0.0) throw std::invalid_argument("learning_rate must be > 0");
    }
};

inline std::size_t privileged_dim(std::size_t n_scam_types) { return n_scam_types + 2; }

// Deterministic privileged reflection comparing the partial window
// against the full scam trace through the scam-type skill.
inline Reflection generate_reflection(const ObservationWindow& window,
                                      const Trajectory& traj, const SkillLibrary& library,
                                      const std::vector<std::string>& scam_types) {
    if (!traj.scam_segment)
        throw std::invalid_argument("reflection-requires-overlap");
    const ScamSegment& seg = *traj.scam_segment;
    const double cov = coverage({window.start_index, window.end_index}, seg);
    if (cov == 0.0) throw std::invalid_argument("reflection-requires-overlap");

    const Skill* skill = library.find(seg.scam_type);
    const Skill fallback = make_seed_skill(seg.scam_type);
    if (!skill) skill = &fallback;

    std::string window_text;
    std::vector<AppCategory> window_cats;
    for (const auto& ev : window.events) {
        window_text += ev.content_summary + '\n';
        window_cats.push_back(ev.app_category);
    }
    std::vector<std::string> matched;
    {
        const std::string lower = to_lower(window_text);
        for (const auto& ind : skill->early_indicators)
            if (lower.find(ind) != std::string::npos) matched.push_back(ind);
    }
    // Next expected category: first unmatched step of the typical sequence.
    std::size_t matched_steps = 0;
    for (auto c : window_cats)
        if (matched_steps < skill->typical_app_sequence.size() &&
            c == skill->typical_app_sequence[matched_steps])
            ++matched_steps;
    std::ostringstream text;
    text << "scam type " << seg.scam_type << "; matched indicators:";
    if (matched.empty()) text << " none yet";
    for (const auto& m : matched) text << ' ' << m << ';';
    if (matched_steps < skill->typical_app_sequence.size())
        text << " next expected app category: "
             << to_string(skill->typical_app_sequence[matched_steps]) << ';';
    else
        text << " typical app sequence complete;";
    text << " observed " << static_cast<int>(cov * 100.0)
         << "% of the scam segment so far";

    Reflection r;
    r.text = text.str();
    r.privileged_features.assign(privileged_dim(scam_types.size()), 0.0);
    bool found = false;
    for (std::size_t i = 0; i < scam_types.size(); ++i) {
        if (scam_types[i] == seg.scam_type) {
            r.privileged_features[i] = 1.0;
            found = true;
            break;
        }
    }
    if (!found) throw std::invalid_argument("scam type missing from manifest types");

    // Full-trace indicator evidence, normalized by the skill's indicator count.
    std::string full_text;
    for (std::int64_t i = seg.start; i <= seg.end; ++i)
        full_text += traj.events[i].content_summary + '\n';
    const int hits = indicator_hits(full_text, skill->early_indicators);
    const double denom = std::max<std::size_t>(skill->early_indicators.size(), 1);
    r.privileged_features[scam_types.size()] =
        std::min(1.0, static_cast<double>(hits) / denom);
    r.privileged_features[scam_types.size() + 1] = cov;
    return r;
}

// Reverse KL over categorical distributions, eps-floored and
// renormalized. Nonnegative; zero iff equal.
inline double reverse_kl(std::vector<double> student, std::vector<double> teacher) {
    if (student.size() != teacher.size() || student.empty())
        throw std::invalid_argument("distribution size mismatch");
    auto check = [](const std::vector<double>& d) {
        double sum = 0.0;
        for (double v : d) {
            if (v < 0.0 || !std::isfinite(v))
                throw std::invalid_argument("not a distribution");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-6)
            throw std::invalid_argument("not a distribution");
    };
    check(student);
    check(teacher);
    auto floor_renorm = [](std::vector<double>& d) {
        double sum = 0.0;
        for (double& v : d) {
            v = std::max(v, 1e-9);
            sum += v;
        }
        for (double& v : d) v /= sum;
    };
    floor_renorm(student);
    floor_renorm(teacher);
    double kl = 0.0;
    for (std::size_t i = 0; i < student.size(); ++i)
        kl += student[i] * std::log(student[i] / teacher[i]);
    return std::max(kl, 0.0);
}

struct TrainingItem {
    FeatureVector base{};                    // student-visible features
    std::vector<double> privileged;          // present iff overlap
    double teacher_logit = 0.0;              // materialized at rollout time; no
                                             // gradient flows through the teacher
    double label = 0.0;                      // ground-truth binary target
    bool overlap = true;                     // overlaps the scam segment
    bool apply_ce = true;                    // coverage >= threshold (or benign)
};

struct TrainingBatch {
    std::vector<TrainingItem> items;
};

struct LossResult {
    double loss = 0.0;
    std::vector<double> grad_shared;  // kFeatureDim
};

namespace detail {

inline double clamp_p(double p) { return std::min(std::max(p, 1e-12), 1.0 - 1e-12); }

inline double binary_ce(double y, double p) {
    p = clamp_p(p);
    return -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
}

inline double binary_reverse_kl(double ps, double pt) {
    ps = clamp_p(ps);
    pt = clamp_p(pt);
    return ps * std::log(ps / pt) + (1.0 - ps) * std::log((1.0 - ps) / (1.0 - pt));
}

}  // namespace detail

// Combined loss of Eq. "KL + lambda*CE": overlap items compare the
// student distribution against the privileged-teacher distribution
// (teacher is a constant: no gradient flows through it); benign items
// use plain CE. Mean over the batch; analytic gradient for the shared
// parameters.
inline LossResult combined_loss(const TrainingBatch& batch, const LogisticParams& params,
                                const DistillConfig& config) {
    config.validate();
    params.validate();
    if (batch.items.empty()) throw std::invalid_argument("empty batch");
    if (params.theta_shared.size() != kFeatureDim)
        throw std::invalid_argument("theta_shared must have 18 entries");

    LossResult out;
    out.grad_shared.assign(kFeatureDim, 0.0);
    const double n = static_cast<double>(batch.items.size());

    for (const auto& item : batch.items) {
        const double zs = dot(params.theta_shared, item.base.data(), kFeatureDim);
        const double ps = sigmoid(zs);
        double item_loss = 0.0;
        double dloss_dzs = 0.0;

        if (item.overlap) {
            if (item.privileged.size() != params.theta_priv.size())
                throw std::invalid_argument("privileged feature size mismatch");
            const double zt = item.teacher_logit;
            const double pt = sigmoid(zt);
            item_loss += detail::binary_reverse_kl(ps, pt);
            // dKL/dzs = ps(1-ps)(zs - zt); teacher treated as constant.
            dloss_dzs += ps * (1.0 - ps) * (zs - zt);
            if (item.apply_ce) {
                item_loss += config.lambda * detail::binary_ce(item.label, ps);
                dloss_dzs += config.lambda * (ps - item.label);
            }
        } else {
            item_loss += detail::binary_ce(item.label, ps);
            dloss_dzs += ps - item.label;
        }
        if (!std::isfinite(item_loss)) throw std::runtime_error("numerical-failure");
        out.loss += item_loss / n;
        for (std::size_t i = 0; i < kFeatureDim; ++i)
            out.grad_shared[i] += dloss_dzs * item.base[i] / n;
    }
    return out;
}

struct TrainingLogRow {
    int epoch = 0;
    std::string stage;  // "sft" or "opsd"
    double loss = 0.0;
    double par = 0.0;
    double far = 0.0;
};

struct TrainingResult {
    LogisticParams params;
    std::vector<TrainingLogRow> log;
    // On-policy audit: (parameter version at step start, version tagged
    // on the rollouts consumed by that step). Always equal by construction;
    // exposed so tests can assert it.
    std::vector<std::pair<std::int64_t, std::int64_t>> rollout_versions;
};

namespace detail {

// Deterministic bounded draw (modulo bias acceptable at desk scale).
inline std::size_t draw_index(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

struct Materialized {
    std::vector<TrainingItem> items;
    std::int64_t version_tag = 0;
};

// Run the streaming pipeline over one trajectory with the current
// student and materialize training items for every window.
inline void materialize_rollout(const Trajectory& traj, const StreamConfig& stream,
                                SkillLibrary& library, std::int64_t budget,
                                const std::vector<std::string>& scam_types,
                                const DistillConfig& config, const LogisticParams& params,
                                std::int64_t version_tag, bool with_assessor,
                                Materialized& out) {
    MemoryStore memory;
    PassThroughAnalyzer analyzer;
    stream_trajectory(
        traj, stream, memory, library, budget, analyzer,
        [&](const AugmentedWindow& aug) -> std::optional<EvolveRequest> {
            TrainingItem item;
            item.base = features(aug, library, budget);
            double cov = 0.0;
            if (traj.scam_segment)
                cov = coverage({aug.window.start_index, aug.window.end_index},
                               *traj.scam_segment);
            if (cov > 0.0) {
                item.overlap = true;
                item.apply_ce = cov >= config.coverage_threshold;
                item.label = item.apply_ce ? 1.0 : 0.0;
                item.privileged =
                    generate_reflection(aug.window, traj, library, scam_types)
                        .privileged_features;
                // Teacher output, frozen at materialization: full theta over
                // base + privileged features.
                item.teacher_logit =
                    dot(params.theta_shared, item.base.data(), kFeatureDim) +
                    dot(params.theta_priv, item.privileged.data(),
                        item.privileged.size());
            } else {
                item.overlap = false;
                item.apply_ce = true;
                item.label = 0.0;
            }
            out.items.push_back(std::move(item));
            out.version_tag = version_tag;

            if (with_assessor && config.evolve_during_rollouts) {
                const Assessment a = assess_logistic(aug, params, library, budget);
                if (a.label != Label::Normal)
                    return EvolveRequest{a.rationale, a.label};
            }
            return std::nullopt;
        });
}

// Held-out PAR/FAR of the current student at tau = 0.5.
inline std::pair<double, double> evaluate_student(
    const std::vector<const Trajectory*>& held_out, const StreamConfig& stream,
    SkillLibrary& library, std::int64_t budget, const LogisticParams& params) {
    std::vector<TrajectoryMetricInput> inputs;
    for (const Trajectory* traj : held_out) {
        TrajectoryMetricInput in;
        in.trajectory_id = traj->trajectory_id;
        in.length = traj->length();
        in.segment = traj->scam_segment;
        in.window_size = stream.window_size;
        MemoryStore memory;
        PassThroughAnalyzer analyzer;
        stream_trajectory(*traj, stream, memory, library, budget, analyzer,
                          [&](const AugmentedWindow& aug) {
                              const Assessment a =
                                  assess_logistic(aug, params, library, budget);
                              in.predictions.push_back(
                                  {{aug.window.start_index, aug.window.end_index},
                                   a.probability > 0.5});
                          });
        inputs.push_back(std::move(in));
    }
    double p = 0.0, f = 0.0;
    try { p = par(inputs); } catch (const std::invalid_argument&) {}
    try { f = false_alert_rate(inputs); } catch (const std::invalid_argument&) {}
    return {p, f};
}

}  // namespace detail

// Two-stage training. Stage 1 (SFT): CE over the full parameter vector
// on all windows with ground-truth labels (partial-coverage windows are
// skipped). Stage 2 (OPSD): per step, sample a trajectory batch, roll
// it out with the current student to materialize (window, reflection)
// pairs, then one combined-loss gradient step on the shared parameters.
inline TrainingResult train(const std::vector<Trajectory>& dataset, SkillLibrary& library,
                            const DistillConfig& config,
                            const std::vector<std::string>& scam_types,
                            const StreamConfig& stream = {}, std::int64_t budget = 5) {
    config.validate();
    std::vector<const Trajectory*> train_set, held_out;
    bool train_has_scam = false;
    for (const auto& traj : dataset) {
        if (traj.split_tag == SplitTag::Train) {
            train_set.push_back(&traj);
            if (traj.scam_segment) train_has_scam = true;
        } else if (traj.split_tag == SplitTag::Validation) {
            held_out.push_back(&traj);
        }
    }
    if (!train_has_scam)
        throw std::invalid_argument("train split contains no scam trajectories");

    const std::size_t priv_dim = privileged_dim(scam_types.size());
    TrainingResult result;
    result.params.theta_shared.assign(kFeatureDim, 0.0);
    result.params.theta_priv.assign(priv_dim, 0.0);

    std::mt19937_64 rng(config.seed);
    const bool rollouts_frozen = !config.evolve_during_rollouts;
    const bool was_frozen = library.frozen();
    library.set_frozen(rollouts_frozen || was_frozen);

    // ----- Stage 1: SFT (CE only, full theta) -----
    detail::Materialized sft;
    for (const Trajectory* traj : train_set)
        detail::materialize_rollout(*traj, stream, library, budget, scam_types, config,
                                    result.params, 0, false, sft);
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < sft.items.size(); ++i)
        if (!sft.items[i].overlap || sft.items[i].apply_ce) order.push_back(i);

    for (int epoch = 0; epoch < config.sft_epochs; ++epoch) {
        // Fisher-Yates with the run RNG for a seeded shuffle.
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[detail::draw_index(rng, i)]);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t off = 0; off < order.size();
             off += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t hi =
                std::min(order.size(), off + static_cast<std::size_t>(config.batch_size));
            double loss = 0.0;
            std::vector<double> gs(kFeatureDim, 0.0), gp(priv_dim, 0.0);
            const double n = static_cast<double>(hi - off);
            for (std::size_t k = off; k < hi; ++k) {
                const TrainingItem& item = sft.items[order[k]];
                double z = dot(result.params.theta_shared, item.base.data(), kFeatureDim);
                if (item.overlap)
                    z += dot(result.params.theta_priv, item.privileged.data(), priv_dim);
                const double p = sigmoid(z);
                loss += detail::binary_ce(item.label, p) / n;
                const double g = (p - item.label) / n;
                for (std::size_t i = 0; i < kFeatureDim; ++i) gs[i] += g * item.base[i];
                if (item.overlap)
                    for (std::size_t i = 0; i < priv_dim; ++i)
                        gp[i] += g * item.privileged[i];
            }
            for (std::size_t i = 0; i < kFeatureDim; ++i)
                result.params.theta_shared[i] -= config.learning_rate * gs[i];
            for (std::size_t i = 0; i < priv_dim; ++i)
                result.params.theta_priv[i] -= config.learning_rate * gp[i];
            epoch_loss += loss;
            ++batches;
        }
        auto [hp, hf] = detail::evaluate_student(held_out, stream, library, budget,
                                                 result.params);
        result.log.push_back({epoch, "sft",
                              batches ? epoch_loss / static_cast<double>(batches) : 0.0,
                              hp, hf});
    }

    // ----- Stage 2: OPSD (combined loss, shared theta only) -----
    std::int64_t version = 0;
    const std::size_t traj_batch =
        std::max<std::size_t>(1, static_cast<std::size_t>(config.batch_size) / 4);
    const std::size_t steps_per_epoch =
        std::max<std::size_t>(1, train_set.size() / traj_batch);
    for (int epoch = 0; epoch < config.opsd_epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (std::size_t step = 0; step < steps_per_epoch; ++step) {
            ++version;
            detail::Materialized rollout;
            for (std::size_t b = 0; b < traj_batch; ++b) {
                const Trajectory* traj =
                    train_set[detail::draw_index(rng, train_set.size())];
                detail::materialize_rollout(*traj, stream, library, budget, scam_types,
                                            config, result.params, version, true, rollout);
            }
            result.rollout_versions.emplace_back(version, rollout.version_tag);
            if (rollout.items.empty()) continue;
            TrainingBatch batch{std::move(rollout.items)};
            const LossResult lr = combined_loss(batch, result.params, config);
            for (std::size_t i = 0; i < kFeatureDim; ++i)
                result.params.theta_shared[i] -= config.learning_rate * lr.grad_shared[i];
            epoch_loss += lr.loss;
        }
        auto [hp, hf] = detail::evaluate_student(held_out, stream, library, budget,
                                                 result.params);
        result.log.push_back({epoch, "opsd",
                              epoch_loss / static_cast<double>(steps_per_epoch), hp, hf});
    }

    library.set_frozen(was_frozen);
    return result;
}

inline std::string training_log_csv(const std::vector<TrainingLogRow>& rows) {
    std::ostringstream out;
    out << "epoch,stage,loss,par,far\n";
    for (const auto& r : rows)
        out << r.epoch << ',' << r.stage << ',' << r.loss << ',' << r.par << ',' << r.far
            << '\n';
    return out.str();
}

}  // namespace scamwatch
