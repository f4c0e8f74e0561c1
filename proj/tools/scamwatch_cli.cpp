// scamwatch CLI: synth, validate, run, calibrate, train, report.
//
// One JSON config file (--config) drives every command; command-line
// flags override individual values. Unknown config keys are rejected.
// Exit codes: 0 success, 1 metric/validation failure under strict
// flags, 2 input error, 3 external-service error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scamwatch/assessor.hpp"
#include "scamwatch/distill.hpp"
#include "scamwatch/remote.hpp"
#include "scamwatch/runner.hpp"
#include "scamwatch/synth.hpp"

using namespace scamwatch;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;       // metric/validation failure under strict flags
constexpr int kExitInputError = 2;    // missing/malformed inputs
constexpr int kExitExternalError = 3; // remote service failures

struct CliError : std::runtime_error {
    int code;
    CliError(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

struct Settings {
    StreamConfig stream;
    // assessor
    std::string assessor_kind = "rule";
    std::string params_path;
    std::string endpoint;  // host:port[/path]
    // retrieval
    std::int64_t budget = 5;
    RetrievalWeights weights;
    // skills
    std::string skills_in, skills_out;
    bool frozen = false;
    bool evolve = false;
    bool evolve_on_ground_truth = false;
    // alert
    double tau = 0.5;
    std::string calibration_path;  // when set, tau is read from this file
    double far_budget = 0.05;
    // distill + synth
    DistillConfig distill;
    SynthConfig synth;
    // io
    std::string dataset, manifest, predictions, report_path;
    std::string normal_pool, scam_pool;
    std::string out_params, out_log, out_calibration;
    std::string per_type_csv, memory_csv;
    // execution
    int parallel = 1;
    bool strict = false;
    std::vector<std::string> scam_types;  // optional override of manifest types
};

void reject_unknown(const json& j, const std::vector<std::string>& allowed,
                    const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw CliError(kExitInputError,
                           "unknown config key '" + key + "' in " + where);
    }
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void load_config(const std::string& path, Settings& s) {
    std::ifstream in(path);
    if (!in) throw CliError(kExitInputError, "config file not found: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw CliError(kExitInputError, std::string("config parse error: ") + e.what());
    }
    reject_unknown(j, {"stream", "assessor", "retrieval", "skills", "alert", "distill",
                       "synth", "io", "parallel", "strict", "scam_types"},
                   "config root");

    if (j.contains("stream")) {
        const auto& c = j.at("stream");
        reject_unknown(c, {"window_size", "stride"}, "stream");
        maybe(c, "window_size", s.stream.window_size);
        maybe(c, "stride", s.stream.stride);
    }
    if (j.contains("assessor")) {
        const auto& c = j.at("assessor");
        reject_unknown(c, {"kind", "params", "endpoint"}, "assessor");
        maybe(c, "kind", s.assessor_kind);
        maybe(c, "params", s.params_path);
        maybe(c, "endpoint", s.endpoint);
    }
    if (j.contains("retrieval")) {
        const auto& c = j.at("retrieval");
        reject_unknown(c, {"budget", "keyword", "sequence", "recency", "recency_horizon"},
                       "retrieval");
        maybe(c, "budget", s.budget);
        maybe(c, "keyword", s.weights.keyword);
        maybe(c, "sequence", s.weights.sequence);
        maybe(c, "recency", s.weights.recency);
        maybe(c, "recency_horizon", s.weights.recency_horizon);
    }
    if (j.contains("skills")) {
        const auto& c = j.at("skills");
        reject_unknown(c, {"library", "save", "frozen", "evolve", "evolve_on_ground_truth"},
                       "skills");
        maybe(c, "library", s.skills_in);
        maybe(c, "save", s.skills_out);
        maybe(c, "frozen", s.frozen);
        maybe(c, "evolve", s.evolve);
        maybe(c, "evolve_on_ground_truth", s.evolve_on_ground_truth);
    }
    if (j.contains("alert")) {
        const auto& c = j.at("alert");
        reject_unknown(c, {"tau", "calibration", "far_budget"}, "alert");
        if (c.contains("tau")) {
            if (c.at("tau").is_string()) {
                if (c.at("tau").get<std::string>() != "calibrated")
                    throw CliError(kExitInputError,
                                   "alert.tau must be a number or \"calibrated\"");
            } else {
                s.tau = c.at("tau").get<double>();
            }
        }
        maybe(c, "calibration", s.calibration_path);
        maybe(c, "far_budget", s.far_budget);
    }
    if (j.contains("distill")) {
        const auto& c = j.at("distill");
        reject_unknown(c, {"lambda", "learning_rate", "sft_epochs", "opsd_epochs",
                           "batch_size", "seed", "coverage_threshold",
                           "evolve_during_rollouts"},
                       "distill");
        maybe(c, "lambda", s.distill.lambda);
        maybe(c, "learning_rate", s.distill.learning_rate);
        maybe(c, "sft_epochs", s.distill.sft_epochs);
        maybe(c, "opsd_epochs", s.distill.opsd_epochs);
        maybe(c, "batch_size", s.distill.batch_size);
        maybe(c, "seed", s.distill.seed);
        maybe(c, "coverage_threshold", s.distill.coverage_threshold);
        maybe(c, "evolve_during_rollouts", s.distill.evolve_during_rollouts);
    }
    if (j.contains("synth")) {
        const auto& c = j.at("synth");
        reject_unknown(c, {"target_length", "insertion_mode", "max_segments", "seed",
                           "train_ratio", "validation_ratio", "test_ratio",
                           "n_trajectories", "scam_ratio", "min_length", "max_length"},
                       "synth");
        maybe(c, "target_length", s.synth.target_length);
        if (c.contains("insertion_mode")) {
            const auto mode = c.at("insertion_mode").get<std::string>();
            if (mode == "contiguous") s.synth.insertion_mode = InsertionMode::Contiguous;
            else if (mode == "multi_segment")
                s.synth.insertion_mode = InsertionMode::MultiSegment;
            else
                throw CliError(kExitInputError, "unknown insertion_mode: " + mode);
        }
        maybe(c, "max_segments", s.synth.max_segments);
        maybe(c, "seed", s.synth.seed);
        maybe(c, "train_ratio", s.synth.train_ratio);
        maybe(c, "validation_ratio", s.synth.validation_ratio);
        maybe(c, "test_ratio", s.synth.test_ratio);
        maybe(c, "n_trajectories", s.synth.n_trajectories);
        maybe(c, "scam_ratio", s.synth.scam_ratio);
        maybe(c, "min_length", s.synth.min_length);
        maybe(c, "max_length", s.synth.max_length);
    }
    if (j.contains("io")) {
        const auto& c = j.at("io");
        reject_unknown(c, {"dataset", "manifest", "predictions", "report", "normal_pool",
                           "scam_pool", "params_out", "log_out", "calibration_out",
                           "per_type_csv", "memory_csv"},
                       "io");
        maybe(c, "dataset", s.dataset);
        maybe(c, "manifest", s.manifest);
        maybe(c, "predictions", s.predictions);
        maybe(c, "report", s.report_path);
        maybe(c, "normal_pool", s.normal_pool);
        maybe(c, "scam_pool", s.scam_pool);
        maybe(c, "params_out", s.out_params);
        maybe(c, "log_out", s.out_log);
        maybe(c, "calibration_out", s.out_calibration);
        maybe(c, "per_type_csv", s.per_type_csv);
        maybe(c, "memory_csv", s.memory_csv);
    }
    maybe(j, "parallel", s.parallel);
    maybe(j, "strict", s.strict);
    maybe(j, "scam_types", s.scam_types);
}

// ----- shared loaders -----

std::string slurp(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CliError(kExitInputError, std::string(what) + " not found: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spill(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CliError(kExitInputError, "cannot write " + path);
    out << content;
}

std::vector<Trajectory> load_dataset(const Settings& s) {
    if (s.dataset.empty()) throw CliError(kExitInputError, "no dataset path given");
    std::istringstream in(slurp(s.dataset, "dataset"));
    auto trajs = trajectories_from_jsonl(in);
    if (trajs.empty()) throw CliError(kExitInputError, "dataset is empty: " + s.dataset);
    return trajs;
}

json load_manifest(const Settings& s) {
    if (s.manifest.empty()) throw CliError(kExitInputError, "no manifest path given");
    return json::parse(slurp(s.manifest, "manifest"));
}

std::vector<std::string> resolve_scam_types(const Settings& s,
                                            const std::vector<Trajectory>& dataset) {
    if (!s.scam_types.empty()) return s.scam_types;
    if (!s.manifest.empty()) {
        const json m = load_manifest(s);
        if (m.contains("scam_types"))
            return m.at("scam_types").get<std::vector<std::string>>();
    }
    std::set<std::string> types;
    for (const auto& t : dataset)
        if (t.scam_segment) types.insert(t.scam_segment->scam_type);
    return {types.begin(), types.end()};
}

SkillLibrary load_skills(const Settings& s, const std::vector<std::string>& types) {
    SkillLibrary lib;
    if (!s.skills_in.empty())
        lib = SkillLibrary::from_json(json::parse(slurp(s.skills_in, "skill library")));
    else
        lib = seed_library(types);
    if (s.frozen || s.parallel > 1) lib.set_frozen(true);
    return lib;
}

EndpointConfig parse_endpoint(const std::string& spec) {
    // host:port[/path]
    EndpointConfig ep;
    const auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw CliError(kExitInputError, "endpoint must be host:port[/path]: " + spec);
    ep.host = spec.substr(0, colon);
    const auto slash = spec.find('/', colon);
    const std::string port = slash == std::string::npos
                                 ? spec.substr(colon + 1)
                                 : spec.substr(colon + 1, slash - colon - 1);
    try {
        ep.port = std::stoi(port);
    } catch (const std::exception&) {
        throw CliError(kExitInputError, "bad endpoint port: " + spec);
    }
    if (slash != std::string::npos) ep.path = spec.substr(slash);
    return ep;
}

AssessorFn make_assessor(const Settings& s) {
    if (s.assessor_kind == "rule") {
        return [](const AugmentedWindow& aug, const SkillLibrary& lib) {
            return assess_rule(aug, lib);
        };
    }
    if (s.assessor_kind == "logistic") {
        if (s.params_path.empty())
            throw CliError(kExitInputError, "logistic assessor needs assessor.params");
        const LogisticParams params =
            params_from_json(json::parse(slurp(s.params_path, "parameter file")));
        const std::int64_t budget = s.budget;
        return [params, budget](const AugmentedWindow& aug, const SkillLibrary& lib) {
            return assess_logistic(aug, params, lib, budget);
        };
    }
    if (s.assessor_kind == "remote") {
        if (s.endpoint.empty())
            throw CliError(kExitInputError, "remote assessor needs assessor.endpoint");
        const EndpointConfig ep = parse_endpoint(s.endpoint);
        return [ep](const AugmentedWindow& aug, const SkillLibrary& lib) {
            Assessment a = assess_remote(render_context(aug, lib), ep);
            a.window_end = aug.window.end_index;
            return a;
        };
    }
    throw CliError(kExitInputError, "unknown assessor kind: " + s.assessor_kind);
}

double resolve_tau(const Settings& s) {
    if (s.calibration_path.empty()) return s.tau;
    const auto cal =
        calibration_from_json(json::parse(slurp(s.calibration_path, "calibration file")));
    return cal.tau;
}

// ----- commands -----

int cmd_synth(const Settings& s, bool allow_violations, bool builtin_pools) {
    std::vector<ShortTrace> normal, scam;
    if (builtin_pools) {
        const std::vector<std::string> types =
            s.scam_types.empty()
                ? std::vector<std::string>{"fake_online_investment_financial_scam",
                                           "fake_part_time_job_scam", "loan_scam"}
                : s.scam_types;
        normal = generate_normal_pool(16, s.synth.seed);
        scam = generate_scam_pool(types, 4, s.synth.seed);
    } else {
        if (s.normal_pool.empty() || s.scam_pool.empty() ||
            !std::filesystem::exists(s.normal_pool) ||
            !std::filesystem::exists(s.scam_pool))
            throw CliError(kExitInputError, "pool-not-found");
        for (const auto& line : parse_jsonl_lines(slurp(s.normal_pool, "normal pool")))
            normal.push_back(short_trace_from_json(line));
        for (const auto& line : parse_jsonl_lines(slurp(s.scam_pool, "scam pool")))
            scam.push_back(short_trace_from_json(line));
    }

    auto out = synthesize(normal, scam, s.synth);
    const std::string jsonl = trajectories_to_jsonl(out.trajectories);
    spill(s.dataset.empty() ? "dataset.jsonl" : s.dataset, jsonl);
    spill(s.manifest.empty() ? "manifest.json" : s.manifest, out.manifest.dump(2) + "\n");

    const auto violations = validate_dataset(parse_jsonl_lines(jsonl), out.manifest);
    for (const auto& v : violations)
        std::fprintf(stderr, "violation [%s] %s: %s\n", v.check.c_str(),
                     v.trajectory_id.c_str(), v.detail.c_str());
    std::printf("synthesized %zu trajectories (%lld scam), %zu violations\n",
                out.trajectories.size(),
                static_cast<long long>(out.manifest.at("n_scam").get<std::int64_t>()),
                violations.size());
    if (!violations.empty() && !allow_violations) return kExitFailure;
    return kExitOk;
}

int cmd_validate(const Settings& s, bool allow_violations) {
    const auto lines = parse_jsonl_lines(slurp(s.dataset, "dataset"));
    const json manifest = load_manifest(s);
    const auto violations = validate_dataset(lines, manifest);
    for (const auto& v : violations)
        std::printf("violation [%s] %s: %s\n", v.check.c_str(), v.trajectory_id.c_str(),
                    v.detail.c_str());
    std::printf("%zu line(s) checked, %zu violation(s)\n", lines.size(), violations.size());
    if (!violations.empty() && !allow_violations) return kExitFailure;
    return kExitOk;
}

int cmd_run(const Settings& s) {
    if (s.parallel > 1 && s.evolve)
        throw CliError(kExitInputError, "evolution-requires-sequential");
    auto dataset = load_dataset(s);
    const auto types = resolve_scam_types(s, dataset);
    SkillLibrary lib = load_skills(s, types);
    const AssessorFn assess = make_assessor(s);

    RunOptions opt;
    opt.stream = s.stream;
    opt.alert.tau = resolve_tau(s);
    opt.retrieval_budget = s.budget;
    opt.weights = s.weights;
    opt.evolve = s.evolve && !lib.frozen();
    opt.evolve_on_ground_truth = s.evolve_on_ground_truth;
    opt.parallel = s.parallel;

    auto result = run_dataset(dataset, lib, assess, opt);
    spill(s.predictions.empty() ? "predictions.jsonl" : s.predictions,
          predictions_to_jsonl(result.predictions));
    spill(s.report_path.empty() ? "report.json" : s.report_path,
          report_to_json(result.report).dump(2) + "\n");
    if (!s.skills_out.empty()) spill(s.skills_out, lib.to_json().dump(2) + "\n");

    std::printf("run: %zu trajectories, %zu windows, tau %.2f\n", dataset.size(),
                result.predictions.size(), opt.alert.tau);
    std::printf("HR %.4f  EDP %.4f  FAR %.4f  PAR %.4f  consistency %.4f\n",
                result.report.hr, result.report.edp_mean, result.report.far,
                result.report.par, result.report.consistency);
    if (s.strict && result.report.far > s.far_budget) {
        std::fprintf(stderr, "strict: FAR %.4f exceeds budget %.4f\n", result.report.far,
                     s.far_budget);
        return kExitFailure;
    }
    return kExitOk;
}

int cmd_calibrate(const Settings& s) {
    auto dataset = load_dataset(s);
    if (s.predictions.empty())
        throw CliError(kExitInputError, "calibrate needs io.predictions");
    auto rows = predictions_from_jsonl(slurp(s.predictions, "predictions"));

    std::vector<Trajectory> validation;
    for (const auto& t : dataset)
        if (t.split_tag == SplitTag::Validation) validation.push_back(t);
    if (validation.empty())
        throw CliError(kExitInputError, "dataset has no validation split");

    auto val = assessments_from_predictions(validation, rows, s.stream.window_size);
    auto result = calibrate_tau(val, s.far_budget);
    spill(s.out_calibration.empty() ? "calibration.json" : s.out_calibration,
          calibration_to_json(result).dump(2) + "\n");
    std::printf("calibrated tau %.2f (PAR %.4f at FAR budget %.2f) over %zu sweep points\n",
                result.tau, result.objective_value, s.far_budget, result.sweep.size());
    return kExitOk;
}

int cmd_train(const Settings& s) {
    auto dataset = load_dataset(s);
    const auto types = resolve_scam_types(s, dataset);
    if (types.empty()) throw CliError(kExitInputError, "no scam types in dataset");
    SkillLibrary lib = load_skills(s, types);
    auto result = train(dataset, lib, s.distill, types, s.stream, s.budget);
    spill(s.out_params.empty() ? "params.json" : s.out_params,
          params_to_json(result.params, types).dump(2) + "\n");
    spill(s.out_log.empty() ? "training_log.csv" : s.out_log,
          training_log_csv(result.log));
    if (!s.skills_out.empty()) spill(s.skills_out, lib.to_json().dump(2) + "\n");
    const auto& last = result.log.back();
    std::printf("trained %d SFT + %d OPSD epochs; final held-out PAR %.4f FAR %.4f\n",
                s.distill.sft_epochs, s.distill.opsd_epochs, last.par, last.far);
    return kExitOk;
}

int cmd_report(const Settings& s) {
    auto dataset = load_dataset(s);
    if (s.predictions.empty())
        throw CliError(kExitInputError, "report needs io.predictions");
    auto rows = predictions_from_jsonl(slurp(s.predictions, "predictions"));
    const auto types = resolve_scam_types(s, dataset);

    auto rep = compute_report(
        metric_inputs_from_predictions(dataset, rows, s.stream.window_size));
    spill(s.report_path.empty() ? "report.json" : s.report_path,
          report_to_json(rep).dump(2) + "\n");
    spill(s.per_type_csv.empty() ? "per_scam_type.csv" : s.per_type_csv,
          per_scam_type_csv(dataset, rows, types, s.stream.window_size));
    spill(s.memory_csv.empty() ? "memory_scaling.csv" : s.memory_csv,
          memory_scaling_csv(memory_scaling_bins(dataset, rows)));
    std::printf("report: HR %.4f  EDP %.4f  FAR %.4f  PAR %.4f  consistency %.4f\n",
                rep.hr, rep.edp_mean, rep.far, rep.par, rep.consistency);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "scamwatch: streaming scam-risk evaluation over app-event trajectories"};
    app.require_subcommand(1);

    std::string config_path;
    Settings s;
    std::optional<std::uint64_t> seed_flag;
    app.add_option("--config", config_path, "JSON config file (see README for schema)");
    app.add_option("--seed", seed_flag, "override synth and distill seeds");
    app.add_option("--parallel", s.parallel,
                   "worker threads; >1 freezes the skill library (default 1)");
    app.add_flag("--strict", s.strict,
                 "exit 1 when a metric/validation check fails (default off)");

    // Per-command flags (override config values).
    auto* synth_cmd = app.add_subcommand("synth", "synthesize a benchmark dataset");
    bool allow_violations = false, builtin_pools = false;
    synth_cmd->add_option("--normal-pool", s.normal_pool, "normal short-trace JSONL");
    synth_cmd->add_option("--scam-pool", s.scam_pool, "scam short-trace JSONL");
    synth_cmd->add_flag("--builtin-pools", builtin_pools,
                        "use the built-in synthetic pools instead of files");
    synth_cmd->add_option("--n", s.synth.n_trajectories, "trajectory count (default 50)");
    synth_cmd->add_option("--target-length", s.synth.target_length,
                          "events per trajectory (default 96)");
    synth_cmd->add_flag("--allow-violations", allow_violations,
                        "do not fail on validation violations");
    synth_cmd->add_option("--out", s.dataset, "output dataset JSONL (default dataset.jsonl)");
    synth_cmd->add_option("--manifest", s.manifest,
                          "output manifest path (default manifest.json)");

    auto* validate_cmd =
        app.add_subcommand("validate", "validate a dataset against its manifest");
    validate_cmd->add_option("--dataset", s.dataset, "dataset JSONL")->required();
    validate_cmd->add_option("--manifest", s.manifest, "manifest JSON")->required();
    validate_cmd->add_flag("--allow-violations", allow_violations,
                           "report violations but exit 0");

    auto* run_cmd = app.add_subcommand("run", "stream a dataset through an assessor");
    run_cmd->add_option("--dataset", s.dataset, "dataset JSONL");
    run_cmd->add_option("--manifest", s.manifest, "manifest JSON (scam types)");
    run_cmd->add_option("--assessor", s.assessor_kind, "rule | logistic | remote");
    run_cmd->add_option("--params", s.params_path, "logistic parameter file");
    run_cmd->add_option("--endpoint", s.endpoint, "remote assessor host:port[/path]");
    run_cmd->add_option("--tau", s.tau, "alert threshold (default 0.5)");
    run_cmd->add_option("--calibration", s.calibration_path,
                        "read tau from a calibration file");
    run_cmd->add_option("--budget", s.budget, "retrieval budget K (default 5)");
    run_cmd->add_flag("--evolve", s.evolve, "evolve skills during the run");
    run_cmd->add_flag("--evolve-on-ground-truth", s.evolve_on_ground_truth,
                      "gate evolution on true segment overlap");
    run_cmd->add_option("--skills", s.skills_in, "skill library JSON to load");
    run_cmd->add_option("--save-skills", s.skills_out, "write the library after the run");
    run_cmd->add_option("--out-predictions", s.predictions,
                        "predictions JSONL (default predictions.jsonl)");
    run_cmd->add_option("--out-report", s.report_path,
                        "report JSON (default report.json)");

    auto* calibrate_cmd =
        app.add_subcommand("calibrate", "sweep tau on the validation split");
    calibrate_cmd->add_option("--dataset", s.dataset, "dataset JSONL");
    calibrate_cmd->add_option("--predictions", s.predictions, "predictions JSONL");
    calibrate_cmd->add_option("--far-budget", s.far_budget,
                              "FAR constraint (default 0.05)");
    calibrate_cmd->add_option("--out", s.out_calibration,
                              "calibration JSON (default calibration.json)");

    auto* train_cmd = app.add_subcommand("train", "SFT + OPSD on the train split");
    train_cmd->add_option("--dataset", s.dataset, "dataset JSONL");
    train_cmd->add_option("--manifest", s.manifest, "manifest JSON (scam types)");
    train_cmd->add_option("--lambda", s.distill.lambda, "CE weight (default 0.1)");
    train_cmd->add_option("--lr", s.distill.learning_rate, "learning rate (default 0.5)");
    train_cmd->add_option("--sft-epochs", s.distill.sft_epochs, "SFT epochs (default 3)");
    train_cmd->add_option("--opsd-epochs", s.distill.opsd_epochs,
                          "OPSD epochs (default 2)");
    train_cmd->add_option("--out-params", s.out_params,
                          "parameter file (default params.json)");
    train_cmd->add_option("--out-log", s.out_log,
                          "training log CSV (default training_log.csv)");
    train_cmd->add_option("--save-skills", s.skills_out, "write the library after training");

    auto* report_cmd =
        app.add_subcommand("report", "rebuild metrics and breakdowns from predictions");
    report_cmd->add_option("--dataset", s.dataset, "dataset JSONL");
    report_cmd->add_option("--predictions", s.predictions, "predictions JSONL");
    report_cmd->add_option("--manifest", s.manifest, "manifest JSON (scam types)");
    report_cmd->add_option("--out-report", s.report_path,
                           "report JSON (default report.json)");
    report_cmd->add_option("--per-type-csv", s.per_type_csv,
                           "per-scam-type CSV (default per_scam_type.csv)");
    report_cmd->add_option("--memory-csv", s.memory_csv,
                           "memory-scaling CSV (default memory_scaling.csv)");

    // Two-phase parsing: load --config first so every command-line flag
    // (bound directly to Settings fields) overrides the file value.
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
    try {
        if (!config_path.empty()) load_config(config_path, s);
    } catch (const CliError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.code;
    }

    CLI11_PARSE(app, argc, argv);
    try {
        if (seed_flag) {
            s.synth.seed = *seed_flag;
            s.distill.seed = *seed_flag;
        }

        if (synth_cmd->parsed()) return cmd_synth(s, allow_violations, builtin_pools);
        if (validate_cmd->parsed()) return cmd_validate(s, allow_violations);
        if (run_cmd->parsed()) return cmd_run(s);
        if (calibrate_cmd->parsed()) return cmd_calibrate(s);
        if (train_cmd->parsed()) return cmd_train(s);
        if (report_cmd->parsed()) return cmd_report(s);
        std::fprintf(stderr, "no command given\n");
        return kExitInputError;
    } catch (const CliError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.code;
    } catch (const RemoteError& e) {
        std::fprintf(stderr, "remote error: %s\n", e.what());
        return kExitExternalError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInputError;
    }
}
