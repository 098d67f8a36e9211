#pragma once

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "iscreen/core.hpp"
#include "iscreen/csv.hpp"
#include "iscreen/errors.hpp"
#include "iscreen/pipeline.hpp"
#include "iscreen/report.hpp"
#include "iscreen/sim.hpp"
#include "iscreen/verify.hpp"
#include "iscreen/version.hpp"

namespace iscreen {
namespace cli {

// Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumerical = 4;

namespace detail {

struct AlgorithmFlags {
    std::string preset;
    int scr = 0;
    int sel = 0;
    int a_size = 0;
    std::string a_schedule;
    int max_iters = 0;
    double lambda = 0.0;
    double scad_a = 3.7;
    std::string penalty_kind = "lasso";
    std::string standardize = "on";
    std::uint64_t seed = 0;

    bool has_preset = false;
    bool has_scr = false, has_sel = false;
    bool has_a_size = false, has_a_schedule = false;
    bool has_max_iters = false;
    bool has_lambda = false;
};

inline void add_algorithm_flags(CLI::App& cmd, AlgorithmFlags& f) {
    cmd.add_option("--preset", f.preset, "named algorithm: isis|van-isis|van-isis-r|fr|sis")
        ->check(CLI::IsMember({"isis", "van-isis", "van-isis-r", "fr", "sis"}));
    cmd.add_option("--scr", f.scr, "screening criterion 1|2|3")->check(CLI::Range(1, 3));
    cmd.add_option("--sel", f.sel, "selection criterion 1|2|3")->check(CLI::Range(1, 3));
    cmd.add_option("--a-size", f.a_size, "constant per-step screen size a_k");
    cmd.add_option("--a-schedule", f.a_schedule, "comma-separated explicit a_k list");
    cmd.add_option("--max-iters", f.max_iters, "maximum iterations kappa");
    cmd.add_option("--lambda", f.lambda, "penalty tuning parameter lambda_n");
    cmd.add_option("--scad-a", f.scad_a, "SCAD a parameter (default 3.7)");
    cmd.add_option("--penalty", f.penalty_kind, "penalty kind: lasso|scad")
        ->check(CLI::IsMember({"lasso", "scad"}));
    cmd.add_option("--standardize", f.standardize, "standardize inputs: on|off (default on)")
        ->check(CLI::IsMember({"on", "off"}));
    cmd.add_option("--seed", f.seed, "random seed");
}

inline void capture_presence(const CLI::App& cmd, AlgorithmFlags& f) {
    f.has_preset = cmd.count("--preset") > 0;
    f.has_scr = cmd.count("--scr") > 0;
    f.has_sel = cmd.count("--sel") > 0;
    f.has_a_size = cmd.count("--a-size") > 0;
    f.has_a_schedule = cmd.count("--a-schedule") > 0;
    f.has_max_iters = cmd.count("--max-iters") > 0;
    f.has_lambda = cmd.count("--lambda") > 0;
}

inline Preset parse_preset(const std::string& s) {
    if (s == "isis") return Preset::ISIS;
    if (s == "van-isis") return Preset::VanISIS;
    if (s == "van-isis-r") return Preset::VanISIS_R;
    if (s == "fr") return Preset::FR;
    if (s == "sis") return Preset::SIS_once;
    throw InvalidConfig("unknown preset: " + s);
}

inline std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw InvalidConfig("bad schedule entry: '" + item + "'");
        }
    }
    if (out.empty()) throw InvalidConfig("empty schedule");
    return out;
}

struct ResolvedAlgorithm {
    std::optional<std::string> preset_name;
    AlgorithmConfig config;
};

/// Resolve the shared algorithm flags against a problem of size (n, p); all
/// inconsistencies here are usage errors.
inline ResolvedAlgorithm resolve_algorithm(const AlgorithmFlags& f, int n, int p) {
    if (f.has_preset && (f.has_scr || f.has_sel))
        throw InvalidConfig("--preset conflicts with --scr/--sel");
    if (!f.has_preset && (f.has_scr != f.has_sel))
        throw InvalidConfig("--scr and --sel must be given together");
    if (!f.has_preset && !f.has_scr)
        throw InvalidConfig("choose an algorithm: --preset or --scr/--sel");
    if (f.has_a_size && f.has_a_schedule)
        throw InvalidConfig("--a-size conflicts with --a-schedule");

    std::optional<PenaltySpec> penalty;
    auto make_penalty = [&]() {
        if (!f.has_lambda) throw InvalidConfig("missing --lambda for penalized selection");
        PenaltySpec spec;
        spec.kind = f.penalty_kind == "scad" ? PenaltyKind::Scad : PenaltyKind::Lasso;
        spec.lambda = f.lambda;
        spec.scad_a = f.scad_a;
        return spec;
    };

    ResolvedAlgorithm out;
    if (f.has_preset) {
        const Preset preset = parse_preset(f.preset);
        const bool penalized = preset == Preset::ISIS || preset == Preset::VanISIS ||
                               preset == Preset::VanISIS_R;
        if (penalized) penalty = make_penalty();
        else if (f.has_lambda)
            throw InvalidConfig("--lambda is meaningless for preset " + f.preset);
        std::optional<int> iters =
            f.has_max_iters ? std::optional<int>(f.max_iters) : std::nullopt;
        std::optional<int> a = f.has_a_size ? std::optional<int>(f.a_size) : std::nullopt;
        if (f.has_a_schedule)
            throw InvalidConfig("--a-schedule cannot be combined with --preset");
        out.preset_name = f.preset;
        out.config = resolve_preset(preset, n, p, penalty, iters, a);
        return out;
    }

    AlgorithmConfig cfg;
    cfg.screening = static_cast<Screening>(f.scr);
    cfg.selection = static_cast<Selection>(f.sel);
    if (cfg.selection != Selection::SEL1) {
        cfg.penalty = make_penalty();
        cfg.stop_on_fixed_point = cfg.selection == Selection::SEL3;
    } else if (f.has_lambda) {
        throw InvalidConfig("--lambda is meaningless with --sel 1");
    }
    const int kappa = f.has_max_iters ? f.max_iters : kDefaultMaxIters;
    if (f.has_a_schedule) {
        cfg.screen_sizes = ScreenSchedule::explicit_sizes(parse_int_list(f.a_schedule));
        cfg.max_iters = kappa;
    } else {
        const int a = f.has_a_size ? f.a_size : default_screen_size(n);
        auto [schedule, capped] = capped_schedule(a, kappa, p);
        cfg.screen_sizes = schedule;
        cfg.max_iters = capped;
    }
    cfg.validate(p);
    out.config = cfg;
    return out;
}

inline void emit(const std::string& text, const std::string& output_path, std::ostream& out) {
    if (output_path.empty())
        out << text << "\n";
    else
        write_text_atomic(output_path, text + "\n");
}

} // namespace detail

struct ScreenArgs {
    std::string input;
    std::string response;
    std::string output;
    std::string format = "json";
    bool no_header = false;
    detail::AlgorithmFlags algo;
};

inline int cmd_screen(const ScreenArgs& args, std::ostream& out, std::ostream& err) {
    const auto t0 = std::chrono::steady_clock::now();
    Dataset data;
    std::string hash;
    try {
        CsvOptions opts;
        opts.has_header = !args.no_header;
        if (!args.response.empty()) opts.response_column = args.response;
        data = load_csv(args.input, opts);
        hash = file_hash(args.input);
    } catch (const Error& e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    }

    RunReport report;
    try {
        const auto resolved = detail::resolve_algorithm(args.algo, data.n(), data.p());
        report.preset = resolved.preset_name;
        report.config = resolved.config;
        report.standardized = args.algo.standardize == "on";
        if (report.standardized) data = standardize(data).data;

        report.input_path = args.input;
        report.n = data.n();
        report.p = data.p();
        report.input_hash = hash;
        report.trajectory = run(data, resolved.config);
    } catch (const InvalidConfig& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    }

    if (report.trajectory.records.empty() &&
        report.trajectory.stop_reason == StopReason::RankDeficient) {
        err << "numerical failure: design is rank deficient at the first step\n";
        return kExitNumerical;
    }

    report.selected = report.trajectory.final_model();
    for (int j : report.selected)
        if (!data.column_names.empty())
            report.selected_names.push_back(data.column_names[static_cast<std::size_t>(j)]);
    for (const auto& rec : report.trajectory.records) report.rss_path.push_back(rec.rss);
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const std::string text = args.format == "csv" ? trajectory_csv(report.trajectory)
                                                  : to_json(report).dump(2);
    detail::emit(text, args.output, out);
    return kExitOk;
}

struct SimulateArgs {
    int n = 100;
    int p = 200;
    int t = 3;
    std::string cov = "identity";
    double beta_min = 1.0;
    bool has_beta_min = false;
    double noise_sd = 1.0;
    int reps = 10;
    bool adversarial = false;
    std::string success; // final|any, empty = per-selection default
    std::string output;
    detail::AlgorithmFlags algo;
};

namespace detail {

inline CovarianceSpec parse_cov(const std::string& s, int p) {
    if (s == "identity") return CovarianceSpec::identity(p);
    const auto colon = s.find(':');
    if (colon != std::string::npos) {
        const std::string family = s.substr(0, colon);
        double rho = 0.0;
        try {
            rho = std::stod(s.substr(colon + 1));
        } catch (const std::exception&) {
            throw InvalidConfig("bad covariance parameter in '" + s + "'");
        }
        if (family == "ar1") return CovarianceSpec::ar1(p, rho);
        if (family == "cs") return CovarianceSpec::compound_symmetry(p, rho);
    }
    throw InvalidConfig("unknown covariance spec: '" + s + "'");
}

} // namespace detail

inline int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
    ExperimentSpec spec;
    AlgorithmConfig resolved;
    try {
        spec.n = args.n;
        spec.p = args.p;
        spec.t = args.t;
        spec.covariance = detail::parse_cov(args.cov, args.p);
        spec.beta_min = args.beta_min;
        spec.noise_sd = args.noise_sd;
        spec.replications = args.reps;
        spec.adversarial = args.adversarial;
        if (args.adversarial) {
            if (spec.covariance.family != CovarianceSpec::Family::CompoundSymmetry &&
                spec.covariance.family != CovarianceSpec::Family::Identity)
                throw InvalidConfig("--adversarial takes --cov cs:RHO (or the 0.5 default)");
            spec.adversarial_rho =
                spec.covariance.family == CovarianceSpec::Family::CompoundSymmetry
                    ? spec.covariance.rho
                    : 0.5;
            if (args.has_beta_min) spec.adversarial_beta_mag = args.beta_min;
        }
        if (!args.success.empty()) {
            if (args.success == "final") spec.success_mode = SuccessMode::Final;
            else if (args.success == "any") spec.success_mode = SuccessMode::Any;
            else throw InvalidConfig("--success must be final or any");
        }
        spec.standardize_data = args.algo.standardize == "on";
        spec.seed = args.algo.seed;

        const auto algo = detail::resolve_algorithm(args.algo, args.n, args.p);
        if (algo.preset_name) spec.preset = detail::parse_preset(*algo.preset_name);
        spec.algorithm = algo.config;
        resolved = algo.config;
        spec.validate();
    } catch (const InvalidConfig& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        const ExperimentReport report = run_experiment(spec);
        detail::emit(to_json(report, spec, resolved).dump(2), args.output, out);
    } catch (const Error& e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}

struct VerifyArgs {
    int instances = 50;
    std::uint64_t seed = 0;
};

/// Shared rendering of verify-suite outcomes: human table to err, JSON summary
/// to out, exit 0 iff every suite passed.
inline int render_verify_results(const std::vector<verify::SuiteResult>& results,
                                 std::ostream& out, std::ostream& err) {
    bool all_pass = true;
    char line[160];
    err << "suite                 instances  failures  max_rel_error  status\n";
    json summary;
    summary["kind"] = "verify_report";
    summary["schema_version"] = kReportSchemaVersion;
    summary["tool_version"] = kToolVersion;
    summary["suites"] = json::array();
    for (const auto& r : results) {
        std::snprintf(line, sizeof(line), "%-21s %-10d %-9d %-14.3e %s\n", r.name.c_str(),
                      r.instances, r.failures, r.max_rel_error,
                      r.pass() ? "PASS" : "FAIL");
        err << line;
        if (!r.pass()) all_pass = false;
        summary["suites"].push_back({{"name", r.name},
                                     {"instances", r.instances},
                                     {"failures", r.failures},
                                     {"max_rel_error", r.max_rel_error},
                                     {"pass", r.pass()}});
    }
    summary["all_pass"] = all_pass;
    out << summary.dump(2) << "\n";
    return all_pass ? kExitOk : 1;
}

inline int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err) {
    if (args.instances < 1) {
        err << "usage error: --instances must be >= 1\n";
        return kExitUsage;
    }
    verify::VerifyOptions opts;
    opts.instances = args.instances;
    opts.seed = args.seed;
    return render_verify_results(verify::run_all_suites(opts), out, err);
}

/// Full CLI entry point; the binary in tools/ is a thin wrapper so tests can
/// drive the interface in-process.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"iterative variable screening for high-dimensional linear models"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    ScreenArgs screen_args;
    auto* screen_cmd = app.add_subcommand("screen", "run a screening algorithm on a CSV file");
    screen_cmd->add_option("--input", screen_args.input, "input CSV path")->required();
    screen_cmd->add_option("--response", screen_args.response,
                           "response column name (default: last column)");
    screen_cmd->add_flag("--no-header", screen_args.no_header, "input has no header row");
    screen_cmd->add_option("--output", screen_args.output, "output path (default stdout)");
    screen_cmd->add_option("--format", screen_args.format, "output format: json|csv")
        ->check(CLI::IsMember({"json", "csv"}));
    detail::add_algorithm_flags(*screen_cmd, screen_args.algo);

    SimulateArgs sim_args;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte-Carlo sure-screening experiment");
    sim_cmd->add_option("--n", sim_args.n, "sample size")->required();
    sim_cmd->add_option("--p", sim_args.p, "predictor count")->required();
    sim_cmd->add_option("--t", sim_args.t, "true support size");
    sim_cmd->add_option("--cov", sim_args.cov, "covariance: identity|ar1:RHO|cs:RHO");
    sim_cmd->add_option("--beta-min", sim_args.beta_min, "true coefficient magnitude");
    sim_cmd->add_option("--noise-sd", sim_args.noise_sd, "noise standard deviation");
    sim_cmd->add_option("--reps", sim_args.reps, "replication count");
    sim_cmd->add_flag("--adversarial", sim_args.adversarial,
                      "marginally-hidden-predictor construction");
    sim_cmd->add_option("--success", sim_args.success, "success event: final|any")
        ->check(CLI::IsMember({"final", "any"}));
    sim_cmd->add_option("--output", sim_args.output, "output path (default stdout)");
    detail::add_algorithm_flags(*sim_cmd, sim_args.algo);

    VerifyArgs verify_args;
    auto* verify_cmd = app.add_subcommand("verify", "run the oracle agreement suites");
    verify_cmd->add_option("--instances", verify_args.instances, "instances per suite");
    verify_cmd->add_option("--seed", verify_args.seed, "random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (screen_cmd->parsed()) {
        detail::capture_presence(*screen_cmd, screen_args.algo);
        return cmd_screen(screen_args, out, err);
    }
    if (sim_cmd->parsed()) {
        detail::capture_presence(*sim_cmd, sim_args.algo);
        sim_args.has_beta_min = sim_cmd->count("--beta-min") > 0;
        return cmd_simulate(sim_args, out, err);
    }
    if (verify_cmd->parsed()) return cmd_verify(verify_args, out, err);
    return kExitUsage;
}

} // namespace cli
} // namespace iscreen
