#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "iscreen/core.hpp"
#include "iscreen/errors.hpp"
#include "iscreen/sim.hpp"
#include "iscreen/version.hpp"

namespace iscreen {

using json = nlohmann::json;

/// FNV-1a over raw bytes, hex-encoded; used as the input fingerprint.
inline std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

inline std::string file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return fnv1a_hex(bytes);
}

struct RunReport {
    std::string input_path;
    int n = 0;
    int p = 0;
    std::string input_hash;
    std::optional<std::string> preset;
    AlgorithmConfig config;
    bool standardized = false;
    Trajectory trajectory;
    IndexSet selected;
    std::vector<std::string> selected_names;
    std::vector<double> rss_path;
    double wall_time_seconds = 0.0;

    friend bool operator==(const RunReport& a, const RunReport& b) {
        auto records_equal = [](const Trajectory& l, const Trajectory& r) {
            if (l.stop_reason != r.stop_reason ||
                l.standardized_inputs != r.standardized_inputs ||
                l.records.size() != r.records.size())
                return false;
            for (std::size_t i = 0; i < l.records.size(); ++i) {
                const auto& x = l.records[i];
                const auto& y = r.records[i];
                if (x.k != y.k || x.screened.indices() != y.screened.indices() ||
                    x.selected_new.indices() != y.selected_new.indices() ||
                    x.model.indices() != y.model.indices() || x.rss != y.rss ||
                    x.objective != y.objective || x.solver_converged != y.solver_converged)
                    return false;
            }
            return true;
        };
        return a.input_path == b.input_path && a.n == b.n && a.p == b.p &&
               a.input_hash == b.input_hash && a.preset == b.preset &&
               a.config == b.config && a.standardized == b.standardized &&
               records_equal(a.trajectory, b.trajectory) &&
               a.selected.indices() == b.selected.indices() &&
               a.selected_names == b.selected_names && a.rss_path == b.rss_path &&
               a.wall_time_seconds == b.wall_time_seconds;
    }
};

namespace detail {

inline json schedule_to_json(const ScreenSchedule& s) {
    json j;
    j["constant"] = s.constant;
    if (s.constant)
        j["size"] = s.const_size;
    else
        j["sizes"] = s.sizes;
    return j;
}

inline ScreenSchedule schedule_from_json(const json& j) {
    if (j.at("constant").get<bool>())
        return ScreenSchedule::constant_size(j.at("size").get<int>());
    return ScreenSchedule::explicit_sizes(j.at("sizes").get<std::vector<int>>());
}

inline json penalty_to_json(const PenaltySpec& p) {
    json j;
    j["kind"] = p.kind == PenaltyKind::Lasso ? "lasso" : "scad";
    j["lambda"] = p.lambda;
    j["scad_a"] = p.scad_a;
    return j;
}

inline PenaltySpec penalty_from_json(const json& j) {
    PenaltySpec p;
    p.kind = j.at("kind").get<std::string>() == "scad" ? PenaltyKind::Scad
                                                       : PenaltyKind::Lasso;
    p.lambda = j.at("lambda").get<double>();
    p.scad_a = j.at("scad_a").get<double>();
    return p;
}

inline json config_to_json(const AlgorithmConfig& c) {
    json j;
    j["screening"] = static_cast<int>(c.screening);
    j["selection"] = static_cast<int>(c.selection);
    j["screen_sizes"] = schedule_to_json(c.screen_sizes);
    j["max_iters"] = c.max_iters;
    j["penalty"] = c.penalty ? penalty_to_json(*c.penalty) : json(nullptr);
    j["stop_on_fixed_point"] = c.stop_on_fixed_point;
    return j;
}

inline AlgorithmConfig config_from_json(const json& j) {
    AlgorithmConfig c;
    c.screening = static_cast<Screening>(j.at("screening").get<int>());
    c.selection = static_cast<Selection>(j.at("selection").get<int>());
    c.screen_sizes = schedule_from_json(j.at("screen_sizes"));
    c.max_iters = j.at("max_iters").get<int>();
    if (!j.at("penalty").is_null()) c.penalty = penalty_from_json(j.at("penalty"));
    c.stop_on_fixed_point = j.at("stop_on_fixed_point").get<bool>();
    return c;
}

inline StopReason stop_reason_from_string(const std::string& s) {
    if (s == "max_iters") return StopReason::MaxIters;
    if (s == "fixed_point") return StopReason::FixedPoint;
    if (s == "all_columns_used") return StopReason::AllColumnsUsed;
    if (s == "rank_deficient") return StopReason::RankDeficient;
    throw Error("unknown stop reason: " + s);
}

inline json trajectory_to_json(const Trajectory& t) {
    json j;
    j["stop_reason"] = to_string(t.stop_reason);
    j["standardized_inputs"] = t.standardized_inputs;
    j["iterations"] = json::array();
    for (const auto& rec : t.records) {
        json r;
        r["k"] = rec.k;
        r["screened"] = rec.screened.indices();
        r["selected_new"] = rec.selected_new.indices();
        r["model"] = rec.model.indices();
        r["rss"] = rec.rss;
        r["objective"] = rec.objective;
        r["solver_converged"] = rec.solver_converged;
        j["iterations"].push_back(std::move(r));
    }
    return j;
}

inline Trajectory trajectory_from_json(const json& j) {
    Trajectory t;
    t.stop_reason = stop_reason_from_string(j.at("stop_reason").get<std::string>());
    t.standardized_inputs = j.at("standardized_inputs").get<bool>();
    for (const auto& r : j.at("iterations")) {
        IterationRecord rec;
        rec.k = r.at("k").get<int>();
        rec.screened = IndexSet(r.at("screened").get<std::vector<int>>());
        rec.selected_new = IndexSet(r.at("selected_new").get<std::vector<int>>());
        rec.model = IndexSet(r.at("model").get<std::vector<int>>());
        rec.rss = r.at("rss").get<double>();
        rec.objective = r.at("objective").get<double>();
        rec.solver_converged = r.at("solver_converged").get<bool>();
        t.records.push_back(std::move(rec));
    }
    return t;
}

} // namespace detail

inline json to_json(const RunReport& r) {
    json j;
    j["schema_version"] = kReportSchemaVersion;
    j["tool_version"] = kToolVersion;
    j["kind"] = "run_report";
    j["input"] = {{"path", r.input_path}, {"n", r.n}, {"p", r.p}, {"hash", r.input_hash}};
    j["preset"] = r.preset ? json(*r.preset) : json(nullptr);
    j["config"] = detail::config_to_json(r.config);
    j["standardized"] = r.standardized;
    j["trajectory"] = detail::trajectory_to_json(r.trajectory);
    j["selected"] = {{"indices", r.selected.indices()}, {"names", r.selected_names}};
    j["rss_path"] = r.rss_path;
    j["timing"] = {{"wall_time_seconds", r.wall_time_seconds}};
    return j;
}

inline RunReport run_report_from_json(const json& j) {
    RunReport r;
    r.input_path = j.at("input").at("path").get<std::string>();
    r.n = j.at("input").at("n").get<int>();
    r.p = j.at("input").at("p").get<int>();
    r.input_hash = j.at("input").at("hash").get<std::string>();
    if (!j.at("preset").is_null()) r.preset = j.at("preset").get<std::string>();
    r.config = detail::config_from_json(j.at("config"));
    r.standardized = j.at("standardized").get<bool>();
    r.trajectory = detail::trajectory_from_json(j.at("trajectory"));
    r.selected = IndexSet(j.at("selected").at("indices").get<std::vector<int>>());
    r.selected_names = j.at("selected").at("names").get<std::vector<std::string>>();
    r.rss_path = j.at("rss_path").get<std::vector<double>>();
    r.wall_time_seconds = j.at("timing").at("wall_time_seconds").get<double>();
    return r;
}

inline json to_json(const ExperimentSpec& s, const AlgorithmConfig& resolved) {
    json j;
    j["n"] = s.n;
    j["p"] = s.p;
    j["t"] = s.t;
    switch (s.covariance.family) {
        case CovarianceSpec::Family::Identity: j["covariance"] = "identity"; break;
        case CovarianceSpec::Family::AR1:
            j["covariance"] = "ar1:" + std::to_string(s.covariance.rho);
            break;
        case CovarianceSpec::Family::CompoundSymmetry:
            j["covariance"] = "cs:" + std::to_string(s.covariance.rho);
            break;
        case CovarianceSpec::Family::Custom: j["covariance"] = "custom"; break;
    }
    j["beta_min"] = s.beta_min;
    j["noise_sd"] = s.noise_sd;
    j["replications"] = s.replications;
    j["adversarial"] = s.adversarial;
    if (s.adversarial) {
        j["adversarial_rho"] = s.adversarial_rho;
        j["adversarial_beta_mag"] = s.adversarial_beta_mag;
    }
    j["standardize"] = s.standardize_data;
    j["seed"] = s.seed;
    j["preset"] = s.preset ? json(to_string(*s.preset)) : json(nullptr);
    j["config"] = detail::config_to_json(resolved);
    const SuccessMode mode = s.success_mode.value_or(
        resolved.selection == Selection::SEL3 ? SuccessMode::Any : SuccessMode::Final);
    j["success_mode"] = mode == SuccessMode::Final ? "final" : "any";
    return j;
}

inline json to_json(const ExperimentReport& r, const ExperimentSpec& spec,
                    const AlgorithmConfig& resolved) {
    json j;
    j["schema_version"] = kReportSchemaVersion;
    j["tool_version"] = kToolVersion;
    j["kind"] = "experiment_report";
    j["spec"] = to_json(spec, resolved);
    j["replications"] = r.replications;
    j["success_count"] = r.success_count;
    j["success_rate"] = r.success_rate;
    j["mean_iterations_to_coverage"] = r.mean_iterations_to_coverage;
    j["median_iterations_to_coverage"] = r.median_iterations_to_coverage;
    j["mean_final_model_size"] = r.mean_final_model_size;
    j["solver_warnings"] = r.solver_warnings;
    j["replication_errors"] = r.replication_errors;
    j["records"] = json::array();
    for (const auto& rec : r.records) {
        j["records"].push_back({{"replication", rec.replication},
                                {"success", rec.success},
                                {"first_coverage_step", rec.first_coverage_step},
                                {"final_model_size", rec.final_model_size},
                                {"stop_reason", to_string(rec.stop_reason)},
                                {"solver_warning", rec.solver_warning},
                                {"iterations", rec.iterations},
                                {"error", rec.error}});
    }
    j["timing"] = {{"wall_time_seconds", r.wall_time_seconds}};
    return j;
}

/// Atomic write: temp file in the same directory, then rename.
inline void write_text_atomic(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error("cannot open file for writing: " + tmp);
        out << text;
        if (!out) throw Error("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw Error("rename failed: " + path);
}

/// CSV rendering of the trajectory table only: k, model, rss.
inline std::string trajectory_csv(const Trajectory& t) {
    std::string out = "k,model,rss\n";
    char buf[64];
    for (const auto& rec : t.records) {
        out += std::to_string(rec.k) + ",\"";
        for (int i = 0; i < rec.model.size(); ++i) {
            if (i) out += ";";
            out += std::to_string(rec.model[i]);
        }
        std::snprintf(buf, sizeof(buf), "%.17g", rec.rss);
        out += std::string("\",") + buf + "\n";
    }
    return out;
}

} // namespace iscreen
