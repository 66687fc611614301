// File formats: the subject-level dataset CSV (`time,status,group`), JSON
// scenario / design configuration, tidy CSV table writers, and the run
// manifest that makes every command reproducible.
#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rmtl/simulation.hpp"

namespace rmtl {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Dataset CSV.
// ---------------------------------------------------------------------------

// Subject-level data in group order of first appearance.
struct GroupedDataset {
    std::vector<std::string> labels;
    std::vector<SurvivalData> groups;

    const SurvivalData& group(const std::string& label) const {
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == label) return groups[i];
        throw input_error("dataset: unknown group label '" + label + "'");
    }
};

namespace detail {

inline std::string strip(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

inline GroupedDataset read_dataset_csv(std::istream& in) {
    GroupedDataset ds;
    std::string line;
    long line_no = 0;
    if (!std::getline(in, line))
        throw input_error("dataset CSV: empty input");
    ++line_no;
    if (detail::strip(line) != "time,status,group")
        throw input_error("dataset CSV line 1: header must be 'time,status,group'");

    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = detail::strip(line);
        if (stripped.empty()) continue;
        std::istringstream ss(stripped);
        std::string time_s, status_s, group_s;
        if (!std::getline(ss, time_s, ',') || !std::getline(ss, status_s, ',') ||
            !std::getline(ss, group_s))
            throw input_error("dataset CSV line " + std::to_string(line_no) +
                              ": expected 'time,status,group'");
        Observation obs;
        try {
            std::size_t pos = 0;
            obs.time = std::stod(detail::strip(time_s), &pos);
            if (pos != detail::strip(time_s).size()) throw std::invalid_argument("");
            obs.status = std::stoi(detail::strip(status_s), &pos);
        } catch (const std::exception&) {
            throw input_error("dataset CSV line " + std::to_string(line_no) +
                              ": malformed numeric field");
        }
        if (obs.time < 0.0)
            throw input_error("dataset CSV line " + std::to_string(line_no) +
                              ": time must be >= 0");
        if (obs.status < 0 || obs.status > 2)
            throw input_error("dataset CSV line " + std::to_string(line_no) +
                              ": status must be 0, 1 or 2");
        const std::string label = detail::strip(group_s);
        if (label.empty())
            throw input_error("dataset CSV line " + std::to_string(line_no) +
                              ": empty group label");
        std::size_t gi = 0;
        for (; gi < ds.labels.size(); ++gi)
            if (ds.labels[gi] == label) break;
        if (gi == ds.labels.size()) {
            ds.labels.push_back(label);
            ds.groups.emplace_back();
        }
        ds.groups[gi].push_back(obs);
    }
    if (ds.labels.empty()) throw input_error("dataset CSV: no data rows");
    return ds;
}

inline GroupedDataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open dataset file: " + path);
    return read_dataset_csv(in);
}

inline void write_dataset_csv(std::ostream& out, const GroupedDataset& ds) {
    out << "time,status,group\n";
    char buf[64];
    for (std::size_t gi = 0; gi < ds.labels.size(); ++gi) {
        for (const auto& obs : ds.groups[gi]) {
            std::snprintf(buf, sizeof(buf), "%.10g", obs.time);
            out << buf << ',' << obs.status << ',' << ds.labels[gi] << '\n';
        }
    }
}

// ---------------------------------------------------------------------------
// Numeric formatting shared by all CSV emitters (stable across runs).
// ---------------------------------------------------------------------------

inline std::string csv_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// JSON configuration.
// ---------------------------------------------------------------------------

inline CauseSpecificParams params_from_json(const json& j) {
    const std::string fam = j.value("family", "weibull");
    if (fam == "weibull")
        return CauseSpecificParams::weibull(j.at("shape").get<double>(),
                                            j.at("rate").get<double>());
    if (fam == "gompertz")
        return CauseSpecificParams::gompertz(j.at("rate").get<double>(),
                                             j.at("shape").get<double>());
    if (fam == "log_normal" || fam == "lognormal")
        return CauseSpecificParams::log_normal(j.at("mu").get<double>(),
                                               j.at("sigma").get<double>());
    throw input_error("config: unknown family '" + fam + "'");
}

inline json params_to_json(const CauseSpecificParams& p) {
    json j;
    j["family"] = family_name(p.family);
    if (p.family == Family::log_normal) {
        j["mu"] = p.rate;
        j["sigma"] = p.shape;
    } else {
        j["shape"] = p.shape;
        j["rate"] = p.rate;
    }
    return j;
}

inline CompetingRisksModel model_from_json(const json& j) {
    CompetingRisksModel m;
    m.cause1 = params_from_json(j.at("cause1"));
    m.cause2 = params_from_json(j.at("cause2"));
    return m;
}

inline json model_to_json(const CompetingRisksModel& m) {
    return json{{"cause1", params_to_json(m.cause1)}, {"cause2", params_to_json(m.cause2)}};
}

inline LossModel loss_from_json(const json& j) {
    const std::string kind = j.value("kind", "none");
    if (kind == "none") return LossModel::none();
    if (kind == "uniform") return LossModel::uniform(j.at("theta").get<double>());
    throw input_error("config: unknown loss kind '" + kind + "'");
}

inline json loss_to_json(const LossModel& l) {
    if (l.kind == LossModel::Kind::none) return json{{"kind", "none"}};
    return json{{"kind", "uniform"}, {"theta", l.theta}};
}

inline TrialDesign design_from_json(const json& j) {
    TrialDesign d;
    d.accrual = j.at("accrual").get<double>();
    d.followup = j.at("followup").get<double>();
    d.tau = j.at("tau").get<double>();
    d.ratio = j.value("ratio", 1.0);
    d.alpha = j.value("alpha", 0.05);
    d.target_power = j.value("power", 0.8);
    if (j.contains("loss")) d.loss = loss_from_json(j.at("loss"));
    d.validate();
    return d;
}

inline json design_to_json(const TrialDesign& d) {
    return json{{"accrual", d.accrual}, {"followup", d.followup}, {"tau", d.tau},
                {"ratio", d.ratio},     {"alpha", d.alpha},       {"power", d.target_power},
                {"loss", loss_to_json(d.loss)}};
}

inline ScenarioConfig scenario_from_json(const json& j) {
    ScenarioConfig sc;
    sc.name = j.value("name", "scenario");
    sc.model_e = model_from_json(j.at("model_E"));
    sc.model_c = model_from_json(j.at("model_C"));
    sc.design = design_from_json(j.at("design"));
    if (j.contains("censoring_target"))
        sc.censoring_target = j.at("censoring_target").get<double>();
    sc.iterations = j.value("iterations", 1000L);
    sc.master_seed = j.value("master_seed", static_cast<std::uint64_t>(1));
    const std::string rule = j.value("tau_rule", "fixed");
    if (rule == "fixed")
        sc.tau_rule = TauRule::fixed;
    else if (rule == "min_max_follow_up")
        sc.tau_rule = TauRule::min_max_follow_up;
    else
        throw input_error("config: unknown tau_rule '" + rule + "'");
    sc.cause = j.value("cause", 1);
    sc.phi_sample_size = j.value("phi_sample_size", 100000L);
    sc.pilot_n_per_arm = j.value("pilot_n_per_arm", 500L);
    sc.validate();
    return sc;
}

inline json scenario_to_json(const ScenarioConfig& sc) {
    json j;
    j["name"] = sc.name;
    j["model_E"] = model_to_json(sc.model_e);
    j["model_C"] = model_to_json(sc.model_c);
    j["design"] = design_to_json(sc.design);
    if (sc.censoring_target) j["censoring_target"] = *sc.censoring_target;
    j["iterations"] = sc.iterations;
    j["master_seed"] = sc.master_seed;
    j["tau_rule"] =
        sc.tau_rule == TauRule::fixed ? "fixed" : "min_max_follow_up";
    j["cause"] = sc.cause;
    j["phi_sample_size"] = sc.phi_sample_size;
    j["pilot_n_per_arm"] = sc.pilot_n_per_arm;
    return j;
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open config file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& ex) {
        throw input_error("config " + path + ": " + ex.what());
    }
}

// ---------------------------------------------------------------------------
// Run manifest: everything needed to reproduce a command byte for byte.
// ---------------------------------------------------------------------------

inline void write_manifest(const std::string& path, const std::string& command,
                           const json& config, std::uint64_t master_seed, int workers,
                           const std::vector<std::string>& outputs,
                           double wall_seconds) {
    json j;
    j["tool"] = "rmtl-cli";
    j["version"] = kVersion;
    j["command"] = command;
    j["config"] = config;
    j["master_seed"] = master_seed;
    j["workers"] = workers;
    j["outputs"] = outputs;
    j["wall_seconds"] = wall_seconds;
    std::ofstream out(path);
    if (!out) throw input_error("cannot write manifest: " + path);
    out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Tidy CSV writers for the simulation drivers.
// ---------------------------------------------------------------------------

inline void write_power_rows_csv(std::ostream& out, const std::vector<PowerRow>& rows) {
    out << "scenario,censoring_target,method,n_total,n_e,n_c,"
           "power_hr,mc_se_hr,fail_hr,power_shr,mc_se_shr,fail_shr,"
           "power_rmtld,mc_se_rmtld,fail_rmtld,iterations,error\n";
    for (const auto& r : rows) {
        out << r.scenario << ',' << csv_num(r.censoring_target) << ','
            << method_name(r.method) << ',' << r.n_total << ',' << r.n_e << ',' << r.n_c
            << ',' << csv_num(r.powers.hr.power) << ',' << csv_num(r.powers.hr.mc_se)
            << ',' << r.powers.hr.failures << ',' << csv_num(r.powers.gray.power) << ','
            << csv_num(r.powers.gray.mc_se) << ',' << r.powers.gray.failures << ','
            << csv_num(r.powers.rmtld.power) << ',' << csv_num(r.powers.rmtld.mc_se)
            << ',' << r.powers.rmtld.failures << ',' << r.powers.rmtld.iterations << ','
            << r.error << '\n';
    }
}

inline void write_sweep_rows_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "tau,accrual,followup,method,feasible,n_total,n_e,n_c,delta,"
           "sigma2_e_corrected,sigma2_c_corrected,power,mc_se,failures,iterations,"
           "error\n";
    for (const auto& r : rows) {
        out << csv_num(r.tau) << ',' << csv_num(r.accrual) << ',' << csv_num(r.followup)
            << ',' << method_name(r.method) << ',' << (r.feasible ? 1 : 0) << ','
            << r.n_total << ',' << r.n_e << ',' << r.n_c << ',' << csv_num(r.delta)
            << ',' << csv_num(r.sigma2_e_corrected) << ','
            << csv_num(r.sigma2_c_corrected) << ',' << csv_num(r.own_power.power) << ','
            << csv_num(r.own_power.mc_se) << ',' << r.own_power.failures << ','
            << r.own_power.iterations << ',' << r.error << '\n';
    }
}

// CIF curve points for plotting, one observation per row.
inline void write_cif_points_csv(std::ostream& out, const std::string& label,
                                 const StepCurve& curve, bool header) {
    if (header) out << "group,time,cif\n";
    out << label << ",0," << csv_num(curve.baseline) << '\n';
    for (std::size_t i = 0; i < curve.knots.size(); ++i)
        out << label << ',' << csv_num(curve.knots[i]) << ',' << csv_num(curve.values[i])
            << '\n';
}

}  // namespace rmtl
