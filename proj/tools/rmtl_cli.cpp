// rmtl-cli: trial design, dataset analysis, scenario simulation, sweeps and
// censoring calibration for two-arm competing-risks trials, built around the
// restricted-mean-time-lost difference.
//
// Exit codes: 0 success, 2 input error, 3 infeasible/undefined computation,
// 4 internal numeric failure.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rmtl/rmtl.hpp"

namespace {

using rmtl::json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNumeric = 4;

std::string fmt3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

std::uint64_t pick_seed(std::optional<std::uint64_t> flag_seed, const json& config,
                        const char* key = "master_seed") {
    if (flag_seed) return *flag_seed;
    if (config.contains(key)) return config.at(key).get<std::uint64_t>();
    std::random_device rd;
    const std::uint64_t s =
        (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
    std::cout << "note: no seed supplied; using randomly drawn seed " << s
              << " (recorded in the manifest)\n";
    return s;
}

// Shared option bundle mirrored into every manifest.
struct CommonArgs {
    std::string config_path;
    std::string out_prefix = "rmtl_run";
    std::optional<std::uint64_t> seed;
    int workers = 1;
    std::optional<long> iterations;
};

void apply_design_overrides(rmtl::ScenarioConfig& sc, const std::optional<double>& alpha,
                            const std::optional<double>& power,
                            const std::optional<double>& ratio,
                            const std::optional<double>& tau,
                            const std::optional<double>& accrual,
                            const std::optional<double>& followup,
                            const std::optional<double>& censoring_target) {
    if (alpha) sc.design.alpha = *alpha;
    if (power) sc.design.target_power = *power;
    if (ratio) sc.design.ratio = *ratio;
    if (tau) sc.design.tau = *tau;
    if (accrual) sc.design.accrual = *accrual;
    if (followup) sc.design.followup = *followup;
    if (censoring_target) sc.censoring_target = *censoring_target;
    sc.design.validate();
}

json sample_size_to_json(const rmtl::SampleSizeResult& r) {
    json j;
    j["method"] = rmtl::method_name(r.method);
    j["n_total"] = r.n_total;
    j["n_e"] = r.n_e;
    j["n_c"] = r.n_c;
    j["delta"] = r.delta;
    j["phi_e"] = r.phi_e;
    j["phi_c"] = r.phi_c;
    j["sigma2_e_corrected"] = r.sigma2_e_corrected;
    j["sigma2_c_corrected"] = r.sigma2_c_corrected;
    j["diagnostics"] = r.diagnostics;
    return j;
}

// ---------------------------------------------------------------------------
// samplesize
// ---------------------------------------------------------------------------

int cmd_samplesize(const CommonArgs& common, const std::vector<std::string>& methods,
                   long phi_m, const json& config, std::uint64_t seed, Timer& timer) {
    rmtl::ScenarioConfig sc = rmtl::scenario_from_json(config);
    sc.master_seed = seed;
    if (phi_m > 0) sc.phi_sample_size = phi_m;

    const rmtl::TrialDesign design = sc.resolved_design();
    const double beta = 1.0 - design.target_power;
    const int cause = sc.cause;

    for (const auto& m : methods) {
        if (m != "all" && m != "rmtld_weibull" && m != "rmtld_approx" &&
            m != "rmtld_wu" && m != "hr" && m != "shr")
            throw rmtl::input_error("unknown method '" + m + "'");
    }
    bool want_all = methods.empty();
    auto wants = [&](const std::string& name) {
        if (want_all) return true;
        for (const auto& m : methods)
            if (m == name || m == "all") return true;
        return false;
    };

    json report;
    report["design"] = rmtl::design_to_json(design);
    report["cause"] = cause;
    json rows = json::array();

    std::optional<rmtl::SampleSizeResult> weibull_result;
    if (wants("rmtld_weibull") || wants("rmtld_approx") || wants("rmtld_wu")) {
        rmtl::PhiOptions phi_opts;
        phi_opts.sample_size = sc.phi_sample_size;
        phi_opts.seed = seed ^ 0x9E3779B97F4A7C15ULL;
        weibull_result = rmtl::sample_size_rmtld_weibull(sc.model_e, sc.model_c, design,
                                                         cause, phi_opts);
    }
    if (wants("rmtld_weibull")) rows.push_back(sample_size_to_json(*weibull_result));

    if (wants("rmtld_approx")) {
        const double sigma2 = std::max(weibull_result->sigma2_e_corrected,
                                       weibull_result->sigma2_c_corrected);
        auto r = rmtl::sample_size_rmtld_approx(weibull_result->delta, sigma2,
                                                design.ratio, design.alpha, beta);
        r.diagnostics["sigma2_common"] = sigma2;
        rows.push_back(sample_size_to_json(r));
    }

    if (wants("rmtld_wu")) {
        double s2e, s2c;
        if (config.contains("pilot_csv")) {
            const auto ds = rmtl::read_dataset_csv(config.at("pilot_csv").get<std::string>());
            if (ds.labels.size() != 2)
                throw rmtl::input_error("pilot dataset must contain exactly two groups");
            const std::string ge = config.value("pilot_group_e", ds.labels[0]);
            const std::string gc = config.value("pilot_group_c", ds.labels[1]);
            s2e = rmtl::wu_sigma2(ds.group(ge), cause, design.tau);
            s2c = rmtl::wu_sigma2(ds.group(gc), cause, design.tau);
        } else {
            rmtl::RngStream pilot_rng(seed ^ 0xA0761D6478BD642FULL, 0);
            const auto pilot =
                rmtl::generate_trial(sc.model_e, sc.model_c, design, sc.pilot_n_per_arm,
                                     sc.pilot_n_per_arm, pilot_rng);
            s2e = rmtl::wu_sigma2(pilot.e, cause, design.tau);
            s2c = rmtl::wu_sigma2(pilot.c, cause, design.tau);
        }
        auto r = rmtl::sample_size_rmtld_wu(s2e, s2c, weibull_result->delta, design.ratio,
                                            design.alpha, beta);
        rows.push_back(sample_size_to_json(r));
    }

    if (wants("hr") || wants("shr")) {
        const double p_e = rmtl::observe_prob_event(sc.model_e, design, cause, design.tau);
        const double p_c = rmtl::observe_prob_event(sc.model_c, design, cause, design.tau);
        const double p_pooled = (design.ratio * p_e + p_c) / (1.0 + design.ratio);
        if (wants("hr")) {
            const double hr =
                config.contains("hr")
                    ? config.at("hr").get<double>()
                    : std::exp(rmtl::average_log_hazard_ratio(sc.model_e, sc.model_c,
                                                              cause, design.tau, false));
            const double p = config.value("p_event", p_pooled);
            auto r = rmtl::sample_size_hr(hr, p, design.ratio, design.alpha, beta);
            r.diagnostics["hr"] = hr;
            rows.push_back(sample_size_to_json(r));
        }
        if (wants("shr")) {
            const double shr =
                config.contains("shr")
                    ? config.at("shr").get<double>()
                    : std::exp(rmtl::average_log_hazard_ratio(sc.model_e, sc.model_c,
                                                              cause, design.tau, true));
            const double p = config.value("p_event1", p_pooled);
            auto r = rmtl::sample_size_shr(shr, p, design.ratio, design.alpha, beta);
            r.diagnostics["shr"] = shr;
            rows.push_back(sample_size_to_json(r));
        }
    }

    // Analytic power check at the RMTLd-based size.
    if (weibull_result) {
        report["analytic_power_at_n"] = rmtl::analytic_power(
            weibull_result->delta, weibull_result->sigma2_e_corrected,
            weibull_result->sigma2_c_corrected, static_cast<double>(weibull_result->n_e),
            static_cast<double>(weibull_result->n_c), design.alpha);
    }

    // SHR(t) curve so users can eyeball proportionality.
    json shr_curve = json::array();
    for (int i = 1; i <= 20; ++i) {
        const double t = design.tau * i / 20.0;
        try {
            shr_curve.push_back(
                {{"t", t}, {"shr", rmtl::shr_at(sc.model_e, sc.model_c, cause, t)}});
        } catch (const std::exception&) {
            break;
        }
    }
    report["shr_curve"] = shr_curve;
    report["methods"] = rows;

    std::cout << "sample size (cause " << cause << ", tau " << fmt3(design.tau)
              << ", alpha " << fmt3(design.alpha) << ", power "
              << fmt3(design.target_power) << ")\n";
    std::cout << "method          n_total   n_E   n_C   delta    phi_E  phi_C\n";
    for (const auto& row : rows) {
        std::printf("%-15s %7ld %5ld %5ld  %7.3f  %5.3f  %5.3f\n",
                    row.at("method").get<std::string>().c_str(),
                    row.at("n_total").get<long>(), row.at("n_e").get<long>(),
                    row.at("n_c").get<long>(), row.at("delta").get<double>(),
                    row.at("phi_e").get<double>(), row.at("phi_c").get<double>());
    }

    const std::string report_path = common.out_prefix + ".json";
    std::ofstream rep(report_path);
    if (!rep) throw rmtl::input_error("cannot write report: " + report_path);
    rep << report.dump(2) << '\n';
    rmtl::write_manifest(common.out_prefix + "_manifest.json", "samplesize", config, seed,
                         common.workers, {report_path}, timer.seconds());
    return kExitOk;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

int cmd_analyze(const CommonArgs& common, const std::string& data_path,
                std::optional<double> tau_opt, double alpha, int cause,
                bool comparators, Timer& timer) {
    const rmtl::GroupedDataset ds = rmtl::read_dataset_csv(data_path);
    if (ds.labels.size() != 2)
        throw rmtl::input_error("analyze: dataset must contain exactly two groups, found " +
                                std::to_string(ds.labels.size()));
    const auto& data_e = ds.groups[0];
    const auto& data_c = ds.groups[1];

    const double bound = std::min(rmtl::detail::max_time(data_e),
                                  rmtl::detail::max_time(data_c));
    double tau = tau_opt.value_or(bound);
    if (tau > bound)
        throw rmtl::restriction_error(
            "analyze: tau " + std::to_string(tau) +
            " exceeds the minimum of the groups' maximum follow-up (" +
            std::to_string(bound) + ")");

    const auto est_e = rmtl::rmtl_estimate(data_e, cause, tau);
    const auto est_c = rmtl::rmtl_estimate(data_c, cause, tau);
    const auto test = rmtl::rmtld_test(data_e, data_c, cause, tau, alpha);
    const double z = rmtl::normal_quantile(1.0 - alpha / 2.0);

    json report;
    report["tau"] = tau;
    report["alpha"] = alpha;
    report["cause"] = cause;
    report["groups"] = {
        {{"label", ds.labels[0]},
         {"n", est_e.n},
         {"rmtl", est_e.value},
         {"se", est_e.se},
         {"ci_low", est_e.value - z * est_e.se},
         {"ci_high", est_e.value + z * est_e.se}},
        {{"label", ds.labels[1]},
         {"n", est_c.n},
         {"rmtl", est_c.value},
         {"se", est_c.se},
         {"ci_low", est_c.value - z * est_c.se},
         {"ci_high", est_c.value + z * est_c.se}}};
    report["rmtld"] = {{"delta", test.effect},   {"ci_low", *test.ci_low},
                       {"ci_high", *test.ci_high}, {"z", test.statistic},
                       {"p_value", test.p_value}};

    std::cout << "RMTL analysis, cause " << cause << ", tau = " << fmt3(tau) << "\n";
    std::cout << "  " << ds.labels[0] << ": " << fmt3(est_e.value) << " ("
              << fmt3(est_e.value - z * est_e.se) << ", "
              << fmt3(est_e.value + z * est_e.se) << "), n = " << est_e.n << "\n";
    std::cout << "  " << ds.labels[1] << ": " << fmt3(est_c.value) << " ("
              << fmt3(est_c.value - z * est_c.se) << ", "
              << fmt3(est_c.value + z * est_c.se) << "), n = " << est_c.n << "\n";
    std::cout << "  RMTLd (" << ds.labels[0] << " - " << ds.labels[1]
              << "): " << fmt3(test.effect) << " (" << fmt3(*test.ci_low) << ", "
              << fmt3(*test.ci_high) << "), Z = " << fmt3(test.statistic)
              << ", p = " << fmt3(test.p_value) << "\n";

    if (comparators) {
        try {
            const auto lr = rmtl::logrank_test(data_e, data_c, cause, alpha);
            report["logrank"] = {{"chisq", lr.statistic}, {"p_value", lr.p_value}};
            std::cout << "  log-rank (cause-specific): chi2 = " << fmt3(lr.statistic)
                      << ", p = " << fmt3(lr.p_value) << "\n";
        } catch (const std::exception& ex) {
            report["logrank"] = {{"error", ex.what()}};
        }
        try {
            const auto gr = rmtl::gray_test(data_e, data_c, cause, alpha);
            report["gray"] = {{"chisq", gr.statistic}, {"p_value", gr.p_value}};
            std::cout << "  Gray (subdistribution):    chi2 = " << fmt3(gr.statistic)
                      << ", p = " << fmt3(gr.p_value) << "\n";
        } catch (const std::exception& ex) {
            report["gray"] = {{"error", ex.what()}};
        }
    }

    const std::string report_path = common.out_prefix + ".json";
    std::ofstream rep(report_path);
    if (!rep) throw rmtl::input_error("cannot write report: " + report_path);
    rep << report.dump(2) << '\n';

    const std::string cif_path = common.out_prefix + "_cif.csv";
    std::ofstream cif_out(cif_path);
    rmtl::write_cif_points_csv(cif_out, ds.labels[0], rmtl::aj_cif(data_e, cause), true);
    rmtl::write_cif_points_csv(cif_out, ds.labels[1], rmtl::aj_cif(data_c, cause), false);

    json cfg;
    cfg["data"] = data_path;
    cfg["tau"] = tau;
    cfg["alpha"] = alpha;
    cfg["cause"] = cause;
    rmtl::write_manifest(common.out_prefix + "_manifest.json", "analyze", cfg, 0,
                         common.workers, {report_path, cif_path}, timer.seconds());
    return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate / sweep / calibrate
// ---------------------------------------------------------------------------

int cmd_simulate(const CommonArgs& common, const json& config, std::uint64_t seed,
                 std::optional<long> n_e, std::optional<long> n_c, Timer& timer) {
    rmtl::ScenarioConfig sc = rmtl::scenario_from_json(config);
    sc.master_seed = seed;
    if (common.iterations) sc.iterations = *common.iterations;

    if (!n_e && config.contains("n_e")) n_e = config.at("n_e").get<long>();
    if (!n_c && config.contains("n_c")) n_c = config.at("n_c").get<long>();

    const std::string csv_path = common.out_prefix + ".csv";
    std::ofstream csv(csv_path);
    if (!csv) throw rmtl::input_error("cannot write output: " + csv_path);

    json cfg = rmtl::scenario_to_json(sc);
    cfg["command_iterations"] = sc.iterations;

    if (n_e && n_c) {
        // Fixed-size run: rejection rates of all three tests.
        const rmtl::TrialDesign design = sc.resolved_design();
        const auto ep =
            rmtl::empirical_power(sc, design, *n_e, *n_c, {}, common.workers, 0);
        csv << "test,n_e,n_c,rejection_rate,mc_se,failures,iterations\n";
        auto emit = [&](const char* name, const rmtl::PowerEstimate& p) {
            csv << name << ',' << *n_e << ',' << *n_c << ',' << rmtl::csv_num(p.power)
                << ',' << rmtl::csv_num(p.mc_se) << ',' << p.failures << ','
                << p.iterations << '\n';
            std::cout << name << ": " << fmt3(p.power) << " (mc se " << fmt3(p.mc_se)
                      << ", failures " << p.failures << ")\n";
        };
        emit("logrank", ep.hr);
        emit("gray", ep.gray);
        emit("rmtld", ep.rmtld);
        cfg["n_e"] = *n_e;
        cfg["n_c"] = *n_c;
    } else {
        std::vector<double> targets;
        if (config.contains("censoring_targets"))
            targets = config.at("censoring_targets").get<std::vector<double>>();
        else if (sc.censoring_target)
            targets = {*sc.censoring_target};
        else
            throw rmtl::input_error(
                "simulate: provide n_e/n_c for a fixed-size run or censoring targets "
                "for a table run");
        const auto rows = rmtl::run_table(sc, targets, common.workers);
        rmtl::write_power_rows_csv(csv, rows);
        cfg["censoring_targets"] = targets;
        for (const auto& r : rows) {
            std::cout << r.scenario << " cens=" << fmt3(r.censoring_target) << " "
                      << rmtl::method_name(r.method) << " N=" << r.n_total
                      << " power_hr=" << fmt3(r.powers.hr.power)
                      << " power_shr=" << fmt3(r.powers.gray.power)
                      << " power_rmtld=" << fmt3(r.powers.rmtld.power)
                      << (r.error.empty() ? "" : (" error=" + r.error)) << "\n";
        }
    }

    rmtl::write_manifest(common.out_prefix + "_manifest.json", "simulate", cfg, seed,
                         common.workers, {csv_path}, timer.seconds());
    return kExitOk;
}

int cmd_sweep(const CommonArgs& common, const json& config, std::uint64_t seed,
              const std::vector<double>& tau_grid, const std::vector<double>& ta_grid,
              const std::vector<double>& tf_grid, Timer& timer) {
    rmtl::ScenarioConfig sc = rmtl::scenario_from_json(config);
    sc.master_seed = seed;
    if (common.iterations) sc.iterations = *common.iterations;

    std::vector<rmtl::SweepRow> rows;
    json cfg = rmtl::scenario_to_json(sc);
    if (!tau_grid.empty()) {
        rows = rmtl::sweep_tau(sc, tau_grid, common.workers);
        cfg["tau_grid"] = tau_grid;
    } else if (!ta_grid.empty() && !tf_grid.empty()) {
        rows = rmtl::sweep_accrual_followup(sc, ta_grid, tf_grid, common.workers);
        cfg["ta_grid"] = ta_grid;
        cfg["tf_grid"] = tf_grid;
    } else {
        throw rmtl::input_error(
            "sweep: provide --tau-grid, or both --ta-grid and --tf-grid");
    }

    const std::string csv_path = common.out_prefix + ".csv";
    std::ofstream csv(csv_path);
    if (!csv) throw rmtl::input_error("cannot write output: " + csv_path);
    rmtl::write_sweep_rows_csv(csv, rows);
    std::cout << "sweep: wrote " << rows.size() << " rows to " << csv_path << "\n";

    rmtl::write_manifest(common.out_prefix + "_manifest.json", "sweep", cfg, seed,
                         common.workers, {csv_path}, timer.seconds());
    return kExitOk;
}

int cmd_calibrate(const CommonArgs& common, const json& config, double target,
                  Timer& timer) {
    const rmtl::ScenarioConfig sc = rmtl::scenario_from_json(config);
    const double floor = rmtl::censored_fraction(sc.model_e, sc.model_c, sc.design,
                                                 rmtl::LossModel::none());
    const rmtl::LossModel loss =
        rmtl::calibrate_loss(sc.model_e, sc.model_c, sc.design, target);
    const double achieved =
        rmtl::censored_fraction(sc.model_e, sc.model_c, sc.design, loss);

    json report;
    report["target"] = target;
    report["administrative_floor"] = floor;
    report["achieved"] = achieved;
    report["loss"] = rmtl::loss_to_json(loss);

    if (loss.kind == rmtl::LossModel::Kind::none)
        std::cout << "calibrate: target " << fmt3(target)
                  << " sits at the administrative floor (" << fmt3(floor)
                  << "); no loss to follow-up needed\n";
    else
        std::cout << "calibrate: uniform loss theta = " << loss.theta << " gives censored fraction "
                  << fmt3(achieved) << " (administrative floor " << fmt3(floor) << ")\n";

    const std::string report_path = common.out_prefix + ".json";
    std::ofstream rep(report_path);
    if (!rep) throw rmtl::input_error("cannot write report: " + report_path);
    rep << report.dump(2) << '\n';
    json cfg = config;
    cfg["target"] = target;
    rmtl::write_manifest(common.out_prefix + "_manifest.json", "calibrate", cfg, 0,
                         common.workers, {report_path}, timer.seconds());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sample size, analysis and simulation for two-arm competing-risks "
                 "trials via the restricted mean time lost difference"};
    app.require_subcommand(1);

    CommonArgs common;
    std::optional<std::uint64_t> seed_flag;
    std::optional<double> alpha_ov, power_ov, ratio_ov, tau_ov, accrual_ov, followup_ov,
        cens_ov;

    // samplesize
    auto* size_cmd = app.add_subcommand("samplesize", "Required sample size per method");
    std::vector<std::string> methods;
    long phi_m = 0;
    size_cmd->add_option("--config", common.config_path, "scenario/design JSON file")
        ->required();
    size_cmd->add_option("--method", methods,
                         "methods: all, rmtld_weibull, rmtld_approx, rmtld_wu, hr, shr");
    size_cmd->add_option("--phi-m", phi_m, "Monte-Carlo sample size for phi");
    size_cmd->add_option("--alpha", alpha_ov, "two-sided level");
    size_cmd->add_option("--power", power_ov, "target power");
    size_cmd->add_option("--ratio", ratio_ov, "allocation ratio n_E/n_C");
    size_cmd->add_option("--tau", tau_ov, "restriction time");
    size_cmd->add_option("--accrual", accrual_ov, "accrual period t_a");
    size_cmd->add_option("--followup", followup_ov, "follow-up period t_f");
    size_cmd->add_option("--censoring-target", cens_ov, "overall censored fraction");

    // analyze
    auto* analyze_cmd = app.add_subcommand("analyze", "Analyze a two-group dataset CSV");
    std::string data_path;
    std::optional<double> tau_arg;
    double alpha_arg = 0.05;
    int cause_arg = 1;
    bool no_comparators = false;
    analyze_cmd->add_option("--data", data_path, "CSV with header time,status,group")
        ->required();
    analyze_cmd->add_option("--tau", tau_arg,
                            "restriction time (default: min over groups of max "
                            "follow-up)");
    analyze_cmd->add_option("--alpha", alpha_arg, "two-sided level");
    analyze_cmd->add_option("--cause", cause_arg, "event of interest (1 or 2)");
    analyze_cmd->add_flag("--no-comparators", no_comparators,
                          "skip log-rank and Gray tests");

    // simulate
    auto* sim_cmd = app.add_subcommand(
        "simulate", "Empirical power table or fixed-size rejection rates");
    std::optional<long> n_e_arg, n_c_arg;
    sim_cmd->add_option("--config", common.config_path, "scenario JSON file");
    sim_cmd->add_option("--n-e", n_e_arg, "fixed experimental-arm size");
    sim_cmd->add_option("--n-c", n_c_arg, "fixed control-arm size");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "tau or accrual/follow-up sweeps");
    std::vector<double> tau_grid, ta_grid, tf_grid;
    sweep_cmd->add_option("--config", common.config_path, "scenario JSON file");
    sweep_cmd->add_option("--tau-grid", tau_grid, "tau values")->delimiter(',');
    sweep_cmd->add_option("--ta-grid", ta_grid, "accrual values")->delimiter(',');
    sweep_cmd->add_option("--tf-grid", tf_grid, "follow-up values")->delimiter(',');

    // calibrate
    auto* cal_cmd =
        app.add_subcommand("calibrate", "Solve the loss model for a censoring target");
    double target = 0.0;
    cal_cmd->add_option("--config", common.config_path, "scenario JSON file")->required();
    cal_cmd->add_option("--target", target, "overall censored fraction")->required();

    // rerun support
    std::string from_manifest;
    for (auto* cmd : {sim_cmd, sweep_cmd}) {
        cmd->add_option("--from-manifest", from_manifest,
                        "rerun the configuration recorded in a manifest");
    }

    for (auto* cmd : {size_cmd, analyze_cmd, sim_cmd, sweep_cmd, cal_cmd}) {
        cmd->add_option("--out", common.out_prefix, "output path prefix");
        cmd->add_option("--seed", seed_flag, "master seed");
        cmd->add_option("--workers", common.workers, "worker threads");
        cmd->add_option("--iterations", common.iterations, "Monte-Carlo iterations");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    Timer timer;
    try {
        if (size_cmd->parsed()) {
            const json orig = rmtl::load_json_file(common.config_path);
            const std::uint64_t seed = pick_seed(seed_flag, orig);
            rmtl::ScenarioConfig sc = rmtl::scenario_from_json(orig);
            apply_design_overrides(sc, alpha_ov, power_ov, ratio_ov, tau_ov, accrual_ov,
                                   followup_ov, cens_ov);
            json config = rmtl::scenario_to_json(sc);
            // Keep the user-facing effect and pilot fields alongside the
            // canonical scenario echo.
            for (const char* key : {"hr", "shr", "p_event", "p_event1", "pilot_csv",
                                    "pilot_group_e", "pilot_group_c"}) {
                if (orig.contains(key)) config[key] = orig.at(key);
            }
            return cmd_samplesize(common, methods, phi_m, config, seed, timer);
        }
        if (analyze_cmd->parsed())
            return cmd_analyze(common, data_path, tau_arg, alpha_arg, cause_arg,
                               !no_comparators, timer);
        if (sim_cmd->parsed() || sweep_cmd->parsed()) {
            json config;
            std::uint64_t seed;
            if (!from_manifest.empty()) {
                const json manifest = rmtl::load_json_file(from_manifest);
                config = manifest.at("config");
                seed = seed_flag ? *seed_flag
                                 : manifest.at("master_seed").get<std::uint64_t>();
                if (!common.iterations && config.contains("command_iterations"))
                    common.iterations = config.at("command_iterations").get<long>();
                if (sweep_cmd->parsed()) {
                    if (tau_grid.empty() && config.contains("tau_grid"))
                        tau_grid = config.at("tau_grid").get<std::vector<double>>();
                    if (ta_grid.empty() && config.contains("ta_grid"))
                        ta_grid = config.at("ta_grid").get<std::vector<double>>();
                    if (tf_grid.empty() && config.contains("tf_grid"))
                        tf_grid = config.at("tf_grid").get<std::vector<double>>();
                }
                if (sim_cmd->parsed()) {
                    if (!n_e_arg && config.contains("n_e"))
                        n_e_arg = config.at("n_e").get<long>();
                    if (!n_c_arg && config.contains("n_c"))
                        n_c_arg = config.at("n_c").get<long>();
                }
            } else {
                if (common.config_path.empty())
                    throw rmtl::input_error("provide --config or --from-manifest");
                config = rmtl::load_json_file(common.config_path);
                seed = pick_seed(seed_flag, config);
            }
            if (sim_cmd->parsed())
                return cmd_simulate(common, config, seed, n_e_arg, n_c_arg, timer);
            return cmd_sweep(common, config, seed, tau_grid, ta_grid, tf_grid, timer);
        }
        if (cal_cmd->parsed()) {
            const json config = rmtl::load_json_file(common.config_path);
            return cmd_calibrate(common, config, target, timer);
        }
    } catch (const rmtl::infeasible_error& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitInfeasible;
    } catch (const rmtl::numeric_error& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitNumeric;
    } catch (const rmtl::input_error& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitInput;
    } catch (const rmtl::domain_error& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitInput;
    } catch (const json::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitInput;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitNumeric;
    }
    return kExitInput;
}
