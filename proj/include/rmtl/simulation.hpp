// Trial data generation under the staggered-accrual design and Monte-Carlo
// evaluation of empirical power / type-I error for every method, plus the
// table and sweep drivers.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "rmtl/design.hpp"
#include "rmtl/hypothesis.hpp"

namespace rmtl {

enum class TauRule { fixed, min_max_follow_up };

struct ScenarioConfig {
    std::string name = "scenario";
    CompetingRisksModel model_e;
    CompetingRisksModel model_c;
    TrialDesign design;
    std::optional<double> censoring_target;  // calibrates design.loss when set
    long iterations = 1000;
    std::uint64_t master_seed = 1;
    TauRule tau_rule = TauRule::fixed;
    int cause = 1;
    long phi_sample_size = 100000;
    long pilot_n_per_arm = 500;  // for the pilot-variance (Wu) comparator

    void validate() const {
        model_e.validate();
        model_c.validate();
        design.validate();
        if (iterations < 1) throw domain_error("ScenarioConfig: iterations must be >= 1");
        if (cause != 1 && cause != 2)
            throw domain_error("ScenarioConfig: cause must be 1 or 2");
    }

    // Design with the loss model resolved from the censoring target.
    TrialDesign resolved_design() const {
        if (!censoring_target) return design;
        TrialDesign d = design;
        d.loss = calibrate_loss(model_e, model_c, design, *censoring_target);
        return d;
    }
};

struct TrialData {
    SurvivalData e, c;
};

inline TrialData generate_trial(const CompetingRisksModel& model_e,
                                const CompetingRisksModel& model_c,
                                const TrialDesign& d, long n_e, long n_c,
                                RngStream& rng) {
    if (n_e < 1 || n_c < 1)
        throw domain_error("generate_trial: arm sizes must be positive");
    TrialData data;
    data.e.resize(static_cast<std::size_t>(n_e));
    data.c.resize(static_cast<std::size_t>(n_c));
    for (auto& obs : data.e) obs = draw_subject(model_e, d, rng);
    for (auto& obs : data.c) obs = draw_subject(model_c, d, rng);
    return data;
}

struct PowerEstimate {
    double power = 0.0;
    double mc_se = 0.0;
    long rejections = 0;
    long failures = 0;  // replicates where the test could not be computed
    long iterations = 0;
};

struct TestSelection {
    bool logrank = true;
    bool gray = true;
    bool rmtld = true;
};

struct EmpiricalPower {
    PowerEstimate hr;     // log-rank test on the cause of interest
    PowerEstimate gray;   // Gray's subdistribution test
    PowerEstimate rmtld;  // RMTLd Z test
};

namespace detail {

struct ReplicateOutcome {
    std::uint8_t reject_hr = 0, reject_gray = 0, reject_rmtld = 0;
    std::uint8_t fail_hr = 0, fail_gray = 0, fail_rmtld = 0;
};

// Runs fn(i) for i in [0, n) across `workers` threads. Outputs must be
// written to per-index slots so the reduction is worker-count invariant.
template <typename Fn>
inline void parallel_for(long n, int workers, Fn&& fn) {
    workers = std::max(1, workers);
    if (workers == 1 || n < 2) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const long chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const long lo = w * chunk;
        const long hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (long i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

inline PowerEstimate reduce_power(const std::vector<ReplicateOutcome>& outcomes,
                                  std::uint8_t ReplicateOutcome::*reject,
                                  std::uint8_t ReplicateOutcome::*fail) {
    PowerEstimate est;
    est.iterations = static_cast<long>(outcomes.size());
    for (const auto& o : outcomes) {
        est.rejections += o.*reject;
        est.failures += o.*fail;
    }
    est.power = est.iterations > 0
                    ? static_cast<double>(est.rejections) / est.iterations
                    : 0.0;
    est.mc_se = est.iterations > 0
                    ? std::sqrt(est.power * (1.0 - est.power) / est.iterations)
                    : 0.0;
    return est;
}

}  // namespace detail

// Rejection rates over `scenario.iterations` simulated trials of (n_e, n_c).
// Replicate r uses RngStream(master_seed ^ seed_salt, r); failed replicates
// count as non-rejections and are tallied separately.
inline EmpiricalPower empirical_power(const ScenarioConfig& scenario,
                                      const TrialDesign& design, long n_e, long n_c,
                                      const TestSelection& select = {},
                                      int workers = 1,
                                      std::uint64_t seed_salt = 0) {
    scenario.validate();
    if (scenario.iterations < 1)
        throw domain_error("empirical_power: iterations must be >= 1");
    const double alpha = design.alpha;
    std::vector<detail::ReplicateOutcome> outcomes(
        static_cast<std::size_t>(scenario.iterations));

    detail::parallel_for(scenario.iterations, workers, [&](long rep) {
        RngStream rng(scenario.master_seed ^ seed_salt,
                      static_cast<std::uint64_t>(rep));
        TrialData trial = generate_trial(scenario.model_e, scenario.model_c, design,
                                         n_e, n_c, rng);
        double tau = design.tau;
        if (scenario.tau_rule == TauRule::min_max_follow_up)
            tau = std::min(detail::max_time(trial.e), detail::max_time(trial.c));
        // Every analysis uses information up to tau only: administratively
        // censor beyond it. The RMTLd test is invariant to this; the rank
        // tests are restricted to the design window by it.
        for (auto* arm : {&trial.e, &trial.c})
            for (auto& obs : *arm)
                if (obs.time > tau) obs = {tau, 0};
        detail::ReplicateOutcome& out = outcomes[static_cast<std::size_t>(rep)];
        if (select.logrank) {
            try {
                out.reject_hr =
                    logrank_test(trial.e, trial.c, scenario.cause, alpha).p_value < alpha;
            } catch (const std::exception&) {
                out.fail_hr = 1;
            }
        }
        if (select.gray) {
            try {
                out.reject_gray =
                    gray_test(trial.e, trial.c, scenario.cause, alpha).p_value < alpha;
            } catch (const std::exception&) {
                out.fail_gray = 1;
            }
        }
        if (select.rmtld) {
            try {
                out.reject_rmtld =
                    rmtld_test(trial.e, trial.c, scenario.cause, tau, alpha).p_value <
                    alpha;
            } catch (const std::exception&) {
                out.fail_rmtld = 1;
            }
        }
    });

    EmpiricalPower result;
    result.hr = detail::reduce_power(outcomes, &detail::ReplicateOutcome::reject_hr,
                                     &detail::ReplicateOutcome::fail_hr);
    result.gray = detail::reduce_power(outcomes, &detail::ReplicateOutcome::reject_gray,
                                       &detail::ReplicateOutcome::fail_gray);
    result.rmtld = detail::reduce_power(outcomes, &detail::ReplicateOutcome::reject_rmtld,
                                        &detail::ReplicateOutcome::fail_rmtld);
    return result;
}

// ---------------------------------------------------------------------------
// Per-method sizing under a resolved design.
// ---------------------------------------------------------------------------

struct MethodSizes {
    SampleSizeResult hr, shr, weibull, wu;
};

inline MethodSizes size_all_methods(const ScenarioConfig& scenario,
                                    const TrialDesign& design) {
    MethodSizes sizes;
    const int cause = scenario.cause;
    const double beta = 1.0 - design.target_power;

    // Comparator effect sizes: event-weighted average log hazard ratios.
    const double hr_eff = std::exp(average_log_hazard_ratio(
        scenario.model_e, scenario.model_c, cause, design.tau, /*subdist=*/false));
    const double shr_eff = std::exp(average_log_hazard_ratio(
        scenario.model_e, scenario.model_c, cause, design.tau, /*subdist=*/true));
    const double p_e = observe_prob_event(scenario.model_e, design, cause, design.tau);
    const double p_c = observe_prob_event(scenario.model_c, design, cause, design.tau);
    const double p_pooled = (design.ratio * p_e + p_c) / (1.0 + design.ratio);

    sizes.hr = sample_size_hr(hr_eff, p_pooled, design.ratio, design.alpha, beta);
    sizes.shr = sample_size_shr(shr_eff, p_pooled, design.ratio, design.alpha, beta);

    PhiOptions phi_opts;
    phi_opts.sample_size = scenario.phi_sample_size;
    phi_opts.seed = scenario.master_seed ^ 0x9E3779B97F4A7C15ULL;
    sizes.weibull = sample_size_rmtld_weibull(scenario.model_e, scenario.model_c, design,
                                              cause, phi_opts);

    // Pilot-variance method: one simulated pilot study per arm.
    RngStream pilot_rng(scenario.master_seed ^ 0xA0761D6478BD642FULL, 0);
    const TrialData pilot =
        generate_trial(scenario.model_e, scenario.model_c, design,
                       scenario.pilot_n_per_arm, scenario.pilot_n_per_arm, pilot_rng);
    const double s2e = wu_sigma2(pilot.e, cause, design.tau);
    const double s2c = wu_sigma2(pilot.c, cause, design.tau);
    sizes.wu = sample_size_rmtld_wu(s2e, s2c, sizes.weibull.delta, design.ratio,
                                    design.alpha, beta);
    return sizes;
}

// ---------------------------------------------------------------------------
// Table driver: for each censoring rate, size the trial by every method and
// cross-evaluate all three tests at each method's N.
// ---------------------------------------------------------------------------

struct PowerRow {
    std::string scenario;
    double censoring_target = 0.0;
    Method method = Method::hr;
    long n_total = 0, n_e = 0, n_c = 0;
    EmpiricalPower powers;
    std::string error;  // non-empty when the cell failed
};

inline std::vector<PowerRow> run_table(const ScenarioConfig& scenario,
                                       const std::vector<double>& censoring_targets,
                                       int workers = 1) {
    scenario.validate();
    std::vector<PowerRow> rows;
    std::uint64_t cell = 0;
    for (const double target : censoring_targets) {
        ScenarioConfig sc = scenario;
        sc.censoring_target = target;
        TrialDesign design;
        MethodSizes sizes;
        bool sized = false;
        std::string cell_error;
        try {
            design = sc.resolved_design();
            sizes = size_all_methods(sc, design);
            sized = true;
        } catch (const std::exception& ex) {
            cell_error = ex.what();
        }
        const SampleSizeResult* by_method[4] = {&sizes.hr, &sizes.shr, &sizes.weibull,
                                                &sizes.wu};
        const Method methods[4] = {Method::hr, Method::shr, Method::rmtld_weibull,
                                   Method::rmtld_wu};
        for (int k = 0; k < 4; ++k) {
            PowerRow row;
            row.scenario = scenario.name;
            row.censoring_target = target;
            row.method = methods[k];
            ++cell;
            if (!sized) {
                row.error = cell_error;
                rows.push_back(row);
                continue;
            }
            row.n_total = by_method[k]->n_total;
            row.n_e = by_method[k]->n_e;
            row.n_c = by_method[k]->n_c;
            try {
                row.powers = empirical_power(sc, design, row.n_e, row.n_c, {}, workers,
                                             cell * 0x9E3779B97F4A7C15ULL);
            } catch (const std::exception& ex) {
                row.error = ex.what();
            }
            rows.push_back(row);
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Sweep drivers.
// ---------------------------------------------------------------------------

struct SweepRow {
    double tau = 0.0;
    double accrual = 0.0;
    double followup = 0.0;
    Method method = Method::rmtld_weibull;
    bool feasible = true;
    long n_total = 0, n_e = 0, n_c = 0;
    double delta = 0.0;
    double sigma2_e_corrected = 0.0, sigma2_c_corrected = 0.0;
    PowerEstimate own_power;  // each method analyzed by its own test at its own N
    std::string error;
};

namespace detail {

inline PowerEstimate own_power_for(const ScenarioConfig& sc, const TrialDesign& design,
                                   Method method, long n_e, long n_c, int workers,
                                   std::uint64_t salt) {
    TestSelection select{false, false, false};
    switch (method) {
        case Method::hr: select.logrank = true; break;
        case Method::shr: select.gray = true; break;
        default: select.rmtld = true; break;
    }
    const EmpiricalPower ep = empirical_power(sc, design, n_e, n_c, select, workers, salt);
    switch (method) {
        case Method::hr: return ep.hr;
        case Method::shr: return ep.gray;
        default: return ep.rmtld;
    }
}

}  // namespace detail

inline std::vector<SweepRow> sweep_tau(const ScenarioConfig& scenario,
                                       const std::vector<double>& tau_grid,
                                       int workers = 1) {
    scenario.validate();
    std::vector<SweepRow> rows;
    std::uint64_t cell = 0;
    for (const double tau : tau_grid) {
        ++cell;
        ScenarioConfig sc = scenario;
        sc.design.tau = tau;
        SweepRow base;
        base.tau = tau;
        base.accrual = scenario.design.accrual;
        base.followup = scenario.design.followup;
        if (!(tau > 0.0) || tau > scenario.design.horizon()) {
            base.feasible = false;
            const Method methods[4] = {Method::hr, Method::shr, Method::rmtld_weibull,
                                       Method::rmtld_wu};
            for (Method m : methods) {
                SweepRow row = base;
                row.method = m;
                rows.push_back(row);
            }
            continue;
        }
        TrialDesign design;
        MethodSizes sizes;
        try {
            design = sc.resolved_design();
            sizes = size_all_methods(sc, design);
        } catch (const std::exception& ex) {
            base.feasible = false;
            base.error = ex.what();
            const Method methods[4] = {Method::hr, Method::shr, Method::rmtld_weibull,
                                       Method::rmtld_wu};
            for (Method m : methods) {
                SweepRow row = base;
                row.method = m;
                rows.push_back(row);
            }
            continue;
        }
        const SampleSizeResult* by_method[4] = {&sizes.hr, &sizes.shr, &sizes.weibull,
                                                &sizes.wu};
        const Method methods[4] = {Method::hr, Method::shr, Method::rmtld_weibull,
                                   Method::rmtld_wu};
        for (int k = 0; k < 4; ++k) {
            SweepRow row = base;
            row.method = methods[k];
            row.n_total = by_method[k]->n_total;
            row.n_e = by_method[k]->n_e;
            row.n_c = by_method[k]->n_c;
            row.delta = sizes.weibull.delta;
            row.sigma2_e_corrected = sizes.weibull.sigma2_e_corrected;
            row.sigma2_c_corrected = sizes.weibull.sigma2_c_corrected;
            try {
                row.own_power =
                    detail::own_power_for(sc, design, methods[k], row.n_e, row.n_c,
                                          workers, cell * 0xD1342543DE82EF95ULL + k);
            } catch (const std::exception& ex) {
                row.error = ex.what();
            }
            rows.push_back(row);
        }
    }
    return rows;
}

// Accrual / follow-up sweep at fixed tau. The loss model is resolved once at
// the base design so cells differ only in (t_a, t_f); cells with
// tau > t_a + t_f are marked infeasible and not computed.
inline std::vector<SweepRow> sweep_accrual_followup(const ScenarioConfig& scenario,
                                                    const std::vector<double>& ta_grid,
                                                    const std::vector<double>& tf_grid,
                                                    int workers = 1) {
    scenario.validate();
    const TrialDesign base = scenario.resolved_design();
    std::vector<SweepRow> rows;
    std::uint64_t cell = 0;
    for (const double ta : ta_grid) {
        for (const double tf : tf_grid) {
            ++cell;
            ScenarioConfig sc = scenario;
            sc.censoring_target.reset();  // fixed loss across cells
            sc.design.accrual = ta;
            sc.design.followup = tf;
            sc.design.loss = base.loss;
            SweepRow row;
            row.tau = scenario.design.tau;
            row.accrual = ta;
            row.followup = tf;
            row.method = Method::rmtld_weibull;
            if (ta < 0.0 || !(tf > 0.0) || row.tau > ta + tf) {
                row.feasible = false;
                rows.push_back(row);
                continue;
            }
            try {
                PhiOptions phi_opts;
                phi_opts.sample_size = sc.phi_sample_size;
                phi_opts.seed = sc.master_seed ^ 0x9E3779B97F4A7C15ULL;
                const SampleSizeResult n = sample_size_rmtld_weibull(
                    sc.model_e, sc.model_c, sc.design, sc.cause, phi_opts);
                row.n_total = n.n_total;
                row.n_e = n.n_e;
                row.n_c = n.n_c;
                row.delta = n.delta;
                row.sigma2_e_corrected = n.sigma2_e_corrected;
                row.sigma2_c_corrected = n.sigma2_c_corrected;
                row.own_power =
                    detail::own_power_for(sc, sc.design, Method::rmtld_weibull, row.n_e,
                                          row.n_c, workers,
                                          cell * 0xD1342543DE82EF95ULL);
            } catch (const std::exception& ex) {
                row.error = ex.what();
                row.feasible = false;
            }
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace rmtl
