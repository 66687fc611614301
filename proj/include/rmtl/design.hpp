// Trial design: sample-size calculation via the RMTL difference under
// parametric competing-risks models with Monte-Carlo correction of the
// censoring-inflated variance, plus HR / SHR / pilot-variance comparators and
// the analytic power function.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>

#include "rmtl/estimation.hpp"
#include "rmtl/models.hpp"
#include "rmtl/numerics.hpp"

namespace rmtl {

// Loss to follow-up: none, or uniform on (0, theta).
struct LossModel {
    enum class Kind { none, uniform };
    Kind kind = Kind::none;
    double theta = 0.0;

    static LossModel none() { return {}; }
    static LossModel uniform(double theta) {
        if (!(theta > 0.0)) throw domain_error("LossModel: theta must be > 0");
        return {Kind::uniform, theta};
    }

    double survival(double t) const {
        if (kind == Kind::none) return 1.0;
        if (t >= theta) return 0.0;
        return 1.0 - t / theta;
    }
};

struct TrialDesign {
    double accrual = 0.0;       // t_a
    double followup = 0.0;      // t_f
    double tau = 0.0;           // restriction time
    double ratio = 1.0;         // r = n_E / n_C
    double alpha = 0.05;        // two-sided level
    double target_power = 0.8;  // 1 - beta
    LossModel loss;

    double horizon() const { return accrual + followup; }

    void validate() const {
        if (accrual < 0.0) throw domain_error("TrialDesign: accrual must be >= 0");
        if (!(followup > 0.0)) throw domain_error("TrialDesign: followup must be > 0");
        if (!(tau > 0.0) || tau > horizon() + 1e-12)
            throw domain_error("TrialDesign: tau must lie in (0, accrual + followup]");
        if (!(ratio > 0.0)) throw domain_error("TrialDesign: ratio must be > 0");
        if (!(alpha > 0.0 && alpha < 1.0))
            throw domain_error("TrialDesign: alpha must lie in (0,1)");
        if (!(target_power > 0.0 && target_power < 1.0))
            throw domain_error("TrialDesign: target power must lie in (0,1)");
    }
};

// P(administrative censoring time > t) under entry ~ Uniform(0, t_a) and a
// study end at t_a + t_f; the admin time is uniform on (t_f, t_a + t_f).
inline double admin_censoring_survival(const TrialDesign& d, double t) {
    if (t < 0.0) throw domain_error("admin_censoring_survival: t must be >= 0");
    if (t <= d.followup) return 1.0;
    if (t >= d.horizon()) return 0.0;
    return (d.horizon() - t) / d.accrual;
}

namespace detail {

// Integral over (0, upper] of loss-surv * admin-surv * S_all * hazard_j,
// optionally with an extra weight; split at the kinks of the censoring
// survival curves.
inline double observed_cause_integral(const CompetingRisksModel& m,
                                      const TrialDesign& d, int cause, double upper,
                                      const ToleranceConfig& cfg = {}) {
    if (upper <= 0.0) return 0.0;
    std::vector<double> knots{0.0, upper};
    auto add_knot = [&](double t) {
        if (t > 0.0 && t < upper) knots.push_back(t);
    };
    add_knot(d.followup);
    add_knot(d.horizon());
    if (d.loss.kind == LossModel::Kind::uniform) add_knot(d.loss.theta);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    double total = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double lo = knots[i], hi = knots[i + 1];
        if (lo >= d.horizon()) break;
        if (d.loss.kind == LossModel::Kind::uniform && lo >= d.loss.theta) break;
        // Weight is smooth inside each segment.
        auto weight = [&](double t) {
            return d.loss.survival(t) * admin_censoring_survival(d, t);
        };
        // Reuse the singularity-aware cause integral by shifting the weight in.
        const CauseSpecificParams& pj = m.cause(cause);
        if (pj.family == Family::weibull) {
            const double k = pj.shape;
            const double rate_k = std::pow(pj.rate, k);
            auto f = [&](double w) {
                const double u = std::pow(w, 1.0 / k);
                return rate_k * all_cause_survival(m, u) * weight(u);
            };
            total += integrate(f, std::pow(lo, k), std::pow(hi, k), cfg);
        } else {
            auto f = [&](double u) {
                return all_cause_survival(m, u) * hazard(pj, u) * weight(u);
            };
            total += integrate(f, lo, hi, cfg);
        }
    }
    return total;
}

}  // namespace detail

// Probability of observing an event of the given cause by tau under the full
// design (accrual, administrative censoring, loss to follow-up).
inline double observe_prob_event(const CompetingRisksModel& m, const TrialDesign& d,
                                 int cause, double tau, const ToleranceConfig& cfg = {}) {
    if (tau < 0.0) throw domain_error("observe_prob_event: tau must be >= 0");
    m.validate();
    return detail::observed_cause_integral(m, d, cause, std::min(tau, d.horizon()), cfg);
}

// Expected proportion of subjects with neither event observed (any time),
// pooled over arms at allocation ratio r.
inline double censored_fraction(const CompetingRisksModel& model_e,
                                const CompetingRisksModel& model_c,
                                const TrialDesign& d, const LossModel& loss,
                                const ToleranceConfig& cfg = {}) {
    TrialDesign dd = d;
    dd.loss = loss;
    auto censored_one = [&](const CompetingRisksModel& m) {
        const double observed =
            detail::observed_cause_integral(m, dd, 1, dd.horizon(), cfg) +
            detail::observed_cause_integral(m, dd, 2, dd.horizon(), cfg);
        return 1.0 - observed;
    };
    const double pc = censored_one(model_c);
    const double pe = censored_one(model_e);
    return (d.ratio * pe + pc) / (1.0 + d.ratio);
}

// Calibrate a uniform loss model so the pooled expected censored proportion
// hits the target. Returns LossModel::none() at the administrative floor.
inline LossModel calibrate_loss(const CompetingRisksModel& model_e,
                                const CompetingRisksModel& model_c,
                                const TrialDesign& d, double target,
                                const ToleranceConfig& cfg = {}) {
    if (!(target > 0.0 && target < 1.0))
        throw domain_error("calibrate_loss: target must lie in (0,1)");
    const double floor = censored_fraction(model_e, model_c, d, LossModel::none(), cfg);
    if (target < floor - 1e-9)
        throw infeasible_error(
            "calibrate_loss: target " + std::to_string(target) +
            " is below the administrative censoring floor " + std::to_string(floor));
    if (target - floor <= 2e-3) return LossModel::none();

    // Solve in x = 1/theta; censoring increases with x.
    auto g = [&](double x) {
        return censored_fraction(model_e, model_c, d, LossModel::uniform(1.0 / x), cfg) -
               target;
    };
    double x_lo = 1.0 / (64.0 * d.horizon());
    for (int i = 0; g(x_lo) > 0.0; ++i) {
        if (i > 60) throw convergence_error("calibrate_loss: bracket expansion failed");
        x_lo /= 64.0;
    }
    double x_hi = 1.0 / d.horizon();
    for (int i = 0; g(x_hi) < 0.0; ++i) {
        if (i > 60) throw convergence_error("calibrate_loss: bracket expansion failed");
        x_hi *= 2.0;
    }
    ToleranceConfig root_cfg = cfg;
    root_cfg.root_tol = 1e-10;
    const double x = find_root(g, x_lo, x_hi, root_cfg);
    return LossModel::uniform(1.0 / x);
}

// ---------------------------------------------------------------------------
// One simulated subject under the design: entry ~ U(0, t_a), latent event
// from the model, administrative censoring at t_a + t_f - entry, optional
// uniform loss; observed time measured from entry, ties go to the event.
// ---------------------------------------------------------------------------

inline Observation draw_subject(const CompetingRisksModel& m, const TrialDesign& d,
                                RngStream& rng) {
    const double entry = d.accrual > 0.0 ? rng.uniform(0.0, d.accrual) : 0.0;
    const EventDraw ev = sample_event(m, rng);
    double censor = d.horizon() - entry;
    if (d.loss.kind == LossModel::Kind::uniform)
        censor = std::min(censor, rng.uniform(0.0, d.loss.theta));
    if (ev.time <= censor) return {ev.time, ev.cause};
    return {censor, 0};
}

// Scaling factor phi = sqrt(m) * SE(mu_hat_j(tau)) / RSD_j estimated from one
// large simulated sample of size m under the full design.
inline double estimate_phi(const CompetingRisksModel& m, const TrialDesign& d, int cause,
                           double tau, long sample_size, RngStream& rng) {
    if (sample_size < 10000)
        throw domain_error("estimate_phi: sample size must be >= 10^4");
    d.validate();
    SurvivalData data(static_cast<std::size_t>(sample_size));
    for (auto& obs : data) obs = draw_subject(m, d, rng);
    const double se = rmtl_se_martingale(data, cause, tau);
    if (!(se > 0.0))
        throw numeric_error("estimate_phi: degenerate sample (no events before tau)");
    const double rsd = std::sqrt(rtl_variance_model(m, cause, tau));
    if (!(rsd > 0.0))
        throw numeric_error("estimate_phi: model has zero restricted-time-lost variance");
    return std::sqrt(static_cast<double>(sample_size)) * se / rsd;
}

// sigma^2_corrected = (phi * RSD)^2.
inline double corrected_variance(double phi, const CompetingRisksModel& m, int cause,
                                 double tau) {
    if (!(phi > 0.0)) throw domain_error("corrected_variance: phi must be > 0");
    return phi * phi * rtl_variance_model(m, cause, tau);
}

// ---------------------------------------------------------------------------
// Sample sizes.
// ---------------------------------------------------------------------------

enum class Method { rmtld_weibull, rmtld_approx, rmtld_wu, hr, shr };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::rmtld_weibull: return "rmtld_weibull";
        case Method::rmtld_approx: return "rmtld_approx";
        case Method::rmtld_wu: return "rmtld_wu";
        case Method::hr: return "hr";
        case Method::shr: return "shr";
    }
    return "?";
}

struct SampleSizeResult {
    Method method = Method::rmtld_weibull;
    long n_total = 0, n_e = 0, n_c = 0;
    double delta = std::numeric_limits<double>::quiet_NaN();
    double phi_e = 1.0, phi_c = 1.0;
    double sigma2_e_corrected = 0.0, sigma2_c_corrected = 0.0;
    std::map<std::string, double> diagnostics;
};

namespace detail {

inline double z_sum(double alpha, double target_power) {
    return normal_quantile(target_power) + normal_quantile(1.0 - alpha / 2.0);
}

// Arm split from the control-group formula: n_E = ceil(r n_C).
inline void fill_arm_sizes(SampleSizeResult& out, double n_c_raw, double ratio) {
    out.n_c = static_cast<long>(std::ceil(n_c_raw - 1e-9));
    out.n_e = static_cast<long>(std::ceil(ratio * static_cast<double>(out.n_c) - 1e-9));
    out.n_total = out.n_e + out.n_c;
    out.diagnostics["n_c_unrounded"] = n_c_raw;
}

// Total-first split used by the comparators that produce a single n.
inline void fill_total_sizes(SampleSizeResult& out, double n_total_raw, double ratio) {
    out.n_total = static_cast<long>(std::ceil(n_total_raw - 1e-9));
    out.n_c = static_cast<long>(
        std::ceil(static_cast<double>(out.n_total) / (1.0 + ratio) - 1e-9));
    out.n_e = out.n_total - out.n_c;
    out.diagnostics["n_total_unrounded"] = n_total_raw;
}

}  // namespace detail

struct PhiOptions {
    long sample_size = 100000;  // m
    std::uint64_t seed = 1;
    int replicates = 1;  // mean of R independent phi estimates
    bool force_monte_carlo = false;
};

// The censoring-corrected Weibull-model pipeline. With no loss to follow-up
// and followup >= tau there is no censoring before tau and phi = 1 exactly;
// that regime is computed analytically unless force_monte_carlo is set.
inline SampleSizeResult sample_size_rmtld_weibull(const CompetingRisksModel& model_e,
                                                  const CompetingRisksModel& model_c,
                                                  const TrialDesign& d, int cause = 1,
                                                  const PhiOptions& phi_opts = {}) {
    d.validate();
    model_e.validate();
    model_c.validate();
    const double mu_e = rmtl_model(model_e, cause, d.tau);
    const double mu_c = rmtl_model(model_c, cause, d.tau);
    const double delta = mu_e - mu_c;
    if (std::fabs(delta) < 1e-12)
        throw undefined_effect_error("sample_size_rmtld_weibull: RMTL difference is zero");

    const bool censoring_free =
        d.loss.kind == LossModel::Kind::none && d.followup >= d.tau;
    SampleSizeResult out;
    out.method = Method::rmtld_weibull;
    out.delta = delta;

    auto phi_for = [&](const CompetingRisksModel& m, std::uint64_t arm) {
        if (censoring_free && !phi_opts.force_monte_carlo) return 1.0;
        double sum = 0.0;
        for (int rep = 0; rep < std::max(1, phi_opts.replicates); ++rep) {
            RngStream rng(phi_opts.seed, (arm << 32) + static_cast<std::uint64_t>(rep));
            sum += estimate_phi(m, d, cause, d.tau, phi_opts.sample_size, rng);
        }
        return sum / std::max(1, phi_opts.replicates);
    };
    out.phi_e = phi_for(model_e, 1);
    out.phi_c = phi_for(model_c, 2);
    out.sigma2_e_corrected = corrected_variance(out.phi_e, model_e, cause, d.tau);
    out.sigma2_c_corrected = corrected_variance(out.phi_c, model_c, cause, d.tau);

    const double zs = detail::z_sum(d.alpha, d.target_power);
    const double n_c_raw = zs * zs *
                           (out.sigma2_c_corrected + out.sigma2_e_corrected / d.ratio) /
                           (delta * delta);
    detail::fill_arm_sizes(out, n_c_raw, d.ratio);
    out.diagnostics["mu_e"] = mu_e;
    out.diagnostics["mu_c"] = mu_c;
    out.diagnostics["sigma2_e"] = rtl_variance_model(model_e, cause, d.tau);
    out.diagnostics["sigma2_c"] = rtl_variance_model(model_c, cause, d.tau);
    out.diagnostics["z_sum"] = zs;
    out.diagnostics["phi_analytic"] = censoring_free && !phi_opts.force_monte_carlo;
    out.diagnostics["phi_sample_size"] =
        censoring_free && !phi_opts.force_monte_carlo
            ? 0.0
            : static_cast<double>(phi_opts.sample_size);
    return out;
}

// Approximate (typically conservative) estimate assuming a common variance:
// n = (1+r)(1+1/r)(Z_{1-beta}+Z_{1-alpha/2})^2 sigma^2 / Delta^2.
inline SampleSizeResult sample_size_rmtld_approx(double delta, double sigma2,
                                                 double ratio, double alpha,
                                                 double beta) {
    if (std::fabs(delta) < 1e-12)
        throw undefined_effect_error("sample_size_rmtld_approx: delta is zero");
    if (!(sigma2 >= 0.0)) throw domain_error("sample_size_rmtld_approx: sigma2 < 0");
    if (!(ratio > 0.0)) throw domain_error("sample_size_rmtld_approx: ratio must be > 0");
    const double zs = detail::z_sum(alpha, 1.0 - beta);
    const double n_raw =
        (1.0 + ratio) * (1.0 + 1.0 / ratio) * zs * zs * sigma2 / (delta * delta);
    SampleSizeResult out;
    out.method = Method::rmtld_approx;
    out.delta = delta;
    out.sigma2_e_corrected = out.sigma2_c_corrected = sigma2;
    detail::fill_total_sizes(out, n_raw, ratio);
    return out;
}

// Per-arm variance scaled from pilot data: sigma^2 = n* Var*(mu_hat).
inline double wu_sigma2(std::span<const Observation> pilot, int cause, double tau) {
    const RmtlEstimate est = rmtl_estimate(pilot, cause, tau);
    return static_cast<double>(est.n) * est.se * est.se;
}

inline SampleSizeResult sample_size_rmtld_wu(double sigma2_e, double sigma2_c,
                                             double delta, double ratio, double alpha,
                                             double beta) {
    if (std::fabs(delta) < 1e-12)
        throw undefined_effect_error("sample_size_rmtld_wu: delta is zero");
    if (!(sigma2_e > 0.0) || !(sigma2_c > 0.0))
        throw input_error("sample_size_rmtld_wu: pilot variances must be positive");
    const double zs = detail::z_sum(alpha, 1.0 - beta);
    const double n_c_raw = zs * zs * (sigma2_c + sigma2_e / ratio) / (delta * delta);
    SampleSizeResult out;
    out.method = Method::rmtld_wu;
    out.delta = delta;
    out.sigma2_e_corrected = sigma2_e;
    out.sigma2_c_corrected = sigma2_c;
    detail::fill_arm_sizes(out, n_c_raw, ratio);
    return out;
}

// Schoenfeld events formula shared by the HR and SHR comparators.
inline long required_events_schoenfeld(double effect, double ratio, double alpha,
                                       double beta) {
    if (!(effect > 0.0) || effect == 1.0)
        throw undefined_effect_error("schoenfeld: effect must be positive and != 1");
    if (!(ratio > 0.0)) throw domain_error("schoenfeld: ratio must be > 0");
    const double zs = detail::z_sum(alpha, 1.0 - beta);
    const double log_eff = std::log(effect);
    const double d_raw =
        (1.0 + ratio) * (1.0 + ratio) * zs * zs / (ratio * log_eff * log_eff);
    return static_cast<long>(std::ceil(d_raw - 1e-9));
}

inline SampleSizeResult sample_size_hr(double hr, double p_event, double ratio,
                                       double alpha, double beta) {
    if (!(p_event > 0.0 && p_event <= 1.0))
        throw domain_error("sample_size_hr: p_event must lie in (0,1]");
    const long d = required_events_schoenfeld(hr, ratio, alpha, beta);
    SampleSizeResult out;
    out.method = Method::hr;
    out.delta = std::log(hr);
    out.diagnostics["events_required"] = static_cast<double>(d);
    out.diagnostics["p_event"] = p_event;
    detail::fill_total_sizes(out, static_cast<double>(d) / p_event, ratio);
    return out;
}

inline SampleSizeResult sample_size_shr(double shr, double p_event1, double ratio,
                                        double alpha, double beta) {
    if (!(p_event1 > 0.0 && p_event1 <= 1.0))
        throw domain_error("sample_size_shr: p_event1 must lie in (0,1]");
    const long d = required_events_schoenfeld(shr, ratio, alpha, beta);
    SampleSizeResult out;
    out.method = Method::shr;
    out.delta = std::log(shr);
    out.diagnostics["events_required"] = static_cast<double>(d);
    out.diagnostics["p_event"] = p_event1;
    detail::fill_total_sizes(out, static_cast<double>(d) / p_event1, ratio);
    return out;
}

// Power of the two-sided RMTLd test at the given per-arm sizes:
// Phi( |Delta| / sqrt(s2_E/n_E + s2_C/n_C) - Z_{1-alpha/2} ).
inline double analytic_power(double delta, double sigma2_e, double sigma2_c, double n_e,
                             double n_c, double alpha) {
    if (!(n_e > 0.0 && n_c > 0.0)) throw domain_error("analytic_power: n must be > 0");
    if (sigma2_e < 0.0 || sigma2_c < 0.0)
        throw domain_error("analytic_power: variances must be >= 0");
    const double se = std::sqrt(sigma2_e / n_e + sigma2_c / n_c);
    const double z_a = normal_quantile(1.0 - alpha / 2.0);
    if (se == 0.0) return delta == 0.0 ? normal_cdf(-z_a) : 1.0;
    return normal_cdf(std::fabs(delta) / se - z_a);
}

// ---------------------------------------------------------------------------
// Effect-size helpers for the comparators.
// ---------------------------------------------------------------------------

// Subdistribution hazard ratio at time t: lambda*_j = f_j / (1 - F_j).
inline double shr_at(const CompetingRisksModel& model_e,
                     const CompetingRisksModel& model_c, int cause, double t,
                     const ToleranceConfig& cfg = {}) {
    if (!(t > 0.0)) throw domain_error("shr_at: t must be > 0");
    auto subdist_hazard = [&](const CompetingRisksModel& m) {
        const double f = cif(m, cause, t, cfg);
        const double dens = all_cause_survival(m, t) * hazard(m.cause(cause), t);
        return dens / (1.0 - f);
    };
    return subdist_hazard(model_e) / subdist_hazard(model_c);
}

// Cause-specific hazard ratio at time t (constant for common-shape Weibull).
inline double chr_at(const CompetingRisksModel& model_e,
                     const CompetingRisksModel& model_c, int cause, double t) {
    return hazard(model_e.cause(cause), t) / hazard(model_c.cause(cause), t);
}

// Event-weighted average log effect over (0, tau]: the log hazard ratio
// integrated against the pooled cause-specific event density. `subdist`
// selects subdistribution (SHR) versus cause-specific (HR) hazards. The log
// ratio is assembled from analytic log hazards so it stays finite where the
// hazards themselves underflow.
inline double average_log_hazard_ratio(const CompetingRisksModel& model_e,
                                       const CompetingRisksModel& model_c, int cause,
                                       double tau, bool subdist,
                                       const ToleranceConfig& cfg = {}) {
    if (!(tau > 0.0)) throw domain_error("average_log_hazard_ratio: tau must be > 0");
    auto log_ratio = [&](double t) {
        double lr = log_hazard(model_e.cause(cause), t) -
                    log_hazard(model_c.cause(cause), t);
        if (subdist) {
            lr += std::log(all_cause_survival(model_e, t)) -
                  std::log(all_cause_survival(model_c, t));
            lr -= std::log(1.0 - cif(model_e, cause, t, cfg)) -
                  std::log(1.0 - cif(model_c, cause, t, cfg));
        }
        return lr;
    };
    auto pooled_density = [&](double t) {
        return 0.5 * (all_cause_survival(model_e, t) * hazard(model_e.cause(cause), t) +
                      all_cause_survival(model_c, t) * hazard(model_c.cause(cause), t));
    };
    // Clip away the endpoints to dodge hazard singularities at 0.
    const double lo = tau * 1e-6;
    ToleranceConfig loose = cfg;
    loose.quadrature_rel_tol = std::max(cfg.quadrature_rel_tol, 1e-7);
    const double num = integrate(
        [&](double t) {
            const double d = pooled_density(t);
            return d > 0.0 ? log_ratio(t) * d : 0.0;
        },
        lo, tau, loose);
    const double den =
        integrate([&](double t) { return pooled_density(t); }, lo, tau, loose);
    if (!(den > 0.0))
        throw numeric_error("average_log_hazard_ratio: no event mass before tau");
    return num / den;
}

}  // namespace rmtl
