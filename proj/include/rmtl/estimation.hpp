// Nonparametric estimation from subject-level data: event-free Kaplan-Meier,
// Aalen-Johansen cumulative incidence, plug-in RMTL and restricted-time-lost
// variance, and standard errors (martingale and bootstrap).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rmtl/numerics.hpp"

namespace rmtl {

// Analysis-facing observation. status: 0 censored, 1 event of interest,
// 2 competing event.
struct Observation {
    double time = 0.0;
    int status = 0;
};

using SurvivalData = std::vector<Observation>;

// CSV-facing record; io code groups these into per-group SurvivalData.
struct SurvivalRecord {
    double time = 0.0;
    int status = 0;
    std::string group;
};

// Right-continuous step function: value is `baseline` before the first knot
// and values[i] on [knots[i], knots[i+1]).
struct StepCurve {
    double baseline = 0.0;
    std::vector<double> knots;
    std::vector<double> values;

    double at(double t) const {
        auto it = std::upper_bound(knots.begin(), knots.end(), t);
        if (it == knots.begin()) return baseline;
        return values[static_cast<std::size_t>(it - knots.begin()) - 1];
    }

    // Left limit at t.
    double before(double t) const {
        auto it = std::lower_bound(knots.begin(), knots.end(), t);
        if (it == knots.begin()) return baseline;
        return values[static_cast<std::size_t>(it - knots.begin()) - 1];
    }

    // Exact integral of the step function over [0, tau].
    double integral(double tau) const {
        double total = 0.0, prev_t = 0.0, prev_v = baseline;
        for (std::size_t i = 0; i < knots.size() && knots[i] < tau; ++i) {
            total += prev_v * (knots[i] - prev_t);
            prev_t = knots[i];
            prev_v = values[i];
        }
        total += prev_v * (tau - prev_t);
        return total;
    }

    // Exact integral of t * f(t) over [0, tau].
    double t_weighted_integral(double tau) const {
        double total = 0.0, prev_t = 0.0, prev_v = baseline;
        for (std::size_t i = 0; i < knots.size() && knots[i] < tau; ++i) {
            total += prev_v * 0.5 * (knots[i] * knots[i] - prev_t * prev_t);
            prev_t = knots[i];
            prev_v = values[i];
        }
        total += prev_v * 0.5 * (tau * tau - prev_t * prev_t);
        return total;
    }
};

struct RmtlEstimate {
    double value = 0.0;
    double se = 0.0;
    double tau = 0.0;
    int cause = 1;
    std::size_t n = 0;
};

namespace detail {

// Per distinct observed time: cause-specific event counts, censorings, and
// the at-risk count. Events at a tied time are processed before censorings.
struct TimeRow {
    double time;
    int d1, d2, c;
    int at_risk;
};

inline std::vector<TimeRow> aggregate_times(std::span<const Observation> data) {
    if (data.empty()) throw input_error("estimation: dataset is empty");
    std::vector<Observation> sorted(data.begin(), data.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const Observation& a, const Observation& b) { return a.time < b.time; });
    std::vector<TimeRow> rows;
    rows.reserve(sorted.size());
    int at_risk = static_cast<int>(sorted.size());
    std::size_t i = 0;
    while (i < sorted.size()) {
        const double t = sorted[i].time;
        if (t < 0.0) throw input_error("estimation: negative observation time");
        TimeRow row{t, 0, 0, 0, at_risk};
        while (i < sorted.size() && sorted[i].time == t) {
            switch (sorted[i].status) {
                case 0: ++row.c; break;
                case 1: ++row.d1; break;
                case 2: ++row.d2; break;
                default: throw input_error("estimation: status must be 0, 1 or 2");
            }
            ++i;
        }
        at_risk -= row.d1 + row.d2 + row.c;
        rows.push_back(row);
    }
    return rows;
}

inline double max_time(std::span<const Observation> data) {
    double mx = -std::numeric_limits<double>::infinity();
    for (const auto& o : data) mx = std::max(mx, o.time);
    return mx;
}

}  // namespace detail

// Kaplan-Meier event-free survival: statuses 1 and 2 both count as events.
inline StepCurve km_event_free(std::span<const Observation> data) {
    const auto rows = detail::aggregate_times(data);
    StepCurve curve;
    curve.baseline = 1.0;
    double s = 1.0;
    for (const auto& r : rows) {
        const int d = r.d1 + r.d2;
        if (d == 0) continue;
        s *= 1.0 - static_cast<double>(d) / r.at_risk;
        curve.knots.push_back(r.time);
        curve.values.push_back(s);
    }
    return curve;
}

// Aalen-Johansen cumulative incidence for the requested cause:
// F_j(t) = sum_{t_i <= t} (d_ij / n_i) S(t_{i-1}).
inline StepCurve aj_cif(std::span<const Observation> data, int cause) {
    if (cause != 1 && cause != 2) throw domain_error("aj_cif: cause must be 1 or 2");
    const auto rows = detail::aggregate_times(data);
    StepCurve curve;
    curve.baseline = 0.0;
    double s_prev = 1.0;
    double f = 0.0;
    for (const auto& r : rows) {
        const int dj = cause == 1 ? r.d1 : r.d2;
        if (dj > 0) {
            f += static_cast<double>(dj) / r.at_risk * s_prev;
            curve.knots.push_back(r.time);
            curve.values.push_back(f);
        }
        const int d = r.d1 + r.d2;
        if (d > 0) s_prev *= 1.0 - static_cast<double>(d) / r.at_risk;
    }
    return curve;
}

namespace detail {

// tau beyond the last observed time is a restriction violation unless the
// event-free mass is exhausted there (KM reaches zero), in which case the
// curves are fully determined and extrapolation is exact.
inline void check_tau(std::span<const Observation> data, double tau) {
    if (!(tau > 0.0)) throw domain_error("rmtl_hat: tau must be > 0");
    if (tau <= detail::max_time(data)) return;
    const auto rows = aggregate_times(data);
    double s = 1.0;
    for (const auto& r : rows) {
        const int d = r.d1 + r.d2;
        if (d > 0) s *= 1.0 - static_cast<double>(d) / r.at_risk;
    }
    if (s > 0.0) throw restriction_error("tau exceeds the maximum observed time");
}

}  // namespace detail

// Plug-in RMTL: exact step integral of the AJ CIF over [0, tau].
inline double rmtl_hat(std::span<const Observation> data, int cause, double tau) {
    detail::check_tau(data, tau);
    return aj_cif(data, cause).integral(tau);
}

// Plug-in variance of the restricted time lost:
// 2 tau int F - 2 int t F - (int F)^2 with exact step integrals.
inline double rtl_var_hat(std::span<const Observation> data, int cause, double tau) {
    detail::check_tau(data, tau);
    const StepCurve f = aj_cif(data, cause);
    const double a0 = f.integral(tau);
    const double a1 = f.t_weighted_integral(tau);
    return std::max(0.0, 2.0 * tau * a0 - 2.0 * a1 - a0 * a0);
}

// ---------------------------------------------------------------------------
// Martingale-approximation standard error of the RMTL estimate. Writing
// mu_hat - mu as a sum of cause-specific martingale integrals with kernels
//   W1(u) = [(S(u-) + F(u-))(tau - u) - H(u)] / Y(u)
//   W2(u) = [F(u-)(tau - u) - H(u)] / Y(u),     H(u) = int_u^tau F(t) dt,
// the variance estimate is sum over event times of W1^2 d1 + W2^2 d2.
// With no censoring before tau this reduces to the plug-in variance / n.
// ---------------------------------------------------------------------------

inline double rmtl_se_martingale(std::span<const Observation> data, int cause,
                                 double tau) {
    detail::check_tau(data, tau);
    if (cause != 1 && cause != 2) throw domain_error("rmtl_se: cause must be 1 or 2");
    const auto rows = detail::aggregate_times(data);

    // Forward pass: S and F paths (left limits stored per row).
    const std::size_t k = rows.size();
    std::vector<double> s_minus(k), f_minus(k), f_at(k);
    double s = 1.0, f = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        s_minus[i] = s;
        f_minus[i] = f;
        const int dj = cause == 1 ? rows[i].d1 : rows[i].d2;
        const int d = rows[i].d1 + rows[i].d2;
        if (dj > 0) f += static_cast<double>(dj) / rows[i].at_risk * s;
        if (d > 0) s *= 1.0 - static_cast<double>(d) / rows[i].at_risk;
        f_at[i] = f;
    }

    // Backward pass: H(t_i) = int_{t_i}^{tau} F(t) dt for rows with t_i <= tau.
    std::vector<double> h(k, 0.0);
    double acc = 0.0;
    double upper = tau;
    for (std::size_t idx = k; idx-- > 0;) {
        if (rows[idx].time > tau) continue;
        acc += f_at[idx] * (upper - rows[idx].time);
        h[idx] = acc;
        upper = rows[idx].time;
    }

    double var = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        if (rows[i].time > tau) break;
        const int d1 = cause == 1 ? rows[i].d1 : rows[i].d2;
        const int d2 = cause == 1 ? rows[i].d2 : rows[i].d1;
        if (d1 == 0 && d2 == 0) continue;
        const double y = rows[i].at_risk;
        const double rem = tau - rows[i].time;
        const double w1 = ((s_minus[i] + f_minus[i]) * rem - h[i]) / y;
        const double w2 = (f_minus[i] * rem - h[i]) / y;
        var += w1 * w1 * d1 + w2 * w2 * d2;
    }
    return std::sqrt(std::max(0.0, var));
}

struct BootstrapSe {
    double se = 0.0;
    int used = 0;
    int skipped = 0;  // resamples with no events of the requested cause
};

inline BootstrapSe rmtl_se_bootstrap(std::span<const Observation> data, int cause,
                                     double tau, int replicates, RngStream rng) {
    detail::check_tau(data, tau);
    if (replicates < 100)
        throw domain_error("rmtl_se_bootstrap: at least 100 replicates required");
    const std::size_t n = data.size();
    SurvivalData resample(n);
    std::vector<double> estimates;
    estimates.reserve(static_cast<std::size_t>(replicates));
    int skipped = 0;
    for (int b = 0; b < replicates; ++b) {
        bool any_event = false;
        double mx = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            resample[i] = data[rng.uniform_index(n)];
            any_event |= resample[i].status == cause;
            mx = std::max(mx, resample[i].time);
        }
        if (!any_event || mx < tau) {
            ++skipped;
            continue;
        }
        estimates.push_back(rmtl_hat(resample, cause, tau));
    }
    BootstrapSe out;
    out.used = static_cast<int>(estimates.size());
    out.skipped = skipped;
    if (out.used < 2) return out;
    double mean = 0.0;
    for (double v : estimates) mean += v;
    mean /= out.used;
    double ss = 0.0;
    for (double v : estimates) ss += (v - mean) * (v - mean);
    out.se = std::sqrt(ss / (out.used - 1));
    return out;
}

enum class SeMethod { martingale, bootstrap };

inline double rmtl_se(std::span<const Observation> data, int cause, double tau,
                      SeMethod method, int bootstrap_replicates = 1000,
                      std::uint64_t bootstrap_seed = 0) {
    if (method == SeMethod::martingale) return rmtl_se_martingale(data, cause, tau);
    return rmtl_se_bootstrap(data, cause, tau, bootstrap_replicates,
                             RngStream(bootstrap_seed))
        .se;
}

// Point estimate with martingale standard error.
inline RmtlEstimate rmtl_estimate(std::span<const Observation> data, int cause,
                                  double tau) {
    RmtlEstimate est;
    est.value = rmtl_hat(data, cause, tau);
    est.se = rmtl_se_martingale(data, cause, tau);
    est.tau = tau;
    est.cause = cause;
    est.n = data.size();
    return est;
}

}  // namespace rmtl
