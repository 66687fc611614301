// Two-sample analysis methods: the RMTLd Z test, the single-endpoint log-rank
// test (competing events censored), and the two-sample Gray test comparing
// subdistribution hazards.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "rmtl/estimation.hpp"
#include "rmtl/numerics.hpp"

namespace rmtl {

struct TestResult {
    double statistic = 0.0;  // Z for rmtld, chi-square for log-rank / Gray
    double p_value = 1.0;
    // Effect: RMTLd Delta for rmtld_test; signed normal score (E vs C, positive
    // when the E hazard runs higher) for the rank tests.
    double effect = 0.0;
    std::optional<double> ci_low;
    std::optional<double> ci_high;
    double alpha = 0.05;
};

// ---------------------------------------------------------------------------
// RMTLd test: Z = Delta_hat / SE(Delta_hat), two-sided.
// ---------------------------------------------------------------------------

inline TestResult rmtld_test(std::span<const Observation> data_e,
                             std::span<const Observation> data_c, int cause, double tau,
                             double alpha = 0.05) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw domain_error("rmtld_test: alpha must lie in (0,1)");
    const double max_e = detail::max_time(data_e);
    const double max_c = detail::max_time(data_c);
    if (tau > std::min(max_e, max_c))
        throw restriction_error(
            "rmtld_test: tau exceeds the minimum of the groups' maximum follow-up");

    const RmtlEstimate est_e = rmtl_estimate(data_e, cause, tau);
    const RmtlEstimate est_c = rmtl_estimate(data_c, cause, tau);
    const double delta = est_e.value - est_c.value;
    const double var = est_e.se * est_e.se + est_c.se * est_c.se;

    TestResult out;
    out.alpha = alpha;
    out.effect = delta;
    if (var > 0.0) {
        out.statistic = delta / std::sqrt(var);
        out.p_value = 2.0 * (1.0 - normal_cdf(std::fabs(out.statistic)));
    } else {
        out.statistic = delta == 0.0
                            ? 0.0
                            : std::copysign(std::numeric_limits<double>::infinity(), delta);
        out.p_value = delta == 0.0 ? 1.0 : 0.0;
    }
    const double z = normal_quantile(1.0 - alpha / 2.0);
    out.ci_low = delta - z * std::sqrt(var);
    out.ci_high = delta + z * std::sqrt(var);
    return out;
}

// ---------------------------------------------------------------------------
// Two-sample log-rank on cause-specific events; the competing cause is
// treated as censoring. This reproduces the "single endpoint HR" comparator,
// not a recommended competing-risks analysis.
// ---------------------------------------------------------------------------

inline TestResult logrank_test(std::span<const Observation> data_e,
                               std::span<const Observation> data_c, int cause,
                               double alpha = 0.05) {
    if (cause != 1 && cause != 2) throw domain_error("logrank_test: cause must be 1 or 2");

    struct Pt {
        double time;
        int event;
        int group;  // 0 = E, 1 = C
    };
    std::vector<Pt> pts;
    pts.reserve(data_e.size() + data_c.size());
    for (const auto& o : data_e) pts.push_back({o.time, o.status == cause ? 1 : 0, 0});
    for (const auto& o : data_c) pts.push_back({o.time, o.status == cause ? 1 : 0, 1});
    std::sort(pts.begin(), pts.end(),
              [](const Pt& a, const Pt& b) { return a.time < b.time; });

    long total_events = 0;
    for (const auto& p : pts) total_events += p.event;
    if (total_events == 0)
        throw input_error("logrank_test: no events of the requested cause");

    double u = 0.0, v = 0.0;
    std::size_t i = 0;
    std::size_t n_e = data_e.size();
    std::size_t n_c = data_c.size();
    while (i < pts.size()) {
        const double t = pts[i].time;
        int d_e = 0, d_c = 0, r_e = 0, r_c = 0;
        while (i < pts.size() && pts[i].time == t) {
            if (pts[i].group == 0) {
                d_e += pts[i].event;
                ++r_e;
            } else {
                d_c += pts[i].event;
                ++r_c;
            }
            ++i;
        }
        const double n = static_cast<double>(n_e + n_c);
        const double d = d_e + d_c;
        if (d > 0 && n > 1) {
            const double pe = static_cast<double>(n_e) / n;
            u += d_e - d * pe;
            v += d * pe * (1.0 - pe) * (n - d) / (n - 1.0);
        }
        n_e -= static_cast<std::size_t>(r_e);
        n_c -= static_cast<std::size_t>(r_c);
    }

    TestResult out;
    out.alpha = alpha;
    if (v > 0.0) {
        out.statistic = u * u / v;
        out.effect = u / std::sqrt(v);
        out.p_value = chisq1_sf(out.statistic);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Gray's two-sample test (rho = 0). The subdistribution hazard increment for
// group g is dN_1g(t) / R_g(t) with risk set
//   R_g(t) = Y_g(t) (1 - F_g(t-)) / S_g(t-),
// and the score accumulates dN_1E - R_E dN_1 / R over pooled cause-event
// times. The variance comes from the influence-function expansion of
// int a(t) dLambda*_g(t) per group, a(t) = R_E R_C / R, reduced to per-event
// kernels via suffix sums over the group's CIF jumps:
//   V1(u) = [c(u) S(u-) + (S(u-)+F(u-)) q(u) - s(u) - r(u)] / Y(u)
//   V2(u) = [F(u-) q(u) - s(u) - r(u)] / Y(u)
// with c = a/(1-F-), q = suffix int a (1-F-)^-2 dF, r = suffix int c dF,
// s = suffix int a (1-F-)^-2 F- dF, and Var = sum V1^2 d1 + V2^2 d2.
// ---------------------------------------------------------------------------

namespace detail {

struct GrayGroup {
    std::vector<TimeRow> rows;
    // Prefix-indexed paths: value after processing rows[0..j-1]; index 0 is
    // the initial value, index rows.size() the terminal one.
    std::vector<double> s_pre, f_pre, removed_pre;
    std::size_t n = 0;

    // Jump structure of the cause-of-interest CIF.
    std::vector<double> jump_times, jump_sizes, jump_f_minus;

    std::size_t first_row_at_or_after(double t) const {
        return static_cast<std::size_t>(
            std::lower_bound(rows.begin(), rows.end(), t,
                             [](const TimeRow& r, double v) { return r.time < v; }) -
            rows.begin());
    }
    double surv_before(double t) const { return s_pre[first_row_at_or_after(t)]; }
    double cif_before(double t) const { return f_pre[first_row_at_or_after(t)]; }
    double at_risk(double t) const {
        return static_cast<double>(n) - removed_pre[first_row_at_or_after(t)];
    }
    double subdist_risk(double t) const {
        const double y = at_risk(t);
        if (y <= 0.0) return 0.0;
        const double s = surv_before(t);
        if (s <= 0.0) return 0.0;
        return y * (1.0 - cif_before(t)) / s;
    }
    int cause_events_at(double t, int cause) const {
        const std::size_t j = first_row_at_or_after(t);
        if (j == rows.size() || rows[j].time != t) return 0;
        return cause == 1 ? rows[j].d1 : rows[j].d2;
    }
};

inline GrayGroup build_gray_group(std::span<const Observation> data, int cause) {
    GrayGroup g;
    g.rows = aggregate_times(data);
    g.n = data.size();
    const std::size_t k = g.rows.size();
    g.s_pre.resize(k + 1);
    g.f_pre.resize(k + 1);
    g.removed_pre.resize(k + 1);
    double s = 1.0, f = 0.0, removed = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        g.s_pre[i] = s;
        g.f_pre[i] = f;
        g.removed_pre[i] = removed;
        const TimeRow& r = g.rows[i];
        const int dj = cause == 1 ? r.d1 : r.d2;
        const int d = r.d1 + r.d2;
        if (dj > 0) {
            const double jump = static_cast<double>(dj) / r.at_risk * s;
            g.jump_times.push_back(r.time);
            g.jump_sizes.push_back(jump);
            g.jump_f_minus.push_back(f);
            f += jump;
        }
        if (d > 0) s *= 1.0 - static_cast<double>(d) / r.at_risk;
        removed += r.d1 + r.d2 + r.c;
    }
    g.s_pre[k] = s;
    g.f_pre[k] = f;
    g.removed_pre[k] = removed;
    return g;
}

}  // namespace detail

inline TestResult gray_test(std::span<const Observation> data_e,
                            std::span<const Observation> data_c, int cause,
                            double alpha = 0.05) {
    if (cause != 1 && cause != 2) throw domain_error("gray_test: cause must be 1 or 2");

    const detail::GrayGroup ge = detail::build_gray_group(data_e, cause);
    const detail::GrayGroup gc = detail::build_gray_group(data_c, cause);
    if (ge.jump_times.empty() && gc.jump_times.empty())
        throw input_error("gray_test: no events of the requested cause");

    std::vector<double> pooled;
    pooled.reserve(ge.jump_times.size() + gc.jump_times.size());
    std::merge(ge.jump_times.begin(), ge.jump_times.end(), gc.jump_times.begin(),
               gc.jump_times.end(), std::back_inserter(pooled));
    pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());

    double score = 0.0;
    std::vector<double> a_at_pooled(pooled.size(), 0.0);
    for (std::size_t m = 0; m < pooled.size(); ++m) {
        const double t = pooled[m];
        const double re = ge.subdist_risk(t);
        const double rc = gc.subdist_risk(t);
        const double r = re + rc;
        if (r <= 0.0) continue;
        a_at_pooled[m] = re * rc / r;
        const int de = ge.cause_events_at(t, cause);
        const int dc = gc.cause_events_at(t, cause);
        score += de - re * static_cast<double>(de + dc) / r;
    }

    auto a_of = [&](double t) -> double {
        const auto it = std::lower_bound(pooled.begin(), pooled.end(), t);
        if (it != pooled.end() && *it == t)
            return a_at_pooled[static_cast<std::size_t>(it - pooled.begin())];
        const double re = ge.subdist_risk(t);
        const double rc = gc.subdist_risk(t);
        const double r = re + rc;
        return r > 0.0 ? re * rc / r : 0.0;
    };

    auto group_variance = [&](const detail::GrayGroup& g) -> double {
        const std::size_t nj = g.jump_times.size();
        std::vector<double> suf_q(nj + 1, 0.0), suf_r(nj + 1, 0.0), suf_s(nj + 1, 0.0);
        for (std::size_t m = nj; m-- > 0;) {
            const double fm = g.jump_f_minus[m];
            const double one_mf = 1.0 - fm;
            const double am = a_of(g.jump_times[m]);
            const double q =
                one_mf > 0.0 ? am / (one_mf * one_mf) * g.jump_sizes[m] : 0.0;
            const double rr = one_mf > 0.0 ? am / one_mf * g.jump_sizes[m] : 0.0;
            suf_q[m] = suf_q[m + 1] + q;
            suf_r[m] = suf_r[m + 1] + rr;
            suf_s[m] = suf_s[m + 1] + q * fm;
        }
        auto suffix_after = [&](double t) -> std::size_t {
            return static_cast<std::size_t>(
                std::upper_bound(g.jump_times.begin(), g.jump_times.end(), t) -
                g.jump_times.begin());
        };

        double var = 0.0;
        for (std::size_t i = 0; i < g.rows.size(); ++i) {
            const int d1 = cause == 1 ? g.rows[i].d1 : g.rows[i].d2;
            const int d2 = cause == 1 ? g.rows[i].d2 : g.rows[i].d1;
            if (d1 == 0 && d2 == 0) continue;
            const double u = g.rows[i].time;
            const double y = g.rows[i].at_risk;
            const double s_m = g.s_pre[i];
            const double f_m = g.f_pre[i];
            const double one_mf = 1.0 - f_m;
            const std::size_t idx = suffix_after(u);
            const double q_u = suf_q[idx];
            const double r_u = suf_r[idx];
            const double s_u = suf_s[idx];
            const double c_u = one_mf > 0.0 ? a_of(u) / one_mf : 0.0;
            const double v1 = (c_u * s_m + (s_m + f_m) * q_u - s_u - r_u) / y;
            const double v2 = (f_m * q_u - s_u - r_u) / y;
            var += v1 * v1 * d1 + v2 * v2 * d2;
        }
        return var;
    };

    const double variance = group_variance(ge) + group_variance(gc);

    TestResult out;
    out.alpha = alpha;
    if (variance > 0.0) {
        out.statistic = score * score / variance;
        out.effect = score / std::sqrt(variance);
        out.p_value = chisq1_sf(out.statistic);
    }
    return out;
}

}  // namespace rmtl
