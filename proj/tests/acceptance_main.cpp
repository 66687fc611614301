// Acceptance suite: one pass/fail line per criterion. Exercises the library
// against independent quadrature oracles, hand-computed exacts, Monte-Carlo
// calibration checks, the qualitative orderings and sweep shapes, and the
// CLI's determinism and exit-code contract.
//
// Usage: acceptance --cli <path-to-rmtl-cli> --work-dir <scratch dir>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rmtl/rmtl.hpp"

using namespace rmtl;

namespace {

struct Harness {
    int failures = 0;

    void report(const std::string& id, bool pass, const std::string& what,
                const std::string& detail, double seconds) {
        std::printf("%s criterion %s: %s (%s; %.1fs)\n", pass ? "PASS" : "FAIL",
                    id.c_str(), what.c_str(), detail.c_str(), seconds);
        std::fflush(stdout);
        if (!pass) ++failures;
    }
};

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point start = clock::now();
    return std::chrono::duration<double>(clock::now() - start).count();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Scenario definitions shared across criteria (the shipped configs).
// ---------------------------------------------------------------------------

ScenarioConfig scenario_a() {
    ScenarioConfig sc;
    sc.name = "scenario_a";
    sc.model_e = {CauseSpecificParams::weibull(1.3, 0.072),
                  CauseSpecificParams::weibull(1.3, 0.040)};
    sc.model_c = {CauseSpecificParams::weibull(1.3, 0.050),
                  CauseSpecificParams::weibull(1.3, 0.040)};
    sc.design.accrual = 18.0;
    sc.design.followup = 28.0;
    sc.design.tau = 22.0;
    sc.master_seed = 20250801;
    return sc;
}

ScenarioConfig scenario_b() {
    ScenarioConfig sc;
    sc.name = "scenario_b";
    sc.model_e = {CauseSpecificParams::weibull(1.0, 0.052),
                  CauseSpecificParams::weibull(1.0, 0.035)};
    sc.model_c = {CauseSpecificParams::weibull(1.9, 0.0555),
                  CauseSpecificParams::weibull(1.0, 0.035)};
    sc.design.accrual = 18.0;
    sc.design.followup = 28.0;
    sc.design.tau = 16.0;
    sc.master_seed = 20250802;
    return sc;
}

// Literal nested quadrature of the parametric CIF integrals, independent of
// the library path (tanh-sinh rule, integrand written out directly).
struct WeibullOracle {
    double k, rho1, rho2;

    double cif(int j, double t) const {
        const double rj = j == 1 ? rho1 : rho2;
        return oracle::integrate_ts(
            [&](double u) {
                return std::exp(-std::pow(rho1 * u, k) - std::pow(rho2 * u, k)) * k *
                       std::pow(rj, k) * std::pow(u, k - 1.0);
            },
            0.0, t, 3e-10);
    }
    // int_0^tau F and int_0^tau t F in one pass over the outer rule.
    double rmtl(int j, double tau) const {
        return oracle::integrate_ts([&](double t) { return cif(j, t); }, 0.0, tau, 1e-8);
    }
    double t_weighted(int j, double tau) const {
        return oracle::integrate_ts([&](double t) { return t * cif(j, t); }, 0.0, tau,
                                    1e-8);
    }
};

// ---------------------------------------------------------------------------
// CLI helpers.
// ---------------------------------------------------------------------------

std::string g_cli;
std::filesystem::path g_work;

int run_cli(const std::string& args, const std::string& log_name) {
    const std::string log = (g_work / (log_name + ".log")).string();
    const std::string cmd = g_cli + " " + args + " > " + log + " 2>&1";
    const int rc = std::system(cmd.c_str());
    if (rc == -1) return -1;
    return WEXITSTATUS(rc);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string flag = argv[i];
        if (flag == "--cli") g_cli = argv[i + 1];
        if (flag == "--work-dir") g_work = argv[i + 1];
    }
    if (g_work.empty()) g_work = std::filesystem::temp_directory_path() / "rmtl_accept";
    std::filesystem::create_directories(g_work);

    Harness h;

    // ------------------------------------------------------------------ 1
    {
        const double t0 = now_seconds();
        double worst = 0.0;
        std::string worst_at;
        for (double k : {0.5, 1.0, 2.0, 3.0}) {
            for (double ratio : {0.5, 1.0, 2.0}) {
                const double rho1 = 0.1 * ratio, rho2 = 0.1;
                const WeibullOracle orc{k, rho1, rho2};
                for (double tau : {1.0, 5.0, 20.0}) {
                    for (int cause : {1, 2}) {
                        const double mu_c = rmtl_weibull_closed(k, rho1, rho2, cause, tau);
                        const double mu_o = orc.rmtl(cause, tau);
                        const double v_c =
                            rtl_variance_weibull_closed(k, rho1, rho2, cause, tau);
                        const double a1 = orc.t_weighted(cause, tau);
                        const double v_o = 2.0 * tau * mu_o - 2.0 * a1 - mu_o * mu_o;
                        const double e1 = std::fabs(mu_c - mu_o) / std::fabs(mu_o);
                        const double e2 = std::fabs(v_c - v_o) / std::fabs(v_o);
                        const double e = std::max(e1, e2);
                        if (e > worst) {
                            worst = e;
                            worst_at = "k=" + fmt(k) + " ratio=" + fmt(ratio) + " tau=" +
                                       fmt(tau) + " cause=" + std::to_string(cause);
                        }
                    }
                }
            }
        }
        const double dt = now_seconds() - t0;
        h.report("1", worst <= 1e-6 && dt < 5.0,
                 "closed-form RMTL/variance vs nested quadrature on the full grid",
                 "max rel err " + fmt(worst) + " at " + worst_at, dt);
    }

    // ------------------------------------------------------------------ 2
    {
        const double t0 = now_seconds();
        const SurvivalData toy = {{1, 1}, {2, 2}, {3, 0}, {4, 1}};
        const StepCurve f1 = aj_cif(toy, 1);
        const StepCurve f2 = aj_cif(toy, 2);
        bool ok = std::fabs(f1.at(1.0) - 0.25) < 1e-12 &&
                  std::fabs(f2.at(2.0) - 0.25) < 1e-12 &&
                  std::fabs(f1.at(4.0) - 0.75) < 1e-12;
        ok = ok && std::fabs(rmtl_hat(toy, 1, 4.0) - 0.75) < 1e-12;
        const SurvivalData single = {{1, 1}};
        ok = ok && std::fabs(rtl_var_hat(single, 1, 2.0)) < 1e-12;
        const SurvivalData le = {{1, 1}};
        const SurvivalData lc = {{2, 1}};
        const TestResult lr = logrank_test(le, lc, 1);
        ok = ok && std::fabs(lr.statistic - 1.0) < 1e-12 &&
             std::fabs(lr.p_value - 0.3173) < 1e-4;
        const double dt = now_seconds() - t0;
        h.report("2", ok && dt < 1.0, "hand-computed AJ/RMTL/variance/log-rank exacts",
                 "chi2 " + fmt(lr.statistic) + ", p " + fmt(lr.p_value), dt);
    }

    // ------------------------------------------------------------------ 3
    {
        const double t0 = now_seconds();
        const SampleSizeResult approx = sample_size_rmtld_approx(1.0, 4.0, 1.0, 0.05, 0.2);
        const SampleSizeResult hr = sample_size_hr(0.7, 0.5, 1.0, 0.05, 0.2);
        const SampleSizeResult shr = sample_size_shr(0.75, 0.4, 1.0, 0.05, 0.2);
        const CompetingRisksModel me{CauseSpecificParams::weibull(1.0, 0.15),
                                     CauseSpecificParams::weibull(1.0, 0.10)};
        const CompetingRisksModel mc{CauseSpecificParams::weibull(1.0, 0.10),
                                     CauseSpecificParams::weibull(1.0, 0.10)};
        TrialDesign d;
        d.accrual = 18.0;
        d.followup = 10.0;
        d.tau = 10.0;
        const SampleSizeResult pipe = sample_size_rmtld_weibull(me, mc, d);
        const bool ok = approx.n_total == 126 &&
                        hr.diagnostics.at("events_required") == 247.0 &&
                        hr.n_total == 494 &&
                        shr.diagnostics.at("events_required") == 380.0 &&
                        shr.n_total == 950 && pipe.n_total == 492 && pipe.phi_e == 1.0;
        const double dt = now_seconds() - t0;
        h.report("3", ok && dt < 1.0, "arithmetic exacts for every formula",
                 "approx " + std::to_string(approx.n_total) + ", hr d=247 n=" +
                     std::to_string(hr.n_total) + ", shr d=380 n=" +
                     std::to_string(shr.n_total) + ", pipeline n=" +
                     std::to_string(pipe.n_total),
                 dt);
    }

    // ------------------------------------------------------------------ 4
    {
        const double t0 = now_seconds();
        const CompetingRisksModel m{CauseSpecificParams::weibull(1.0, 0.1),
                                    CauseSpecificParams::weibull(1.0, 0.1)};
        TrialDesign d;
        d.accrual = 18.0;
        d.followup = 28.0;
        d.tau = 10.0;
        RngStream rng(424242, 0);
        const double phi_free = estimate_phi(m, d, 1, d.tau, 100000, rng);

        const CompetingRisksModel slow{CauseSpecificParams::weibull(1.0, 0.05),
                                       CauseSpecificParams::weibull(1.0, 0.03)};
        TrialDesign heavy = d;
        heavy.loss = calibrate_loss(slow, slow, d, 0.45);
        RngStream rng2(424243, 0);
        const double phi_heavy = estimate_phi(slow, heavy, 1, heavy.tau, 100000, rng2);
        const double dt = now_seconds() - t0;
        h.report("4", std::fabs(phi_free - 1.0) <= 0.03 && phi_heavy > 1.0 && dt < 30.0,
                 "phi identity without censoring and inflation at 45% censoring",
                 "phi " + fmt(phi_free) + " / " + fmt(phi_heavy) + " (theta " +
                     fmt(heavy.loss.theta) + ")",
                 dt);
    }

    // ------------------------------------------------------------------ 5
    {
        const double t0 = now_seconds();
        ScenarioConfig sc = scenario_a();
        sc.censoring_target = 0.30;
        sc.design.tau = 18.0;
        const TrialDesign d = sc.resolved_design();
        const int reps = 2000, n = 1000;
        std::vector<double> estimates(reps);
        double se_sum = 0.0;
        for (int r = 0; r < reps; ++r) {
            RngStream rng(515151, static_cast<std::uint64_t>(r));
            SurvivalData data(n);
            for (auto& obs : data) obs = draw_subject(sc.model_e, d, rng);
            estimates[r] = rmtl_hat(data, 1, d.tau);
            se_sum += rmtl_se_martingale(data, 1, d.tau);
        }
        double mean = 0.0;
        for (double v : estimates) mean += v;
        mean /= reps;
        double ss = 0.0;
        for (double v : estimates) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / (reps - 1));
        const double se_bar = se_sum / reps;
        const double rel_mart = std::fabs(se_bar - sd) / sd;

        RngStream rng_b(515252, 0);
        SurvivalData single(500);
        for (auto& obs : single) obs = draw_subject(sc.model_e, d, rng_b);
        const double mart = rmtl_se_martingale(single, 1, d.tau);
        const BootstrapSe boot =
            rmtl_se_bootstrap(single, 1, d.tau, 1000, RngStream(515353, 0));
        const double rel_boot = std::fabs(boot.se - mart) / mart;
        const double dt = now_seconds() - t0;
        h.report("5", rel_mart <= 0.05 && rel_boot <= 0.10 && dt < 300.0,
                 "martingale SE vs empirical SD (2000 x n=1000) and bootstrap",
                 "SD gap " + fmt(rel_mart * 100) + "%, bootstrap gap " +
                     fmt(rel_boot * 100) + "%",
                 dt);
    }

    // ------------------------------------------------------------------ 6
    {
        const double t0 = now_seconds();
        ScenarioConfig sc = scenario_a();
        sc.model_e = sc.model_c;  // null
        sc.design.tau = 15.0;
        sc.censoring_target = 0.30;
        sc.iterations = 2000;
        sc.master_seed = 606060;
        const TrialDesign d = sc.resolved_design();
        const EmpiricalPower ep = empirical_power(sc, d, 200, 200, {}, 1);
        const bool ok = std::fabs(ep.hr.power - 0.05) <= 0.015 &&
                        std::fabs(ep.gray.power - 0.05) <= 0.015 &&
                        std::fabs(ep.rmtld.power - 0.05) <= 0.015;
        const double dt = now_seconds() - t0;
        h.report("6", ok && dt < 300.0,
                 "type-I error of log-rank / Gray / RMTLd at n=200 per arm",
                 "rates " + fmt(ep.hr.power) + " / " + fmt(ep.gray.power) + " / " +
                     fmt(ep.rmtld.power),
                 dt);
    }

    // ------------------------------------------------------------------ 7+8
    {
        const double t0 = now_seconds();
        bool ok7 = true;
        std::string detail7;
        long n_shr_5 = 0, n_w_5 = 0, n_hr_5 = 0;
        ScenarioConfig a5;
        TrialDesign a5_design;
        for (int which = 0; which < 2; ++which) {
            for (double target : {0.05, 0.30}) {
                ScenarioConfig sc = which == 0 ? scenario_a() : scenario_b();
                sc.censoring_target = target;
                sc.iterations = 1000;
                const TrialDesign d = sc.resolved_design();
                const MethodSizes sizes = size_all_methods(sc, d);
                TestSelection only_rmtld{false, false, true};
                const EmpiricalPower ep = empirical_power(
                    sc, d, sizes.weibull.n_e, sizes.weibull.n_c, only_rmtld, 1, 7001);
                const bool hit = std::fabs(ep.rmtld.power - 0.80) <= 0.05;
                ok7 = ok7 && hit;
                detail7 += sc.name + "@" + fmt(target) + ": n=" +
                           std::to_string(sizes.weibull.n_total) + " power " +
                           fmt(ep.rmtld.power) + (hit ? "; " : " [MISS]; ");
                if (which == 0 && target == 0.05) {
                    n_w_5 = sizes.weibull.n_total;
                    n_shr_5 = sizes.shr.n_total;
                    n_hr_5 = sizes.hr.n_total;
                    a5 = sc;
                    a5_design = d;
                }
            }
        }
        const double dt7 = now_seconds() - t0;
        h.report("7", ok7 && dt7 < 900.0,
                 "RMTLd power at the designed n is 0.80 +- 0.05 (both scenarios, 5% and "
                 "30% censoring)",
                 detail7, dt7);

        const double t8 = now_seconds();
        TestSelection only_rmtld{false, false, true};
        const long n_hr_c = n_hr_5 / 2;
        const long n_hr_e = n_hr_5 - n_hr_c;
        const EmpiricalPower at_hr =
            empirical_power(a5, a5_design, n_hr_e, n_hr_c, only_rmtld, 1, 8001);
        const bool ok8 = n_w_5 <= n_shr_5 && at_hr.rmtld.power < 0.75;
        const std::string detail8 =
            "N_rmtld " + std::to_string(n_w_5) + " <= N_shr " + std::to_string(n_shr_5) +
            "; RMTLd power at N_hr=" + std::to_string(n_hr_5) + " is " +
            fmt(at_hr.rmtld.power);
        h.report("8", ok8, "qualitative orderings under the PH-like scenario at 5%",
                 detail8, now_seconds() - t8);
    }

    // ------------------------------------------------------------------ 9
    {
        const double t0 = now_seconds();
        ScenarioConfig a = scenario_a();
        a.censoring_target = 0.05;
        a.iterations = 200;
        const std::vector<double> grid_a = {10.0, 14.0, 18.0, 22.0, 26.0};
        const auto rows_a = sweep_tau(a, grid_a, 1);
        std::vector<long> n_a;
        for (const auto& r : rows_a)
            if (r.method == Method::rmtld_weibull && r.feasible) n_a.push_back(r.n_total);
        bool mono = n_a.size() == grid_a.size();
        for (std::size_t i = 0; i + 1 < n_a.size(); ++i)
            mono = mono && n_a[i + 1] <= n_a[i] + std::max<long>(2, n_a[i] / 100);

        ScenarioConfig b = scenario_b();
        b.censoring_target = 0.05;
        b.iterations = 200;
        const std::vector<double> grid_b = {4.0, 8.0, 12.0, 16.0, 20.0};
        const auto rows_b = sweep_tau(b, grid_b, 1);
        std::vector<long> n_b;
        for (const auto& r : rows_b)
            if (r.method == Method::rmtld_weibull && r.feasible) n_b.push_back(r.n_total);
        bool interior = n_b.size() == grid_b.size();
        if (interior) {
            std::size_t arg = 0;
            for (std::size_t i = 1; i < n_b.size(); ++i)
                if (n_b[i] < n_b[arg]) arg = i;
            interior = arg > 0 && arg + 1 < n_b.size() &&
                       n_b.front() >= n_b[arg] + std::max<long>(2, n_b[arg] / 20) &&
                       n_b.back() >= n_b[arg] + std::max<long>(2, n_b[arg] / 20);
        }

        ScenarioConfig ta = scenario_a();
        ta.design.tau = 15.0;
        ta.censoring_target = 0.05;
        ta.iterations = 200;
        const auto rows_t =
            sweep_accrual_followup(ta, {0.0, 6.0, 18.0, 30.0}, {12.0, 28.0}, 1);
        bool infeasible_marked = false;
        bool constant = true;
        long n_ref = -1;
        for (const auto& r : rows_t) {
            if (r.accrual == 0.0 && r.followup == 12.0) infeasible_marked = !r.feasible;
            if (r.followup == 28.0 && r.accrual > 0.0 && r.feasible) {
                if (n_ref < 0) n_ref = r.n_total;
                constant = constant && r.n_total == n_ref;
            }
        }
        const double dt = now_seconds() - t0;
        std::string detail = "A: N(tau) =";
        for (long n : n_a) detail += " " + std::to_string(n);
        detail += " | B:";
        for (long n : n_b) detail += " " + std::to_string(n);
        detail += " | t_a row N=" + std::to_string(n_ref);
        h.report("9", mono && interior && infeasible_marked && constant && dt < 1200.0,
                 "tau-sweep shapes and accrual invariance", detail, dt);
    }

    // ------------------------------------------------------------------ 10
    {
        const double t0 = now_seconds();
        bool ok = true;
        std::string detail;

        ScenarioConfig sc = scenario_a();
        sc.iterations = 200;
        const EmpiricalPower w1 = empirical_power(sc, sc.design, 120, 120, {}, 1);
        const EmpiricalPower w4 = empirical_power(sc, sc.design, 120, 120, {}, 4);
        ok = w1.hr.rejections == w4.hr.rejections &&
             w1.gray.rejections == w4.gray.rejections &&
             w1.rmtld.rejections == w4.rmtld.rejections;
        detail = "library workers 1 vs 4: " + std::string(ok ? "identical" : "DIFFER");

        if (!g_cli.empty()) {
            ScenarioConfig h0 = scenario_a();
            h0.model_e = h0.model_c;
            h0.iterations = 200;
            h0.censoring_target = 0.20;
            json cfg = scenario_to_json(h0);
            cfg["n_e"] = 100;
            cfg["n_c"] = 100;
            spit(g_work / "h0.json", cfg.dump(2));

            const std::string out1 = (g_work / "r1").string();
            const std::string out2 = (g_work / "r2").string();
            const int rc1 = run_cli("simulate --config " + (g_work / "h0.json").string() +
                                        " --out " + out1 + " --workers 1",
                                    "sim1");
            const int rc2 = run_cli("simulate --from-manifest " + out1 +
                                        "_manifest.json --out " + out2 + " --workers 4",
                                    "sim2");
            const bool bytes_equal = slurp(out1 + ".csv") == slurp(out2 + ".csv");
            ok = ok && rc1 == 0 && rc2 == 0 && bytes_equal;
            detail +=
                "; CLI rerun bytes " + std::string(bytes_equal ? "identical" : "DIFFER");

            ScenarioConfig swc = scenario_a();
            swc.iterations = 100;
            swc.censoring_target = 0.05;
            spit(g_work / "sweep.json", scenario_to_json(swc).dump(2));
            const std::string sw1 = (g_work / "s1").string();
            const std::string sw2 = (g_work / "s2").string();
            const int rs1 = run_cli("sweep --config " + (g_work / "sweep.json").string() +
                                        " --tau-grid 14,18 --out " + sw1 + " --workers 2",
                                    "sweep1");
            const int rs2 = run_cli("sweep --from-manifest " + sw1 + "_manifest.json " +
                                        "--out " + sw2 + " --workers 1",
                                    "sweep2");
            const bool sweep_equal = slurp(sw1 + ".csv") == slurp(sw2 + ".csv");
            ok = ok && rs1 == 0 && rs2 == 0 && sweep_equal;
            detail +=
                "; sweep rerun bytes " + std::string(sweep_equal ? "identical" : "DIFFER");
        }
        h.report("10", ok, "determinism under reruns and worker counts", detail,
                 now_seconds() - t0);
    }

    // ------------------------------------------------------------- CLI contract
    if (!g_cli.empty()) {
        const double t0 = now_seconds();
        bool ok = true;
        std::string detail;

        // Missing tau -> exit 2 naming the field.
        json bad = scenario_to_json(scenario_a());
        bad["design"].erase("tau");
        spit(g_work / "bad.json", bad.dump(2));
        const int rc_bad =
            run_cli("samplesize --config " + (g_work / "bad.json").string() + " --out " +
                        (g_work / "bad_out").string(),
                    "bad");
        const std::string bad_log = slurp(g_work / "bad.log");
        ok = ok && rc_bad == 2 && bad_log.find("tau") != std::string::npos;
        detail += "missing tau -> " + std::to_string(rc_bad);

        // Single-group dataset -> exit 2.
        spit(g_work / "single.csv", "time,status,group\n1,1,only\n2,0,only\n");
        const int rc_single =
            run_cli("analyze --data " + (g_work / "single.csv").string() + " --out " +
                        (g_work / "single_out").string(),
                    "single");
        ok = ok && rc_single == 2;
        detail += "; single group -> " + std::to_string(rc_single);

        // tau beyond the follow-up bound -> exit 3 naming the bound.
        spit(g_work / "two.csv", "time,status,group\n1,1,a\n5,0,a\n2,1,b\n4,0,b\n");
        const int rc_tau =
            run_cli("analyze --data " + (g_work / "two.csv").string() +
                        " --tau 4.5 --out " + (g_work / "tau_out").string(),
                    "tau");
        const std::string tau_log = slurp(g_work / "tau.log");
        ok = ok && rc_tau == 3 && tau_log.find("4") != std::string::npos;
        detail += "; tau beyond bound -> " + std::to_string(rc_tau);

        // Infeasible calibration target -> exit 3 reporting the floor.
        spit(g_work / "cal.json", scenario_to_json(scenario_a()).dump(2));
        const int rc_cal = run_cli("calibrate --config " + (g_work / "cal.json").string() +
                                       " --target 0.001 --out " +
                                       (g_work / "cal_out").string(),
                                   "cal");
        const std::string cal_log = slurp(g_work / "cal.log");
        ok = ok && rc_cal == 3 && cal_log.find("floor") != std::string::npos;
        detail += "; infeasible target -> " + std::to_string(rc_cal);

        // samplesize on the exponential pipeline example: every method row is
        // present and the corrected pipeline reproduces n_total = 492.
        {
            ScenarioConfig pipe;
            pipe.name = "example_pipeline";
            pipe.model_e = {CauseSpecificParams::weibull(1.0, 0.15),
                            CauseSpecificParams::weibull(1.0, 0.10)};
            pipe.model_c = {CauseSpecificParams::weibull(1.0, 0.10),
                            CauseSpecificParams::weibull(1.0, 0.10)};
            pipe.design.accrual = 18.0;
            pipe.design.followup = 10.0;
            pipe.design.tau = 10.0;
            pipe.master_seed = 7;
            spit(g_work / "pipe.json", scenario_to_json(pipe).dump(2));
            const int rc_size = run_cli("samplesize --config " +
                                            (g_work / "pipe.json").string() +
                                            " --method all --out " +
                                            (g_work / "size_out").string(),
                                        "size");
            bool pipe_ok = rc_size == 0;
            long n492 = 0;
            std::size_t n_methods = 0;
            if (pipe_ok) {
                const json report = json::parse(slurp(g_work / "size_out.json"));
                n_methods = report.at("methods").size();
                for (const auto& row : report.at("methods"))
                    if (row.at("method") == "rmtld_weibull") n492 = row.at("n_total");
                pipe_ok = n_methods == 5 && n492 == 492;
            }
            ok = ok && pipe_ok &&
                 std::filesystem::exists(g_work / "size_out_manifest.json");
            detail += "; pipeline samplesize -> " + std::to_string(rc_size) + " (" +
                      std::to_string(n_methods) + " methods, n=" +
                      std::to_string(n492) + ")";
        }

        // analyze on the toy dataset duplicated into two identical groups:
        // delta 0, p 1, and the emitted CIF points carry the hand values.
        {
            spit(g_work / "toy.csv",
                 "time,status,group\n"
                 "1,1,g1\n2,2,g1\n3,0,g1\n4,1,g1\n"
                 "1,1,g2\n2,2,g2\n3,0,g2\n4,1,g2\n");
            const int rc_an = run_cli("analyze --data " + (g_work / "toy.csv").string() +
                                          " --tau 4 --out " +
                                          (g_work / "an_out").string(),
                                      "an");
            bool an_ok = rc_an == 0;
            if (an_ok) {
                const json report = json::parse(slurp(g_work / "an_out.json"));
                an_ok = std::fabs(report.at("rmtld").at("delta").get<double>()) < 1e-12 &&
                        std::fabs(report.at("rmtld").at("p_value").get<double>() - 1.0) <
                            1e-12;
                const std::string cif_csv = slurp(g_work / "an_out_cif.csv");
                an_ok = an_ok && cif_csv.find("g1,1,0.25") != std::string::npos &&
                        cif_csv.find("g1,4,0.75") != std::string::npos;
            }
            ok = ok && an_ok;
            detail += "; toy analyze -> " + std::to_string(rc_an) +
                      (an_ok ? " (delta 0, p 1, CIF points exact)" : " [MISS]");
        }

        h.report("cli", ok, "exit codes, output files and CLI-level examples", detail,
                 now_seconds() - t0);
    }

    std::printf("%s: %d criterion(s) failed\n", h.failures == 0 ? "SUCCESS" : "FAILURE",
                h.failures);
    return h.failures == 0 ? 0 : 1;
}
