#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "rmtl/hypothesis.hpp"
#include "testutil.hpp"

using namespace rmtl;

TEST_CASE("rmtld_test on identical datasets") {
    RngStream rng(21, 0);
    const auto data = testutil::simulate(testutil::expo(0.1, 0.08), 150, 25.0, rng);
    const TestResult r = rmtld_test(data, data, 1, 8.0, 0.05);
    CHECK(r.effect == 0.0);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == 1.0);
}

TEST_CASE("rmtld_test definitional relations") {
    RngStream rng(22, 0);
    const auto e = testutil::simulate(testutil::expo(0.15, 0.1), 300, 30.0, rng);
    const auto c = testutil::simulate(testutil::expo(0.10, 0.1), 300, 30.0, rng);
    const double tau = 10.0;
    const TestResult r = rmtld_test(e, c, 1, tau, 0.05);

    const RmtlEstimate est_e = rmtl_estimate(e, 1, tau);
    const RmtlEstimate est_c = rmtl_estimate(c, 1, tau);
    const double se = std::sqrt(est_e.se * est_e.se + est_c.se * est_c.se);
    CHECK(r.effect == doctest::Approx(est_e.value - est_c.value).epsilon(1e-14));
    CHECK(r.statistic == doctest::Approx(r.effect / se).epsilon(1e-12));
    CHECK(r.p_value ==
          doctest::Approx(2.0 * (1.0 - normal_cdf(std::fabs(r.statistic))))
              .epsilon(1e-12));
    const double z = normal_quantile(0.975);
    CHECK(*r.ci_low == doctest::Approx(r.effect - z * se).epsilon(1e-12));
    CHECK(*r.ci_high == doctest::Approx(r.effect + z * se).epsilon(1e-12));

    // Delta = 1.959964 * SE sits exactly at p = 0.05.
    CHECK(2.0 * (1.0 - normal_cdf(1.959964)) == doctest::Approx(0.05).epsilon(1e-5));
}

TEST_CASE("rmtld_test tau rule") {
    const SurvivalData e = {{1, 1}, {6, 0}};
    const SurvivalData c = {{2, 1}, {4, 0}};
    CHECK_THROWS_AS(rmtld_test(e, c, 1, 5.0, 0.05), restriction_error);
    CHECK_NOTHROW(rmtld_test(e, c, 1, 4.0, 0.05));
}

TEST_CASE("rmtld_test uses only data at or before tau") {
    RngStream rng(23, 0);
    const auto e = testutil::simulate(testutil::expo(0.12, 0.07), 250, 28.0, rng);
    const auto c = testutil::simulate(testutil::expo(0.09, 0.07), 250, 28.0, rng);
    const double tau = 9.0;
    const TestResult base = rmtld_test(e, c, 1, tau, 0.05);

    auto truncate = [tau](SurvivalData d) {
        for (auto& obs : d)
            if (obs.time > tau) obs = {tau, 0};
        return d;
    };
    const TestResult trunc = rmtld_test(truncate(e), truncate(c), 1, tau, 0.05);
    CHECK(trunc.effect == base.effect);
    CHECK(trunc.statistic == base.statistic);
    CHECK(trunc.p_value == base.p_value);
}

TEST_CASE("logrank hand example") {
    const SurvivalData e = {{1, 1}};
    const SurvivalData c = {{2, 1}};
    const TestResult r = logrank_test(e, c, 1);
    CHECK(r.statistic == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::fabs(r.p_value - 0.3173) < 1e-4);

    const TestResult swapped = logrank_test(c, e, 1);
    CHECK(swapped.statistic == doctest::Approx(r.statistic).epsilon(1e-12));
    CHECK(swapped.p_value == doctest::Approx(r.p_value).epsilon(1e-12));
}

TEST_CASE("logrank identical groups and degenerate input") {
    RngStream rng(24, 0);
    const auto data = testutil::simulate(testutil::expo(0.1, 0.05), 100, 20.0, rng);
    CHECK(logrank_test(data, data, 1).statistic == doctest::Approx(0.0).scale(1));

    const SurvivalData no_events = {{1, 0}, {2, 2}};
    const SurvivalData no_events2 = {{3, 0}, {4, 2}};
    CHECK_THROWS_AS(logrank_test(no_events, no_events2, 1), input_error);
}

TEST_CASE("gray test basics") {
    RngStream rng(25, 0);
    const auto data = testutil::simulate(testutil::expo(0.1, 0.06), 120, 22.0, rng);
    CHECK(gray_test(data, data, 1).statistic == doctest::Approx(0.0).scale(1));

    const auto other = testutil::simulate(testutil::expo(0.14, 0.06), 120, 22.0, rng);
    const TestResult r = gray_test(data, other, 1);
    const TestResult swapped = gray_test(other, data, 1);
    CHECK(swapped.statistic == doctest::Approx(r.statistic).epsilon(1e-10));
    CHECK(swapped.p_value == doctest::Approx(r.p_value).epsilon(1e-10));
    CHECK(swapped.effect == doctest::Approx(-r.effect).epsilon(1e-10));

    const SurvivalData no_events = {{1, 0}, {2, 2}};
    CHECK_THROWS_AS(gray_test(no_events, no_events, 1), input_error);
}

TEST_CASE("gray reduces to log-rank without competing events or censoring") {
    const CompetingRisksModel me{CauseSpecificParams::weibull(1.0, 0.15),
                                 CauseSpecificParams::weibull(1.0, 1e-9)};
    const CompetingRisksModel mc{CauseSpecificParams::weibull(1.0, 0.10),
                                 CauseSpecificParams::weibull(1.0, 1e-9)};
    RngStream rng(26, 0);
    const auto e = testutil::simulate(me, 300, 0.0, rng);
    const auto c = testutil::simulate(mc, 300, 0.0, rng);
    const TestResult gr = gray_test(e, c, 1);
    const TestResult lr = logrank_test(e, c, 1);
    CHECK(gr.statistic == doctest::Approx(lr.statistic).epsilon(0.10));
}

TEST_CASE("gray test p-value vs permutation oracle") {
    // Simulated unequal groups; the analytic chi-square p must agree with a
    // label-permutation reference within Monte-Carlo error.
    const CompetingRisksModel me{CauseSpecificParams::weibull(1.2, 0.118),
                                 CauseSpecificParams::weibull(1.0, 0.05)};
    const CompetingRisksModel mc{CauseSpecificParams::weibull(1.0, 0.085),
                                 CauseSpecificParams::weibull(1.0, 0.05)};
    RngStream rng(27, 0);
    const auto e = testutil::simulate(me, 200, 30.0, rng);
    const auto c = testutil::simulate(mc, 200, 30.0, rng);
    const TestResult r = gray_test(e, c, 1);
    CAPTURE(r.p_value);
    REQUIRE(r.p_value > 0.01);
    REQUIRE(r.p_value < 0.2);

    SurvivalData pooled(e.begin(), e.end());
    pooled.insert(pooled.end(), c.begin(), c.end());
    const std::size_t ne = e.size();
    RngStream perm_rng(28, 0);
    const int perms = 2000;
    int at_least = 0;
    SurvivalData shuffled = pooled;
    for (int p = 0; p < perms; ++p) {
        for (std::size_t i = shuffled.size(); i > 1; --i)
            std::swap(shuffled[i - 1], shuffled[perm_rng.uniform_index(i)]);
        const std::span<const Observation> pe(shuffled.data(), ne);
        const std::span<const Observation> pc(shuffled.data() + ne,
                                              shuffled.size() - ne);
        at_least += gray_test(pe, pc, 1).statistic >= r.statistic;
    }
    const double p_perm = static_cast<double>(at_least) / perms;
    CHECK(std::fabs(r.p_value - p_perm) < 0.02);
}

TEST_CASE("rank tests stay well defined under heavy ties") {
    // Round times to a coarse grid so events, censorings and both causes
    // collide at the same knots.
    const auto round_half = [](SurvivalData d) {
        for (auto& obs : d) obs.time = std::max(0.5, std::round(obs.time * 2.0) / 2.0);
        return d;
    };
    RngStream rng(29, 0);
    const auto e = round_half(
        testutil::simulate(testutil::expo(0.14, 0.07), 250, 18.0, rng));
    const auto c = round_half(
        testutil::simulate(testutil::expo(0.09, 0.07), 250, 18.0, rng));

    const TestResult lr = logrank_test(e, c, 1);
    CHECK(std::isfinite(lr.statistic));
    CHECK(lr.p_value >= 0.0);
    CHECK(lr.p_value <= 1.0);

    const TestResult gr = gray_test(e, c, 1);
    CHECK(std::isfinite(gr.statistic));
    CHECK(gr.p_value >= 0.0);
    CHECK(gr.p_value <= 1.0);
    const TestResult gr_swap = gray_test(c, e, 1);
    CHECK(gr_swap.statistic == doctest::Approx(gr.statistic).epsilon(1e-10));

    const TestResult rt = rmtld_test(e, c, 1, 10.0, 0.05);
    CHECK(std::isfinite(rt.statistic));

    // Cause 2 works symmetrically.
    const TestResult gr2 = gray_test(e, c, 2);
    CHECK(std::isfinite(gr2.statistic));
}

TEST_CASE("type-I error of all three tests near nominal (small run)") {
    // A quick 500-replicate calibration check; the full 2000-replicate runs
    // live in the acceptance suite.
    const auto m = testutil::expo(0.1, 0.07);
    const double tau = 10.0;
    int rej_lr = 0, rej_gray = 0, rej_rmtld = 0;
    const int reps = 500, n = 150;
    for (int r = 0; r < reps; ++r) {
        RngStream rng(626, static_cast<std::uint64_t>(r));
        const auto e = testutil::simulate(m, n, 30.0, rng);
        const auto c = testutil::simulate(m, n, 30.0, rng);
        rej_lr += logrank_test(e, c, 1).p_value < 0.05;
        rej_gray += gray_test(e, c, 1).p_value < 0.05;
        rej_rmtld += rmtld_test(e, c, 1, tau, 0.05).p_value < 0.05;
    }
    CHECK(std::fabs(rej_lr / 500.0 - 0.05) < 0.03);
    CHECK(std::fabs(rej_gray / 500.0 - 0.05) < 0.03);
    CHECK(std::fabs(rej_rmtld / 500.0 - 0.05) < 0.03);
}

TEST_CASE("rmtld CI covers the true difference near nominal rate (small run)") {
    const auto me = testutil::expo(0.14, 0.1);
    const auto mc = testutil::expo(0.10, 0.1);
    const double tau = 10.0;
    const double true_delta = rmtl_true(me, 1, tau) - rmtl_true(mc, 1, tau);
    int covered = 0;
    const int reps = 400;
    for (int r = 0; r < reps; ++r) {
        RngStream rng(727, static_cast<std::uint64_t>(r));
        const auto e = testutil::simulate(me, 400, 30.0, rng);
        const auto c = testutil::simulate(mc, 400, 30.0, rng);
        const TestResult t = rmtld_test(e, c, 1, tau, 0.05);
        covered += *t.ci_low <= true_delta && true_delta <= *t.ci_high;
    }
    CHECK(std::fabs(covered / 400.0 - 0.95) < 0.035);
}
