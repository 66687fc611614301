#include <doctest.h>

#include <sstream>

#include "rmtl/rmtl.hpp"

using namespace rmtl;

TEST_CASE("dataset CSV round trip") {
    GroupedDataset ds;
    ds.labels = {"treat", "control"};
    ds.groups = {{{1.5, 1}, {2.25, 0}, {7.0, 2}}, {{0.5, 1}, {3.0, 0}}};
    std::ostringstream out;
    write_dataset_csv(out, ds);

    std::istringstream in(out.str());
    const GroupedDataset back = read_dataset_csv(in);
    REQUIRE(back.labels == ds.labels);
    REQUIRE(back.groups[0].size() == 3);
    REQUIRE(back.groups[1].size() == 2);
    CHECK(back.groups[0][1].time == 2.25);
    CHECK(back.groups[0][2].status == 2);
    CHECK(back.group("control")[0].time == 0.5);
    CHECK_THROWS_AS(back.group("nope"), input_error);
}

TEST_CASE("dataset CSV error reporting carries line numbers") {
    auto expect_error = [](const std::string& text, const std::string& needle) {
        std::istringstream in(text);
        try {
            read_dataset_csv(in);
            FAIL_CHECK("expected input_error for: " << text);
        } catch (const input_error& ex) {
            CHECK(std::string(ex.what()).find(needle) != std::string::npos);
        }
    };
    expect_error("time,status\n1,1\n", "header");
    expect_error("time,status,group\nx,1,a\n", "line 2");
    expect_error("time,status,group\n1,5,a\n", "line 2");
    expect_error("time,status,group\n-1,1,a\n", "line 2");
    expect_error("time,status,group\n1,1\n", "line 2");
    expect_error("time,status,group\n", "no data rows");
    expect_error("", "empty");
}

TEST_CASE("dataset CSV tolerates blank lines and CRLF") {
    std::istringstream in("time,status,group\r\n1,1,a\r\n\r\n2,0,b\r\n");
    const GroupedDataset ds = read_dataset_csv(in);
    CHECK(ds.labels.size() == 2);
    CHECK(ds.groups[0][0].time == 1.0);
}

TEST_CASE("scenario JSON round trip") {
    ScenarioConfig sc;
    sc.name = "rt";
    sc.model_e = {CauseSpecificParams::weibull(1.3, 0.072),
                  CauseSpecificParams::gompertz(0.03, 0.02)};
    sc.model_c = {CauseSpecificParams::log_normal(2.1, 0.7),
                  CauseSpecificParams::weibull(1.0, 0.04)};
    sc.design.accrual = 18;
    sc.design.followup = 28;
    sc.design.tau = 15;
    sc.design.loss = LossModel::uniform(42.0);
    sc.censoring_target = 0.15;
    sc.iterations = 123;
    sc.master_seed = 777;
    sc.tau_rule = TauRule::min_max_follow_up;
    sc.cause = 2;

    const ScenarioConfig back = scenario_from_json(scenario_to_json(sc));
    CHECK(back.name == sc.name);
    CHECK(back.model_e.cause1.family == Family::weibull);
    CHECK(back.model_e.cause2.family == Family::gompertz);
    CHECK(back.model_e.cause2.rate == 0.03);
    CHECK(back.model_c.cause1.family == Family::log_normal);
    CHECK(back.model_c.cause1.rate == 2.1);
    CHECK(back.model_c.cause1.shape == 0.7);
    CHECK(back.design.loss.kind == LossModel::Kind::uniform);
    CHECK(back.design.loss.theta == 42.0);
    CHECK(back.censoring_target.has_value());
    CHECK(*back.censoring_target == 0.15);
    CHECK(back.iterations == 123);
    CHECK(back.master_seed == 777);
    CHECK(back.tau_rule == TauRule::min_max_follow_up);
    CHECK(back.cause == 2);
}

TEST_CASE("scenario JSON rejects unknown fields' values") {
    ScenarioConfig sc;
    sc.model_e = {CauseSpecificParams::weibull(1, 0.1),
                  CauseSpecificParams::weibull(1, 0.1)};
    sc.model_c = sc.model_e;
    sc.design.accrual = 18;
    sc.design.followup = 28;
    sc.design.tau = 15;
    json j = scenario_to_json(sc);
    j["tau_rule"] = "sometimes";
    CHECK_THROWS_AS(scenario_from_json(j), input_error);
    j["tau_rule"] = "fixed";
    j["model_E"]["cause1"]["family"] = "cauchy";
    CHECK_THROWS_AS(scenario_from_json(j), input_error);
}

TEST_CASE("csv_num formatting is stable") {
    CHECK(csv_num(0.5) == "0.5");
    CHECK(csv_num(1.0 / 3.0) == "0.3333333333");
    CHECK(csv_num(1e-9) == "1e-09");
}

TEST_CASE("power and sweep row CSV writers emit headers and rows") {
    std::vector<PowerRow> prows(1);
    prows[0].scenario = "s";
    prows[0].method = Method::rmtld_weibull;
    prows[0].n_total = 100;
    std::ostringstream out;
    write_power_rows_csv(out, prows);
    const std::string text = out.str();
    CHECK(text.find("scenario,censoring_target,method") == 0);
    CHECK(text.find("rmtld_weibull") != std::string::npos);

    std::vector<SweepRow> srows(1);
    srows[0].tau = 12.0;
    srows[0].feasible = false;
    std::ostringstream out2;
    write_sweep_rows_csv(out2, srows);
    CHECK(out2.str().find("tau,accrual,followup") == 0);
}
