#include "doctest.h"

#include "loadcast/error.hpp"
#include "loadcast/experiment.hpp"

#include <cmath>
#include <sstream>

using namespace loadcast;

namespace {

ExperimentSpec small_spec(FeatureMode mode, std::uint64_t seed = 1) {
    ExperimentSpec s;
    s.scenario_id = "small";
    s.mode = mode;
    s.window = 6;
    s.train.hidden = 4;
    s.train.max_epochs = 2;
    s.seed = seed;
    return s;
}

const RoadSeries& small_road() {
    static const RoadSeries road = synthesize_road_series(5, 1);
    return road;
}

SequenceWindow calls_window(std::vector<double> calls, double target) {
    SequenceWindow w;
    w.dim = 1;
    w.steps = calls.size();
    w.inputs = std::move(calls);
    w.target = {target};
    return w;
}

}  // namespace

TEST_CASE("naive baseline") {
    std::vector<SequenceWindow> flat{calls_window({2, 2, 2}, 2), calls_window({2, 2, 2}, 2)};
    CHECK(naive_baseline(flat) == 0.0);
    std::vector<SequenceWindow> alternating{calls_window({1, 0, 1}, 0), calls_window({0, 1, 0}, 1),
                                            calls_window({1, 0, 1}, 0)};
    CHECK(naive_baseline(alternating) == 1.0);
    CHECK_THROWS_AS(naive_baseline({}), EmptyBatch);
}

TEST_CASE("a silent network is a degenerate target") {
    auto s = small_spec(FeatureMode::NetRoad);
    s.scenario.lambda = 0.0;
    s.scenario.handover_prob = 0.0;
    CHECK_THROWS_AS(prepare_data(s, small_road()), DegenerateFeature);
}

TEST_CASE("statistics come from the training days only") {
    const auto spec = small_spec(FeatureMode::NetRoad);
    const auto d = prepare_data(spec, small_road());
    CHECK(d.split.train.size() == 3 * 288);

    // independent recomputation over the training days
    double mean[3] = {}, var[3] = {};
    const std::size_t n = d.split.train.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = d.raw[i];
        mean[0] += r.flow, mean[1] += r.speed, mean[2] += r.calls;
    }
    for (double& m : mean) m /= n;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = d.raw[i];
        var[0] += (r.flow - mean[0]) * (r.flow - mean[0]);
        var[1] += (r.speed - mean[1]) * (r.speed - mean[1]);
        var[2] += (r.calls - mean[2]) * (r.calls - mean[2]);
    }
    for (int f = 0; f < 3; ++f) {
        CHECK(d.stats.mean[f] == doctest::Approx(mean[f]).epsilon(1e-12));
        CHECK(d.stats.stddev[f] == doctest::Approx(std::sqrt(var[f] / n)).epsilon(1e-12));
    }
    const auto whole = fit_normalizer(d.raw);
    CHECK_FALSE(whole == d.stats);

    CHECK(d.windows.train.size() == 3 * 288 - 6);
    CHECK(d.windows.val.size() == 288 - 6);
    CHECK(d.windows.test.size() == 288 - 6);
}

TEST_CASE("both modes see the same calls") {
    const auto a = prepare_data(small_spec(FeatureMode::Net, 4), small_road());
    const auto b = prepare_data(small_spec(FeatureMode::NetRoad, 4), small_road());
    CHECK(a.calls.counts == b.calls.counts);
    CHECK(a.windows.train.front().dim == 1);
    CHECK(b.windows.train.front().dim == 3);
    const auto c = prepare_data(small_spec(FeatureMode::Net, 5), small_road());
    CHECK_FALSE(a.calls.counts == c.calls.counts);
}

TEST_CASE("runs are deterministic and reports round-trip through JSON") {
    const auto spec = small_spec(FeatureMode::NetRoad, 2);
    const auto r1 = run_experiment(spec, small_road());
    const auto r2 = run_experiment(spec, small_road());
    CHECK(r1 == r2);
    CHECK(r1.epochs == 2);
    CHECK(r1.train_loss.size() == 2);
    CHECK(r1.wall_ms == 0.0);
    CHECK(std::isfinite(r1.test_mae));
    CHECK(r1.test_mae_calls == doctest::Approx(r1.test_mae * r1.norm_std[2]));
    CHECK(run_report_from_json(to_json(r1)) == r1);
    CHECK(run_report_from_json(nlohmann::json::parse(to_json(r1).dump())) == r1);

    auto serial = spec;
    serial.train.exec = Exec::Serial;
    CHECK(run_experiment(serial, small_road()) == r1);
}

TEST_CASE("grid runs every scenario in both modes") {
    std::vector<ExperimentSpec> specs;
    for (const auto& sc : table1_scenarios()) {
        for (auto mode : {FeatureMode::Net, FeatureMode::NetRoad}) {
            auto s = small_spec(mode);
            s.scenario_id = sc.id;
            s.scenario = sc.config;
            s.train.max_epochs = 1;
            specs.push_back(s);
        }
    }
    CHECK(specs.size() == 14);
    const auto rows = run_scenario_grid(specs, small_road());
    REQUIRE(rows.size() == 14);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        INFO(rows[i].error);
        REQUIRE(rows[i].report.has_value());
        CHECK(rows[i].report->scenario_id == specs[i].scenario_id);
        CHECK(rows[i].report->mode == to_string(specs[i].mode));
    }
    const auto serial = run_scenario_grid(std::span(specs).first(4), small_road(), 1);
    for (std::size_t i = 0; i < 4; ++i) CHECK(*serial[i].report == *rows[i].report);

    CHECK_THROWS_AS(run_scenario_grid({}, small_road()), InvalidArgument);
}

TEST_CASE("failed grid rows carry their error") {
    auto bad = small_spec(FeatureMode::Net);
    bad.scenario.lambda = 0.0;
    bad.scenario.handover_prob = 0.0;
    std::vector<ExperimentSpec> specs{bad};
    const auto rows = run_scenario_grid(specs, small_road());
    CHECK_FALSE(rows[0].report.has_value());
    CHECK(rows[0].error.rfind("features:DegenerateFeature", 0) == 0);
    CHECK(metric_rows(rows).empty());
}

TEST_CASE("scenario table") {
    const auto t = table1_scenarios();
    REQUIRE(t.size() == 7);
    CHECK(per_delta(1) == 0.2);
    CHECK(t[0].config.handover_prob == 1.0);
    CHECK(t[4].config.handover_prob == 0.0);
    CHECK(t[5].config.lambda == doctest::Approx(0.6));
    CHECK(t[6].config.cell_range == 6.0);
}

TEST_CASE("metrics and comparison CSV") {
    std::vector<MetricRow> rows{{"a", 0.2, 0.5, 1.5, "net", 1, 0.25, 0.3, 7, 0},
                                {"a", 0.2, 0.5, 1.5, "netroad", 1, 0.1, 0.125, 9, 12.5},
                                {"b", 0.6, 0.1 + 0.2, 6, "net", 2, 1.0 / 3.0, 0.5, 50, 0}};
    std::stringstream ss;
    write_metrics_csv(ss, rows);
    const auto back = read_metrics_csv(ss);
    REQUIRE(back.size() == 3);
    CHECK(back[2].handover_prob == 0.1 + 0.2);
    CHECK(back[2].test_mae == 1.0 / 3.0);
    CHECK(back[1].wall_ms == 12.5);
    CHECK(back[1].mode == "netroad");

    std::stringstream cmp;
    write_comparison_csv(cmp, rows);
    std::string header, line;
    std::getline(cmp, header);
    CHECK(header == "scenario_id,lambda,h,range,net_mae,netroad_mae,ratio,seeds");
    std::getline(cmp, line);
    CHECK(line == "a,0.2,0.5,1.5,0.25,0.1,0.4,1");

    std::stringstream bad("scenario_id,x\n");
    CHECK_THROWS_AS(read_metrics_csv(bad), MalformedRow);
    std::stringstream short_row("scenario_id,lambda,h,range,mode,seed,test_mae,val_mae,epochs,wall_ms\na,1,2\n");
    CHECK_THROWS_AS(read_metrics_csv(short_row), MalformedRow);
}
