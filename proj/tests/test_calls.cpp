#include "doctest.h"

#include "loadcast/calls.hpp"
#include "loadcast/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

using namespace loadcast;

namespace {

struct Steady {
    std::vector<std::int64_t> flow, segment;
    std::vector<double> speed;
    Steady(std::size_t n, std::int64_t f, double v) : flow(n, f), segment(n, 0), speed(n, v) {}
};

struct Moments {
    double mean = 0, var = 0, se = 0;
};

Moments moments(const std::vector<std::int64_t>& xs, std::size_t skip = 1) {
    // the first interval receives no spill-over from a predecessor
    Moments m;
    const double n = static_cast<double>(xs.size() - skip);
    for (std::size_t i = skip; i < xs.size(); ++i) m.mean += static_cast<double>(xs[i]);
    m.mean /= n;
    for (std::size_t i = skip; i < xs.size(); ++i) m.var += (xs[i] - m.mean) * (xs[i] - m.mean);
    m.var /= n - 1;
    m.se = std::sqrt(m.var / n);
    return m;
}

ScenarioConfig scenario(double lambda, double h, double range, std::uint64_t seed = 1) {
    ScenarioConfig c;
    c.lambda = lambda;
    c.handover_prob = h;
    c.cell_range = range;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("expected_calls closed form") {
    CHECK(expected_calls(100, 60, scenario(0.0, 1.0, 1.5)) == doctest::Approx(100.0));
    CHECK(expected_calls(0, 60, scenario(0.3, 0.7, 1.5)) == 0.0);
    // 100 * (0.5 + 0.2 * 1.5 min)
    CHECK(expected_calls(100, 60, scenario(0.2, 0.5, 1.5)) == doctest::Approx(80.0));
    CHECK_THROWS_AS(expected_calls(100, 0.0, scenario(0.2, 0.5, 1.5)), ZeroSpeedInterval);
}

TEST_CASE("dwell time: floor and cap") {
    CHECK(dwell_minutes(60, scenario(0.2, 0, 1.5)) == doctest::Approx(1.5));
    CHECK(dwell_minutes(1, scenario(0.2, 0, 1.5)) == doctest::Approx(18.0));  // 5 mph floor
    CHECK(dwell_minutes(5, scenario(0.2, 0, 6.0)) == doctest::Approx(60.0));  // 72 min capped
}

TEST_CASE("scenario validation") {
    CHECK_THROWS_AS(scenario(-0.1, 0.5, 1.5).validate(), InvalidArgument);
    CHECK_THROWS_AS(scenario(0.1, 1.5, 1.5).validate(), InvalidArgument);
    CHECK_THROWS_AS(scenario(0.1, 0.5, 0.0).validate(), InvalidArgument);
    CHECK_NOTHROW(scenario(0.0, 0.0, 0.1).validate());
}

TEST_CASE("no generation mechanism means no calls") {
    const auto road = synthesize_road_series(2, 4);
    const auto calls = simulate_calls(road, scenario(0.0, 0.0, 1.5));
    CHECK(calls.size() == road.size());
    CHECK(std::all_of(calls.counts.begin(), calls.counts.end(), [](auto c) { return c == 0; }));
    CHECK(std::accumulate(calls.vehicles.begin(), calls.vehicles.end(), std::int64_t{0}) > 0);
}

TEST_CASE("pure handover: mean count equals flow") {
    Steady s(10000, 100, 60.0);
    const auto out = simulate_intervals(s.flow, s.speed, s.segment, scenario(0.0, 1.0, 1.5, 9));
    const auto m = moments(out.counts, 0);
    CHECK(std::abs(m.mean - 100.0) <= 3.0 * m.se);
    // every vehicle contributes exactly one call
    CHECK(out.counts == out.vehicles);
}

TEST_CASE("new calls only: mean count F * lambda * dwell, against an independent oracle") {
    constexpr std::size_t n = 10000;
    const double analytic = 100.0 * 0.2 * 1.5;  // 30
    Steady s(n, 100, 60.0);
    const auto out = simulate_intervals(s.flow, s.speed, s.segment, scenario(0.2, 0.0, 1.5, 3));
    const auto m = moments(out.counts);
    CHECK(std::abs(m.mean - analytic) <= 3.0 * m.se);

    // brute force: Poisson(100) vehicles, each making Poisson(lambda * dwell) calls
    std::mt19937_64 rng(12345);
    std::poisson_distribution<int> vehicles(100.0);
    std::poisson_distribution<int> calls_per_vehicle(0.2 * 1.5);
    std::vector<std::int64_t> oracle(n);
    for (auto& c : oracle) {
        const int v = vehicles(rng);
        for (int k = 0; k < v; ++k) c += calls_per_vehicle(rng);
    }
    const auto mo = moments(oracle, 0);
    CHECK(std::abs(mo.mean - analytic) <= 3.0 * mo.se);
    // both estimators agree within their combined standard error
    CHECK(std::abs(m.mean - mo.mean) <= 3.0 * std::hypot(m.se, mo.se));
    // compound Poisson dispersion 1 + lambda * dwell
    CHECK(m.var / m.mean == doctest::Approx(1.3).epsilon(0.05));
}

TEST_CASE("mixed scenario mean matches F * (h + lambda * dwell)") {
    Steady s(10000, 100, 60.0);
    const auto cfg = scenario(0.2, 0.5, 1.5, 21);
    const auto out = simulate_intervals(s.flow, s.speed, s.segment, cfg);
    const auto m = moments(out.counts);
    CHECK(std::abs(m.mean - expected_calls(100, 60, cfg)) <= 3.0 * m.se);
}

TEST_CASE("pure Poisson case: variance matches mean within 10%") {
    // exact flow removes arrival-count randomness, so the count is Poisson
    Steady s(100000, 100, 60.0);
    auto cfg = scenario(0.2, 0.0, 1.5, 5);
    cfg.exact_flow = true;
    const auto out = simulate_intervals(s.flow, s.speed, s.segment, cfg);
    const auto m = moments(out.counts);
    CHECK(std::abs(m.var / m.mean - 1.0) < 0.10);
    CHECK(std::all_of(out.vehicles.begin(), out.vehicles.end(), [](auto v) { return v == 100; }));
}

TEST_CASE("determinism and seed sensitivity") {
    const auto road = synthesize_road_series(3, 2);
    const auto a = simulate_calls(road, scenario(0.2, 0.5, 1.5, 7));
    const auto b = simulate_calls(road, scenario(0.2, 0.5, 1.5, 7));
    const auto c = simulate_calls(road, scenario(0.2, 0.5, 1.5, 8));
    CHECK(a.counts == b.counts);
    CHECK(a.vehicles == b.vehicles);
    CHECK(a.counts != c.counts);
}

TEST_CASE("serial reference and parallel kernel agree exactly") {
    const auto road = synthesize_road_series(4, 6);
    for (double range : {1.5, 6.0}) {
        const auto cfg = scenario(0.6, 0.5, range, 13);
        const auto par = simulate_calls(road, cfg, Exec::Parallel);
        const auto ser = simulate_calls(road, cfg, Exec::Serial);
        CHECK(par.counts == ser.counts);
        CHECK(par.vehicles == ser.vehicles);
    }
}

TEST_CASE("counts are non-decreasing in h for a fixed seed") {
    Steady s(10000, 100, 60.0);
    std::vector<std::int64_t> prev;
    double prev_expect = -1.0, prev_mean = -1.0;
    for (double h : {0.0, 0.2, 0.5, 0.8, 1.0}) {
        const auto cfg = scenario(0.2, h, 1.5, 17);
        const auto out = simulate_intervals(s.flow, s.speed, s.segment, cfg);
        if (!prev.empty())
            for (std::size_t i = 0; i < prev.size(); ++i) REQUIRE(out.counts[i] >= prev[i]);
        const double mean = moments(out.counts).mean;
        CHECK(mean >= prev_mean);
        CHECK(expected_calls(100, 60, cfg) >= prev_expect);
        prev = out.counts;
        prev_mean = mean;
        prev_expect = expected_calls(100, 60, cfg);
    }
}

TEST_CASE("h = 1: total calls bound total vehicles") {
    const auto road = synthesize_road_series(40, 8);  // 11520 intervals
    const auto out = simulate_calls(road, scenario(0.2, 1.0, 1.5, 2));
    const double calls = std::accumulate(out.counts.begin(), out.counts.end(), 0.0);
    const double vehicles = std::accumulate(out.vehicles.begin(), out.vehicles.end(), 0.0);
    CHECK(calls >= 0.99 * vehicles);
}

TEST_CASE("zero speed uses the floor and is counted") {
    std::vector<std::int64_t> flow{50, 50, 0}, seg{0, 0, 0};
    std::vector<double> speed{0.0, 60.0, 0.0};
    const auto out = simulate_intervals(flow, speed, seg, scenario(0.2, 0.0, 1.5, 1));
    CHECK(out.zero_speed_warnings == 1);
}

TEST_CASE("calls spill into later intervals of the same segment only") {
    // 6 mi at 10 mph: 36 minutes of dwell
    std::vector<std::int64_t> flow{200, 0, 0, 0, 0, 0, 0, 0};
    std::vector<double> speed(8, 10.0);
    std::vector<std::int64_t> same(8, 0), split{0, 0, 0, 1, 1, 1, 1, 1};
    const auto cfg = scenario(1.0, 0.0, 6.0, 4);
    const auto a = simulate_intervals(flow, speed, same, cfg);
    const auto b = simulate_intervals(flow, speed, split, cfg);
    CHECK(a.counts[5] > 0);
    CHECK(b.counts[3] == 0);
    CHECK(b.counts[5] == 0);
    for (std::size_t i = 0; i < 3; ++i) CHECK(a.counts[i] == b.counts[i]);
}

TEST_CASE("calls CSV output") {
    const auto road = synthesize_road_series(1, 1);
    const auto calls = simulate_calls(road, scenario(0.2, 0.5, 1.5));
    std::ostringstream os;
    write_calls_csv(os, road, calls);
    const auto text = os.str();
    CHECK(text.rfind("timestamp,flow,speed,calls\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 289);
    CHECK_THROWS_AS(simulate_calls(road, [] { auto c = ScenarioConfig{}; c.delta = 60; return c; }()), InvalidArgument);
}
