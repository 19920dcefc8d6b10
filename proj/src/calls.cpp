#include "loadcast/calls.hpp"

#include "loadcast/error.hpp"
#include "loadcast/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <string>

#include <omp.h>

namespace loadcast {

void ScenarioConfig::validate() const {
    auto fail = [](const std::string& msg) { throw InvalidArgument("call_simulator", msg); };
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail("lambda must be >= 0");
    if (!(handover_prob >= 0.0 && handover_prob <= 1.0)) fail("handover probability must lie in [0, 1]");
    if (!(cell_range > 0.0) || !std::isfinite(cell_range)) fail("cell range must be > 0");
    if (!(delta > 0.0) || !std::isfinite(delta)) fail("interval delta must be > 0");
}

double dwell_minutes(double speed_mph, const ScenarioConfig& config) {
    const double v = std::max(speed_mph, kSpeedFloorMph);
    return std::min(config.cell_range / v * 60.0, kMaxDwellMinutes);
}

double expected_calls(double flow, double speed_mph, const ScenarioConfig& config) {
    if (!(speed_mph > 0.0)) throw ZeroSpeedInterval("expected_calls: speed must be > 0");
    if (flow == 0.0) return 0.0;
    return flow * (config.handover_prob + config.lambda * dwell_minutes(speed_mph, config));
}

namespace {

// Simulates vehicles entering interval i; adds their calls into `counts`
// (which may be a thread-local buffer) and returns the entry count.
std::int64_t simulate_one(std::size_t i, std::span<const std::int64_t> flow, std::span<const double> speed,
                          std::span<const std::int64_t> segment, const ScenarioConfig& config,
                          std::span<std::int64_t> counts) {
    const std::int64_t f = flow[i];
    if (f <= 0) return 0;

    Rng rng(derive_seed(config.seed, "simulate", i));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double delta_min = config.delta / 60.0;

    std::vector<double> entries;  // minutes since interval start
    if (config.exact_flow) {
        entries.resize(static_cast<std::size_t>(f));
        for (auto& t : entries) t = delta_min * unif(rng);
        std::sort(entries.begin(), entries.end());
    } else {
        std::exponential_distribution<double> gap(static_cast<double>(f) / delta_min);
        for (double t = gap(rng); t < delta_min; t += gap(rng)) entries.push_back(t);
    }

    const double dwell = dwell_minutes(speed[i], config);
    const std::size_t n = counts.size();
    auto attribute = [&](double t) {
        const std::size_t j = i + static_cast<std::size_t>(std::floor(t / delta_min));
        if (j < n && segment[j] == segment[i]) ++counts[j];
    };

    std::exponential_distribution<double> next_call(config.lambda > 0.0 ? config.lambda : 1.0);
    for (double t0 : entries) {
        // the handover draw is always consumed, so streams line up across h
        if (unif(rng) < config.handover_prob) attribute(t0);
        if (config.lambda <= 0.0) continue;
        for (double s = next_call(rng); s < dwell; s += next_call(rng)) attribute(t0 + s);
    }
    return static_cast<std::int64_t>(entries.size());
}

}  // namespace

CallSeries simulate_intervals(std::span<const std::int64_t> flow, std::span<const double> speed,
                              std::span<const std::int64_t> segment, const ScenarioConfig& config, Exec exec) {
    config.validate();
    const std::size_t n = flow.size();
    if (speed.size() != n || segment.size() != n)
        throw InvalidArgument("call_simulator", "flow, speed and segment spans differ in length");

    CallSeries out;
    out.counts.assign(n, 0);
    out.vehicles.assign(n, 0);
    std::size_t warnings = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (speed[i] == 0.0 && flow[i] > 0) ++warnings;
    out.zero_speed_warnings = warnings;

    if (exec == Exec::Serial) {
        for (std::size_t i = 0; i < n; ++i) out.vehicles[i] = simulate_one(i, flow, speed, segment, config, out.counts);
        return out;
    }

#pragma omp parallel
    {
        std::vector<std::int64_t> local(n, 0);
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
            out.vehicles[static_cast<std::size_t>(i)] =
                simulate_one(static_cast<std::size_t>(i), flow, speed, segment, config, local);
#pragma omp critical(loadcast_sim_merge)
        for (std::size_t j = 0; j < n; ++j) out.counts[j] += local[j];
    }
    return out;
}

CallSeries simulate_calls(const RoadSeries& series, const ScenarioConfig& config, Exec exec) {
    if (config.delta != static_cast<double>(kIntervalSeconds))
        throw InvalidArgument("call_simulator", "scenario delta must match the 300 s road interval");
    const auto recs = series.records();
    std::vector<std::int64_t> flow(recs.size()), segment(recs.size());
    std::vector<double> speed(recs.size());
    std::int64_t seg = 0;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        if (i > 0 && recs[i].timestamp - recs[i - 1].timestamp != kIntervalSeconds) ++seg;
        flow[i] = recs[i].flow;
        speed[i] = recs[i].speed;
        segment[i] = seg;
    }
    return simulate_intervals(flow, speed, segment, config, exec);
}

void write_calls_csv(std::ostream& out, const RoadSeries& series, const CallSeries& calls) {
    if (calls.size() != series.size())
        throw InvalidArgument("call_simulator", "call series not aligned with road series");
    out << "timestamp,flow,speed,calls\n";
    char buf[64];
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& r = series[i];
        auto res = std::to_chars(buf, buf + sizeof buf, r.speed);
        out << r.timestamp << ',' << r.flow << ',' << std::string_view(buf, res.ptr - buf) << ','
            << calls.counts[i] << '\n';
    }
}

}  // namespace loadcast
