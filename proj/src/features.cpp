#include "loadcast/features.hpp"

#include "loadcast/error.hpp"

#include <cmath>

namespace loadcast {

int discretize_speed(double speed_mph) {
    if (speed_mph < kSlowSpeedMph) return 1;
    if (speed_mph >= kFastSpeedMph) return kSpeedLevels;
    // (s - 20) / (20/3) written as a single division keeps bin edges exact
    const int bin = static_cast<int>(std::floor((speed_mph - kSlowSpeedMph) * 3.0 / 20.0));
    return std::min(2 + bin, kSpeedLevels - 1);
}

double speed_level_lower_edge(int level) {
    if (level <= 1) return 0.0;
    if (level >= kSpeedLevels) return kFastSpeedMph;
    return kSlowSpeedMph + (level - 2) * 20.0 / 3.0;
}

std::size_t input_dim(FeatureMode mode) noexcept { return mode == FeatureMode::Net ? 1 : 3; }

std::string to_string(FeatureMode mode) { return mode == FeatureMode::Net ? "net" : "netroad"; }

FeatureMode parse_feature_mode(const std::string& text) {
    if (text == "net") return FeatureMode::Net;
    if (text == "netroad" || text == "net&road") return FeatureMode::NetRoad;
    throw ConfigError("unknown feature mode '" + text + "' (expected net or netroad)");
}

std::vector<RawSample> build_raw_samples(const RoadSeries& road, const CallSeries& calls, SpeedEncoding encoding) {
    if (calls.size() != road.size())
        throw InvalidArgument("features", "call series not aligned with road series");
    std::vector<RawSample> out(road.size());
    for (std::size_t i = 0; i < road.size(); ++i) {
        out[i].flow = static_cast<double>(road[i].flow);
        out[i].speed = encoding == SpeedEncoding::Level ? discretize_speed(road[i].speed) : road[i].speed;
        out[i].calls = static_cast<double>(calls.counts[i]);
    }
    return out;
}

IntervalSample NormStats::transform(const RawSample& x) const {
    return {(x.flow - mean[0]) / stddev[0], (x.speed - mean[1]) / stddev[1], (x.calls - mean[2]) / stddev[2]};
}

RawSample NormStats::inverse_transform(const IntervalSample& z) const {
    return {z.flow_z * stddev[0] + mean[0], z.speed_level_z * stddev[1] + mean[1], z.calls_z * stddev[2] + mean[2]};
}

std::vector<IntervalSample> NormStats::transform(std::span<const RawSample> xs) const {
    std::vector<IntervalSample> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(transform(x));
    return out;
}

NormStats fit_normalizer(std::span<const RawSample> train, FeatureMode mode) {
    if (train.size() < 2) throw InsufficientData("fit_normalizer needs at least 2 samples");
    static constexpr const char* names[3] = {"flow", "speed_level", "calls"};
    const double n = static_cast<double>(train.size());
    NormStats stats;
    for (int f = 0; f < 3; ++f) {
        auto get = [f](const RawSample& s) { return f == 0 ? s.flow : f == 1 ? s.speed : s.calls; };
        double sum = 0.0;
        for (const auto& s : train) sum += get(s);
        const double mean = sum / n;
        double ss = 0.0;
        for (const auto& s : train) ss += (get(s) - mean) * (get(s) - mean);
        const double sd = std::sqrt(ss / n);
        const bool used = mode == FeatureMode::NetRoad || f == 2;
        if (!(sd > 0.0)) {
            if (used) throw DegenerateFeature(std::string("feature '") + names[f] + "' has zero variance on the training split");
            stats.mean[f] = mean;
            stats.stddev[f] = 1.0;
            continue;
        }
        stats.mean[f] = mean;
        stats.stddev[f] = sd;
    }
    return stats;
}

SplitRanges split_by_days(std::size_t n_points, std::size_t points_per_day, std::array<double, 3> ratios) {
    if (points_per_day == 0 || n_points % points_per_day != 0)
        throw InvalidArgument("features", "series length is not a whole number of days");
    for (double r : ratios)
        if (!(r > 0.0)) throw InvalidArgument("features", "split ratios must be positive");
    const std::size_t days = n_points / points_per_day;
    const double total = ratios[0] + ratios[1] + ratios[2];
    const auto train_days = static_cast<std::size_t>(std::floor(days * ratios[0] / total + 1e-9));
    const auto val_days = static_cast<std::size_t>(std::floor(days * ratios[1] / total + 1e-9));
    if (train_days == 0 || val_days == 0 || train_days + val_days >= days)
        throw InsufficientData(std::to_string(days) + " days cannot be split into three non-empty parts");
    SplitRanges s;
    s.train = {0, train_days * points_per_day};
    s.val = {s.train.end, s.train.end + val_days * points_per_day};
    s.test = {s.val.end, n_points};
    return s;
}

std::vector<SequenceWindow> make_windows(std::span<const IntervalSample> samples, IndexRange range,
                                         const WindowOptions& options) {
    const std::size_t m = options.window, t = options.horizon;
    if (m < 1 || t < 1) throw InvalidArgument("features", "window and horizon must be >= 1");
    if (options.mode == FeatureMode::NetRoad && options.road_lead > t)
        throw InvalidArgument("features", "road_lead may not exceed the horizon");
    if (range.end > samples.size() || range.begin > range.end)
        throw InvalidArgument("features", "window range outside the sample series");
    if (range.size() < m + t)
        throw InsufficientData("range of " + std::to_string(range.size()) + " samples is shorter than M + T = " +
                               std::to_string(m + t));

    const std::size_t dim = input_dim(options.mode);
    const std::size_t count = range.size() - m - t + 1;
    std::vector<SequenceWindow> out(count);
    for (std::size_t w = 0; w < count; ++w) {
        SequenceWindow& win = out[w];
        const std::size_t first = range.begin + w;
        win.steps = m;
        win.dim = dim;
        win.anchor = first + m - 1;
        win.inputs.reserve(m * dim);
        for (std::size_t k = 0; k < m; ++k) {
            const std::size_t idx = first + k;
            if (options.mode == FeatureMode::NetRoad) {
                const auto& road = samples[idx + options.road_lead];
                win.inputs.push_back(road.flow_z);
                win.inputs.push_back(road.speed_level_z);
            }
            win.inputs.push_back(samples[idx].calls_z);
        }
        for (std::size_t h = 1; h <= t; ++h) win.target.push_back(samples[win.anchor + h].calls_z);
    }
    return out;
}

WindowSets make_windows(std::span<const IntervalSample> samples, const SplitRanges& split,
                        const WindowOptions& options) {
    return {make_windows(samples, split.train, options), make_windows(samples, split.val, options),
            make_windows(samples, split.test, options)};
}

}  // namespace loadcast
