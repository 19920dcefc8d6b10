#pragma once

#include "loadcast/calls.hpp"
#include "loadcast/road.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace loadcast {

inline constexpr int kSpeedLevels = 8;
inline constexpr double kSlowSpeedMph = 20.0;  // below: level 1
inline constexpr double kFastSpeedMph = 60.0;  // at or above: level 8

// Level 1 below 20 mph, 8 at or above 60 mph, and levels 2..7 for six
// equal-width bins of 20/3 mph covering [20, 60).
int discretize_speed(double speed_mph);

// Lower edge (inclusive) of each level, for tables and tests.
double speed_level_lower_edge(int level);

enum class FeatureMode { Net, NetRoad };
enum class SpeedEncoding { Level, Raw };

std::size_t input_dim(FeatureMode mode) noexcept;
std::string to_string(FeatureMode mode);
FeatureMode parse_feature_mode(const std::string& text);

// Un-normalized per-interval features in column order flow, speed, calls.
struct RawSample {
    double flow = 0.0;
    double speed = 0.0;  // discrete level, or mph under SpeedEncoding::Raw
    double calls = 0.0;
};

struct IntervalSample {
    double flow_z = 0.0;
    double speed_level_z = 0.0;
    double calls_z = 0.0;
};

std::vector<RawSample> build_raw_samples(const RoadSeries& road, const CallSeries& calls,
                                         SpeedEncoding encoding = SpeedEncoding::Level);

// Per-feature z-score statistics (population standard deviation).
struct NormStats {
    std::array<double, 3> mean{};
    std::array<double, 3> stddev{1.0, 1.0, 1.0};

    IntervalSample transform(const RawSample& x) const;
    RawSample inverse_transform(const IntervalSample& z) const;
    std::vector<IntervalSample> transform(std::span<const RawSample> xs) const;

    bool operator==(const NormStats&) const = default;
};

// Needs at least two samples. Features the mode does not feed to the model
// may be constant; they then get unit deviation. DegenerateFeature otherwise.
NormStats fit_normalizer(std::span<const RawSample> train, FeatureMode mode = FeatureMode::NetRoad);

struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const noexcept { return end - begin; }
};

struct SplitRanges {
    IndexRange train, val, test;
};

// Splits whole days in the given ratio: train and validation get the floor
// of their share, test the remainder. Every part must receive a day.
SplitRanges split_by_days(std::size_t n_points, std::size_t points_per_day,
                          std::array<double, 3> ratios = {3.0, 1.0, 1.0});

// `steps` rows of `dim` inputs (row-major) and the next `horizon` calls.
struct SequenceWindow {
    std::vector<double> inputs;
    std::size_t steps = 0;
    std::size_t dim = 0;
    std::vector<double> target;
    std::size_t anchor = 0;  // sample index of the last input row

    std::span<const double> row(std::size_t t) const { return {inputs.data() + t * dim, dim}; }
    double last_calls() const { return inputs[(steps - 1) * dim + dim - 1]; }
};

struct WindowOptions {
    std::size_t window = 18;  // M
    std::size_t horizon = 1;  // T
    FeatureMode mode = FeatureMode::NetRoad;
    // Road features in input row tau come from interval tau + road_lead: the
    // detector sits upstream of the cell, so its reading for the vehicles
    // about to enter is available at prediction time. Must not exceed the
    // horizon so a window never reads past its own targets.
    std::size_t road_lead = 1;
};

// All windows fully inside `range`: range.size() - M - T + 1 of them.
// InsufficientData when the range is shorter than M + T.
std::vector<SequenceWindow> make_windows(std::span<const IntervalSample> samples, IndexRange range,
                                         const WindowOptions& options);

struct WindowSets {
    std::vector<SequenceWindow> train, val, test;
};

WindowSets make_windows(std::span<const IntervalSample> samples, const SplitRanges& split,
                        const WindowOptions& options);

}  // namespace loadcast
