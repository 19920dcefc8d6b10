#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace loadcast {

inline constexpr std::int64_t kIntervalSeconds = 300;
inline constexpr std::int64_t kSecondsPerDay = 86400;
inline constexpr std::size_t kPointsPerDay = 288;
inline constexpr double kMaxSpeedMph = 120.0;

// One 5-minute detector observation.
struct RoadRecord {
    std::int64_t timestamp = 0;  // seconds since epoch, UTC
    std::int64_t flow = 0;       // vehicles per interval
    double speed = 0.0;          // mph

    bool operator==(const RoadRecord&) const = default;
};

// A sequence of complete days of 5-minute records. Construction validates:
// every record is within bounds, each day holds all 288 slots starting at
// 00:00 UTC, and timestamps strictly increase. Days need not be consecutive
// calendar dates (work-day series skip weekends).
class RoadSeries {
public:
    RoadSeries() = default;
    explicit RoadSeries(std::vector<RoadRecord> records, std::vector<std::int64_t> imputed = {});

    std::span<const RoadRecord> records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    std::size_t days() const noexcept { return records_.size() / kPointsPerDay; }
    static constexpr std::size_t points_per_day() noexcept { return kPointsPerDay; }
    const RoadRecord& operator[](std::size_t i) const { return records_[i]; }

    // Timestamps filled by `--impute=hold`; empty for strict parses.
    const std::vector<std::int64_t>& imputed() const noexcept { return imputed_; }

    // First `days` days; used to cut a longer export to the desk-scale run.
    RoadSeries first_days(std::size_t days) const;

    bool operator==(const RoadSeries& other) const { return records_ == other.records_; }

private:
    std::vector<RoadRecord> records_;
    std::vector<std::int64_t> imputed_;
};

// Throws BoundsError when a record violates the sanity ranges.
void check_record_bounds(const RoadRecord& r);

struct ColumnMap {
    std::string timestamp = "timestamp";
    std::string flow = "flow";
    std::string speed = "speed";

    // Parses "timestamp=<col>,flow=<col>,speed=<col>" (any subset).
    static ColumnMap parse(const std::string& spec);
};

enum class Impute { None, Hold };

struct IngestOptions {
    ColumnMap columns;
    Impute impute = Impute::None;
};

// Accepts "YYYY-MM-DD[T| ]HH:MM[:SS][Z|+HH:MM|-HH:MM]" or integer epoch seconds.
std::optional<std::int64_t> parse_timestamp(std::string_view text);
std::string format_iso8601(std::int64_t epoch_seconds);

RoadSeries parse_road_csv(std::istream& in, const IngestOptions& options = {});
RoadSeries parse_road_csv(const std::string& path, const IngestOptions& options = {});

// Header `timestamp,flow,speed`; epoch-second timestamps and shortest
// round-trip decimal speeds, so parse(write(s)) == s field for field.
void write_road_csv(std::ostream& out, const RoadSeries& series);
void write_road_csv(const std::string& path, const RoadSeries& series);

// Stand-in for real detector data: weekday flow with morning and evening
// peaks, multiplicative noise, and a speed that collapses near capacity.
// Deterministic in `seed`. Days start at 2021-03-29 00:00 UTC and skip
// weekends.
RoadSeries synthesize_road_series(std::size_t days, std::uint64_t seed);

struct CorrelationMatrix {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> values;

    double at(std::size_t i, std::size_t j) const { return values[i][j]; }
};

double pearson(std::span<const double> x, std::span<const double> y);

// Pearson correlations of flow and speed, plus calls when given (must be
// aligned with the series). DegenerateSeries when a variable is constant.
CorrelationMatrix correlation_report(const RoadSeries& series,
                                     std::span<const std::int64_t> calls = {});

}  // namespace loadcast
