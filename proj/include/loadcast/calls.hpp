#pragma once

#include "loadcast/road.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace loadcast {

inline constexpr double kSpeedFloorMph = 5.0;
inline constexpr double kMaxDwellMinutes = 60.0;

// Stochastic-model and cell parameters of one scenario.
struct ScenarioConfig {
    double lambda = 0.2;          // new service requests per minute per vehicle
    double handover_prob = 0.5;   // P(vehicle enters with an ongoing call)
    double cell_range = 1.5;      // miles of highway covered by the cell
    double delta = 300.0;         // interval length, seconds
    std::uint64_t seed = 0;
    bool exact_flow = false;      // place exactly F arrivals instead of Poisson(F)

    void validate() const;  // throws InvalidArgument
};

struct CallSeries {
    std::vector<std::int64_t> counts;    // calls attributed to each interval
    std::vector<std::int64_t> vehicles;  // simulated vehicle entries per interval
    std::size_t zero_speed_warnings = 0; // intervals with speed 0 and flow > 0

    std::size_t size() const noexcept { return counts.size(); }
};

enum class Exec { Serial, Parallel };

// Dwell in minutes at the given speed, after the speed floor and dwell cap.
double dwell_minutes(double speed_mph, const ScenarioConfig& config);

// Closed-form mean calls for one interval: F * (h + lambda * dwell).
// Throws ZeroSpeedInterval when speed <= 0.
double expected_calls(double flow, double speed_mph, const ScenarioConfig& config);

// Interval-level kernel. `segment[i]` labels runs of contiguous intervals;
// calls whose time falls past the end of a run are dropped rather than
// carried into the next, unrelated run. Each interval draws from its own
// stream derive_seed(seed, "simulate", i), so the serial and parallel paths
// produce identical output.
CallSeries simulate_intervals(std::span<const std::int64_t> flow, std::span<const double> speed,
                              std::span<const std::int64_t> segment, const ScenarioConfig& config,
                              Exec exec = Exec::Parallel);

CallSeries simulate_calls(const RoadSeries& series, const ScenarioConfig& config,
                          Exec exec = Exec::Parallel);

// Output CSV: `timestamp,flow,speed,calls`.
void write_calls_csv(std::ostream& out, const RoadSeries& series, const CallSeries& calls);

}  // namespace loadcast
