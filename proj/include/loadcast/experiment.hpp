#pragma once

#include "loadcast/calls.hpp"
#include "loadcast/features.hpp"
#include "loadcast/road.hpp"
#include "loadcast/trainer.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace loadcast {

struct ExperimentSpec {
    std::string scenario_id = "custom";
    ScenarioConfig scenario;
    FeatureMode mode = FeatureMode::NetRoad;
    std::size_t window = 18;   // M
    std::size_t horizon = 1;   // T
    std::size_t road_lead = 1;
    SpeedEncoding speed_encoding = SpeedEncoding::Level;
    std::array<double, 3> split{3.0, 1.0, 1.0};  // train:val:test, by whole days
    TrainConfig train;
    std::uint64_t seed = 1;
    bool record_timing = false;

    void validate() const;
    // Copy with the scenario seed taken from `seed`; the call trace depends
    // only on (scenario, seed), so both feature modes see the same calls.
    ScenarioConfig effective_scenario() const;
};

struct RunReport {
    std::string scenario_id;
    double lambda = 0.0;
    double handover_prob = 0.0;
    double cell_range = 0.0;
    std::string mode;
    std::string cell;
    std::uint64_t seed = 0;
    std::size_t window = 0;
    std::size_t horizon = 0;
    std::vector<double> train_loss;
    std::vector<double> val_mae_curve;
    std::size_t epochs = 0;
    std::size_t best_epoch = 0;
    double val_mae = 0.0;        // best epoch, normalized scale
    double test_mae = 0.0;       // normalized scale
    double test_mae_calls = 0.0; // in calls per interval
    double naive_test_mae = 0.0; // persistence baseline, normalized scale
    std::array<double, 3> norm_mean{};
    std::array<double, 3> norm_std{};
    std::size_t train_windows = 0, val_windows = 0, test_windows = 0;
    double wall_ms = 0.0;

    bool operator==(const RunReport&) const = default;
};

nlohmann::json to_json(const RunReport& r);
RunReport run_report_from_json(const nlohmann::json& j);

// Everything up to training: simulated calls, fitted statistics, windows.
struct PreparedData {
    CallSeries calls;
    std::vector<RawSample> raw;
    SplitRanges split;
    NormStats stats;
    WindowSets windows;
};

PreparedData prepare_data(const ExperimentSpec& spec, const RoadSeries& road);

// Simulate, normalize with training statistics, train with early stopping on
// validation MAE, and report MAE on the test split.
RunReport run_experiment(const ExperimentSpec& spec, const RoadSeries& road);

// Last-value persistence: predicts the next calls value as the last
// observed one. EmptyBatch on an empty set.
double naive_baseline(std::span<const SequenceWindow> windows);

struct GridRow {
    ExperimentSpec spec;
    std::optional<RunReport> report;
    std::string error;  // "module:kind: message" when the row failed
};

// Runs every spec; failures are recorded per row. Rows run concurrently on
// up to `threads` OpenMP threads (0: runtime default); output order follows
// the input order.
std::vector<GridRow> run_scenario_grid(std::span<const ExperimentSpec> specs, const RoadSeries& road,
                                       std::size_t threads = 0);

struct NamedScenario {
    std::string id;
    ScenarioConfig config;
};

// The seven evaluated scenarios: h in {1, .8, .5, .2, 0} at lambda = 1/delta
// and 1.5 mi; lambda = 3/delta at h = .5; a 6 mi cell at h = .5.
std::vector<NamedScenario> table1_scenarios();

// Per-minute rate equivalent to k calls per 5-minute interval.
constexpr double per_delta(double k) { return k / 5.0; }

// One line of the metrics CSV:
// scenario_id,lambda,h,range,mode,seed,test_mae,val_mae,epochs,wall_ms
// Failed grid rows are omitted.
struct MetricRow {
    std::string scenario_id;
    double lambda = 0.0, handover_prob = 0.0, cell_range = 0.0;
    std::string mode;
    std::uint64_t seed = 0;
    double test_mae = 0.0, val_mae = 0.0;
    std::size_t epochs = 0;
    double wall_ms = 0.0;
};

std::vector<MetricRow> metric_rows(std::span<const GridRow> rows);
void write_metrics_csv(std::ostream& out, std::span<const MetricRow> rows);
std::vector<MetricRow> read_metrics_csv(std::istream& in);

// One line per scenario (first-appearance order) with the seed-averaged
// Net and Net&Road test MAE and their ratio:
// scenario_id,lambda,h,range,net_mae,netroad_mae,ratio,seeds
void write_comparison_csv(std::ostream& out, std::span<const MetricRow> rows);

// Per-epoch curves of one run: epoch,train_loss,val_mae
void write_curve_csv(std::ostream& out, const RunReport& report);

}  // namespace loadcast
