#pragma once

#include "loadcast/experiment.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace loadcast {

// Flat `key = value` run configuration. '#' starts a comment; blank lines
// are ignored; unknown keys and malformed values raise ConfigError.
struct AppConfig {
    std::string road;              // road CSV; empty means synthetic
    std::string impute = "none";   // none | hold
    std::string map;               // column mapping, e.g. "timestamp=ts,flow=f"
    std::string out = "out";
    std::size_t days = 20;
    std::uint64_t road_seed = 1;   // synthetic road only
    double lambda = 0.2;           // per minute
    double h = 0.5;
    double range = 1.5;            // miles
    bool exact_flow = false;
    std::string mode = "both";     // net | netroad | both
    std::string grid = "none";     // none | table1
    std::string cell = "lstm";
    std::size_t hidden = 32;
    std::size_t window = 18;
    std::size_t horizon = 1;
    std::size_t road_lead = 1;
    std::string speed_feature = "level";  // level | raw
    double lr = 1e-3;
    double rho = 0.9;
    double eps = 1e-8;
    std::size_t batch = 32;
    std::size_t epochs = 50;
    std::size_t patience = 5;
    std::string split = "3:1:1";
    std::vector<std::uint64_t> seeds{1};
    bool record_timing = false;

    // Sets one key from its text form.
    void set(const std::string& key, const std::string& value);
    void validate() const;

    static const std::vector<std::string>& keys();
    std::string get(const std::string& key) const;

    // Specs for every (scenario, seed, mode) row, in that nesting order.
    std::vector<ExperimentSpec> experiment_specs() const;
    // Loads the road CSV (first `days` days) or synthesizes one.
    RoadSeries load_road() const;
};

AppConfig parse_config(std::istream& in, AppConfig base = {});
AppConfig load_config(const std::string& path, AppConfig base = {});
// Every key with its current value; parse_config of the result restores
// an identical configuration.
std::string dump_config(const AppConfig& config);

std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace loadcast
