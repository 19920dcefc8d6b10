#include "loadcast/config.hpp"

#include "loadcast/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace loadcast {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string num(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError("key '" + key + "': '" + v + "' is not a number");
    return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size() || v.empty())
        throw ConfigError("key '" + key + "': '" + v + "' is not a non-negative integer");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("key '" + key + "': '" + v + "' is not a boolean");
}

std::string one_of(const std::string& key, const std::string& v, std::initializer_list<const char*> allowed) {
    for (const char* a : allowed)
        if (v == a) return v;
    std::string list;
    for (const char* a : allowed) list += std::string(list.empty() ? "" : "|") + a;
    throw ConfigError("key '" + key + "': '" + v + "' not one of " + list);
}

std::array<double, 3> parse_split(const std::string& text) {
    std::array<double, 3> out{};
    std::stringstream ss(text);
    std::string part;
    std::size_t k = 0;
    while (std::getline(ss, part, ':')) {
        if (k >= 3) throw ConfigError("key 'split': expected three ratios a:b:c");
        out[k++] = to_double("split", trim(part));
    }
    if (k != 3) throw ConfigError("key 'split': expected three ratios a:b:c");
    for (double r : out)
        if (!(r > 0)) throw ConfigError("key 'split': ratios must be positive");
    return out;
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) seeds.push_back(to_uint("seeds", trim(part)));
    if (seeds.empty()) throw ConfigError("key 'seeds': empty list");
    return seeds;
}

const std::vector<std::string>& AppConfig::keys() {
    static const std::vector<std::string> k = {
        "road",   "impute", "map",    "out",      "days",     "road_seed",     "lambda", "h",
        "range",  "exact_flow", "mode", "grid",   "cell",     "hidden",        "window", "horizon",
        "road_lead", "speed_feature", "lr", "rho", "eps",     "batch",         "epochs", "patience",
        "split",  "seeds",  "record_timing"};
    return k;
}

void AppConfig::set(const std::string& key, const std::string& raw) {
    const std::string v = trim(raw);
    if (key == "road") road = v;
    else if (key == "impute") impute = one_of(key, v, {"none", "hold"});
    else if (key == "map") map = v;
    else if (key == "out") out = v;
    else if (key == "days") days = to_uint(key, v);
    else if (key == "road_seed") road_seed = to_uint(key, v);
    else if (key == "lambda") lambda = to_double(key, v);
    else if (key == "h") h = to_double(key, v);
    else if (key == "range") range = to_double(key, v);
    else if (key == "exact_flow") exact_flow = to_bool(key, v);
    else if (key == "mode") mode = one_of(key, v, {"net", "netroad", "both"});
    else if (key == "grid") grid = one_of(key, v, {"none", "table1"});
    else if (key == "cell") cell = one_of(key, v, {"lstm", "gru"});
    else if (key == "hidden") hidden = to_uint(key, v);
    else if (key == "window") window = to_uint(key, v);
    else if (key == "horizon") horizon = to_uint(key, v);
    else if (key == "road_lead") road_lead = to_uint(key, v);
    else if (key == "speed_feature") speed_feature = one_of(key, v, {"level", "raw"});
    else if (key == "lr") lr = to_double(key, v);
    else if (key == "rho") rho = to_double(key, v);
    else if (key == "eps") eps = to_double(key, v);
    else if (key == "batch") batch = to_uint(key, v);
    else if (key == "epochs") epochs = to_uint(key, v);
    else if (key == "patience") patience = to_uint(key, v);
    else if (key == "split") { parse_split(v); split = v; }
    else if (key == "seeds") seeds = parse_seed_list(v);
    else if (key == "record_timing") record_timing = to_bool(key, v);
    else throw ConfigError("unknown config key '" + key + "'");
}

std::string AppConfig::get(const std::string& key) const {
    if (key == "road") return road;
    if (key == "impute") return impute;
    if (key == "map") return map;
    if (key == "out") return out;
    if (key == "days") return std::to_string(days);
    if (key == "road_seed") return std::to_string(road_seed);
    if (key == "lambda") return num(lambda);
    if (key == "h") return num(h);
    if (key == "range") return num(range);
    if (key == "exact_flow") return exact_flow ? "true" : "false";
    if (key == "mode") return mode;
    if (key == "grid") return grid;
    if (key == "cell") return cell;
    if (key == "hidden") return std::to_string(hidden);
    if (key == "window") return std::to_string(window);
    if (key == "horizon") return std::to_string(horizon);
    if (key == "road_lead") return std::to_string(road_lead);
    if (key == "speed_feature") return speed_feature;
    if (key == "lr") return num(lr);
    if (key == "rho") return num(rho);
    if (key == "eps") return num(eps);
    if (key == "batch") return std::to_string(batch);
    if (key == "epochs") return std::to_string(epochs);
    if (key == "patience") return std::to_string(patience);
    if (key == "split") return split;
    if (key == "seeds") {
        std::string s;
        for (auto seed : seeds) s += (s.empty() ? "" : ",") + std::to_string(seed);
        return s;
    }
    if (key == "record_timing") return record_timing ? "true" : "false";
    throw ConfigError("unknown config key '" + key + "'");
}

void AppConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (days < 3) fail("days must be >= 3 (one per split)");
    if (!(lambda >= 0)) fail("lambda must be >= 0");
    if (!(h >= 0 && h <= 1)) fail("h must lie in [0, 1]");
    if (!(range > 0)) fail("range must be > 0");
    if (hidden == 0 || window == 0 || horizon == 0 || batch == 0 || epochs == 0)
        fail("hidden, window, horizon, batch and epochs must be positive");
    if (road_lead > horizon) fail("road_lead may not exceed horizon");
    if (!(lr > 0) || !(rho >= 0 && rho < 1) || !(eps > 0)) fail("optimizer settings out of range");
    if (seeds.empty()) fail("at least one seed is required");
    if (!map.empty()) ColumnMap::parse(map);
    parse_split(split);
}

std::vector<ExperimentSpec> AppConfig::experiment_specs() const {
    validate();
    std::vector<NamedScenario> scenarios;
    if (grid == "table1") {
        scenarios = table1_scenarios();
    } else {
        ScenarioConfig c;
        c.lambda = lambda;
        c.handover_prob = h;
        c.cell_range = range;
        scenarios.push_back({"custom", c});
    }
    std::vector<FeatureMode> modes;
    if (mode != "netroad") modes.push_back(FeatureMode::Net);
    if (mode != "net") modes.push_back(FeatureMode::NetRoad);

    std::vector<ExperimentSpec> specs;
    for (const auto& sc : scenarios) {
        for (auto seed : seeds) {
            for (auto m : modes) {
                ExperimentSpec s;
                s.scenario_id = sc.id;
                s.scenario = sc.config;
                s.scenario.exact_flow = exact_flow;
                s.mode = m;
                s.window = window;
                s.horizon = horizon;
                s.road_lead = road_lead;
                s.speed_encoding = speed_feature == "raw" ? SpeedEncoding::Raw : SpeedEncoding::Level;
                s.split = parse_split(split);
                s.train.cell = parse_cell_kind(cell);
                s.train.hidden = hidden;
                s.train.optimizer = {lr, rho, eps};
                s.train.batch_size = batch;
                s.train.max_epochs = epochs;
                s.train.patience = patience;
                s.seed = seed;
                s.record_timing = record_timing;
                specs.push_back(std::move(s));
            }
        }
    }
    return specs;
}

RoadSeries AppConfig::load_road() const {
    if (road.empty()) return synthesize_road_series(days, road_seed);
    IngestOptions opts;
    if (!map.empty()) opts.columns = ColumnMap::parse(map);
    opts.impute = impute == "hold" ? Impute::Hold : Impute::None;
    auto series = parse_road_csv(road, opts);
    if (series.days() < days)
        throw InsufficientData("road CSV holds " + std::to_string(series.days()) + " days, config asks for " +
                               std::to_string(days));
    return series.first_days(days);
}

AppConfig parse_config(std::istream& in, AppConfig base) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        base.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    }
    return base;
}

AppConfig load_config(const std::string& path, AppConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in, std::move(base));
}

std::string dump_config(const AppConfig& config) {
    std::string out;
    for (const auto& k : AppConfig::keys()) out += k + " = " + config.get(k) + "\n";
    return out;
}

}  // namespace loadcast
