#include "loadcast/experiment.hpp"

#include "loadcast/error.hpp"
#include "loadcast/kernels.hpp"
#include "loadcast/rng.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <omp.h>

namespace loadcast {

using nlohmann::json;

void ExperimentSpec::validate() const {
    scenario.validate();
    auto fail = [](const std::string& msg) { throw InvalidArgument("experiment", msg); };
    if (window < 1) fail("window length M must be >= 1");
    if (horizon < 1) fail("horizon T must be >= 1");
    if (road_lead > horizon) fail("road_lead may not exceed the horizon");
    for (double r : split)
        if (!(r > 0.0)) fail("split parts must be positive");
}

ScenarioConfig ExperimentSpec::effective_scenario() const {
    ScenarioConfig s = scenario;
    s.seed = seed;
    return s;
}

json to_json(const RunReport& r) {
    return json{{"scenario_id", r.scenario_id},
                {"lambda", r.lambda},
                {"h", r.handover_prob},
                {"range", r.cell_range},
                {"mode", r.mode},
                {"cell", r.cell},
                {"seed", r.seed},
                {"M", r.window},
                {"T", r.horizon},
                {"train_loss", r.train_loss},
                {"val_mae_curve", r.val_mae_curve},
                {"epochs", r.epochs},
                {"best_epoch", r.best_epoch},
                {"val_mae", r.val_mae},
                {"test_mae", r.test_mae},
                {"test_mae_calls", r.test_mae_calls},
                {"naive_test_mae", r.naive_test_mae},
                {"norm_mean", r.norm_mean},
                {"norm_std", r.norm_std},
                {"train_windows", r.train_windows},
                {"val_windows", r.val_windows},
                {"test_windows", r.test_windows},
                {"wall_ms", r.wall_ms}};
}

RunReport run_report_from_json(const json& j) {
    RunReport r;
    j.at("scenario_id").get_to(r.scenario_id);
    j.at("lambda").get_to(r.lambda);
    j.at("h").get_to(r.handover_prob);
    j.at("range").get_to(r.cell_range);
    j.at("mode").get_to(r.mode);
    j.at("cell").get_to(r.cell);
    j.at("seed").get_to(r.seed);
    j.at("M").get_to(r.window);
    j.at("T").get_to(r.horizon);
    j.at("train_loss").get_to(r.train_loss);
    j.at("val_mae_curve").get_to(r.val_mae_curve);
    j.at("epochs").get_to(r.epochs);
    j.at("best_epoch").get_to(r.best_epoch);
    j.at("val_mae").get_to(r.val_mae);
    j.at("test_mae").get_to(r.test_mae);
    j.at("test_mae_calls").get_to(r.test_mae_calls);
    j.at("naive_test_mae").get_to(r.naive_test_mae);
    j.at("norm_mean").get_to(r.norm_mean);
    j.at("norm_std").get_to(r.norm_std);
    j.at("train_windows").get_to(r.train_windows);
    j.at("val_windows").get_to(r.val_windows);
    j.at("test_windows").get_to(r.test_windows);
    j.at("wall_ms").get_to(r.wall_ms);
    return r;
}

PreparedData prepare_data(const ExperimentSpec& spec, const RoadSeries& road) {
    spec.validate();
    PreparedData d;
    d.calls = simulate_calls(road, spec.effective_scenario(), spec.train.exec);
    d.raw = build_raw_samples(road, d.calls, spec.speed_encoding);
    d.split = split_by_days(road.size(), RoadSeries::points_per_day(), spec.split);
    d.stats = fit_normalizer(std::span<const RawSample>(d.raw).subspan(d.split.train.begin, d.split.train.size()),
                             spec.mode);
    const auto samples = d.stats.transform(d.raw);
    d.windows = make_windows(samples, d.split, WindowOptions{spec.window, spec.horizon, spec.mode, spec.road_lead});
    return d;
}

double naive_baseline(std::span<const SequenceWindow> windows) {
    if (windows.empty()) throw EmptyBatch("naive_baseline on empty window set");
    std::vector<double> preds, targets;
    for (const auto& w : windows) {
        preds.push_back(w.last_calls());
        targets.push_back(training_target(w));
    }
    return metric_mae(preds, targets);
}

RunReport run_experiment(const ExperimentSpec& spec, const RoadSeries& road) {
    const auto start = std::chrono::steady_clock::now();
    const auto data = prepare_data(spec, road);
    const auto trained = train_model(data.windows.train, data.windows.val, spec.train, derive_seed(spec.seed, "train"));

    RunReport r;
    r.scenario_id = spec.scenario_id;
    r.lambda = spec.scenario.lambda;
    r.handover_prob = spec.scenario.handover_prob;
    r.cell_range = spec.scenario.cell_range;
    r.mode = to_string(spec.mode);
    r.cell = to_string(spec.train.cell);
    r.seed = spec.seed;
    r.window = spec.window;
    r.horizon = spec.horizon;
    r.train_loss = trained.train_loss;
    r.val_mae_curve = trained.val_mae;
    r.epochs = trained.epochs_run();
    r.best_epoch = trained.best_epoch;
    r.val_mae = trained.best_val_mae;
    r.test_mae = evaluate_mae(trained.best, data.windows.test, spec.train.exec);
    r.test_mae_calls = r.test_mae * data.stats.stddev[2];
    r.naive_test_mae = naive_baseline(data.windows.test);
    r.norm_mean = data.stats.mean;
    r.norm_std = data.stats.stddev;
    r.train_windows = data.windows.train.size();
    r.val_windows = data.windows.val.size();
    r.test_windows = data.windows.test.size();
    if (spec.record_timing)
        r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return r;
}

std::vector<GridRow> run_scenario_grid(std::span<const ExperimentSpec> specs, const RoadSeries& road,
                                       std::size_t threads) {
    if (specs.empty()) throw InvalidArgument("experiment", "scenario grid is empty");
    std::vector<GridRow> rows(specs.size());
    auto run_row = [&](std::size_t i) {
        rows[i].spec = specs[i];
        try {
            rows[i].report = run_experiment(specs[i], road);
        } catch (const Error& e) {
            rows[i].error = e.module() + ":" + e.kind() + ": " + e.what();
        } catch (const std::exception& e) {
            rows[i].error = std::string("experiment:Exception: ") + e.what();
        }
    };
    const int n_threads = threads == 0 ? omp_get_max_threads() : static_cast<int>(threads);
    if (n_threads <= 1 || specs.size() == 1) {
        for (std::size_t i = 0; i < specs.size(); ++i) run_row(i);
        return rows;
    }
#pragma omp parallel for schedule(dynamic, 1) num_threads(n_threads)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(specs.size()); ++i) run_row(static_cast<std::size_t>(i));
    return rows;
}

std::vector<NamedScenario> table1_scenarios() {
    auto make = [](std::string id, double lambda, double h, double range) {
        ScenarioConfig c;
        c.lambda = lambda;
        c.handover_prob = h;
        c.cell_range = range;
        return NamedScenario{std::move(id), c};
    };
    return {make("r1.5_l1_h1", per_delta(1), 1.0, 1.5),   make("r1.5_l1_h0.8", per_delta(1), 0.8, 1.5),
            make("r1.5_l1_h0.5", per_delta(1), 0.5, 1.5), make("r1.5_l1_h0.2", per_delta(1), 0.2, 1.5),
            make("r1.5_l1_h0", per_delta(1), 0.0, 1.5),   make("r1.5_l3_h0.5", per_delta(3), 0.5, 1.5),
            make("r6_l1_h0.5", per_delta(1), 0.5, 6.0)};
}

namespace {

std::string num(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

constexpr const char* kMetricsHeader = "scenario_id,lambda,h,range,mode,seed,test_mae,val_mae,epochs,wall_ms";

}  // namespace

std::vector<MetricRow> metric_rows(std::span<const GridRow> rows) {
    std::vector<MetricRow> out;
    for (const auto& row : rows) {
        if (!row.report) continue;
        const auto& r = *row.report;
        out.push_back({r.scenario_id, r.lambda, r.handover_prob, r.cell_range, r.mode, r.seed, r.test_mae, r.val_mae,
                       r.epochs, r.wall_ms});
    }
    return out;
}

void write_metrics_csv(std::ostream& out, std::span<const MetricRow> rows) {
    out << kMetricsHeader << '\n';
    for (const auto& r : rows)
        out << r.scenario_id << ',' << num(r.lambda) << ',' << num(r.handover_prob) << ',' << num(r.cell_range) << ','
            << r.mode << ',' << r.seed << ',' << num(r.test_mae) << ',' << num(r.val_mae) << ',' << r.epochs << ','
            << num(r.wall_ms) << '\n';
}

std::vector<MetricRow> read_metrics_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kMetricsHeader)
        throw MalformedRow("metrics CSV header must be '" + std::string(kMetricsHeader) + "'");
    std::vector<MetricRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_line(line);
        if (f.size() != 10) throw MalformedRow("metrics CSV row has " + std::to_string(f.size()) + " fields");
        try {
            rows.push_back({f[0], std::stod(f[1]), std::stod(f[2]), std::stod(f[3]), f[4], std::stoull(f[5]),
                            std::stod(f[6]), std::stod(f[7]), std::stoul(f[8]), std::stod(f[9])});
        } catch (const std::logic_error&) {
            throw MalformedRow("bad numeric field in metrics row '" + line + "'");
        }
    }
    return rows;
}

void write_comparison_csv(std::ostream& out, std::span<const MetricRow> rows) {
    struct Acc {
        const MetricRow* first = nullptr;
        double net = 0, netroad = 0;
        std::size_t n_net = 0, n_netroad = 0;
    };
    std::vector<std::string> order;
    std::map<std::string, Acc> acc;
    for (const auto& r : rows) {
        auto [it, inserted] = acc.try_emplace(r.scenario_id);
        if (inserted) {
            order.push_back(r.scenario_id);
            it->second.first = &r;
        }
        if (r.mode == "net") {
            it->second.net += r.test_mae;
            ++it->second.n_net;
        } else {
            it->second.netroad += r.test_mae;
            ++it->second.n_netroad;
        }
    }
    out << "scenario_id,lambda,h,range,net_mae,netroad_mae,ratio,seeds\n";
    for (const auto& id : order) {
        const auto& a = acc[id];
        const double net = a.n_net ? a.net / a.n_net : std::nan("");
        const double nr = a.n_netroad ? a.netroad / a.n_netroad : std::nan("");
        out << id << ',' << num(a.first->lambda) << ',' << num(a.first->handover_prob) << ','
            << num(a.first->cell_range) << ',' << (a.n_net ? num(net) : "") << ',' << (a.n_netroad ? num(nr) : "")
            << ',' << (a.n_net && a.n_netroad ? num(nr / net) : "") << ',' << std::max(a.n_net, a.n_netroad) << '\n';
    }
}

void write_curve_csv(std::ostream& out, const RunReport& report) {
    out << "epoch,train_loss,val_mae\n";
    for (std::size_t e = 0; e < report.train_loss.size(); ++e)
        out << e + 1 << ',' << num(report.train_loss[e]) << ',' << num(report.val_mae_curve[e]) << '\n';
}

}  // namespace loadcast
