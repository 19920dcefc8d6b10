#include "loadcast/cli.hpp"

#include "loadcast/calls.hpp"
#include "loadcast/config.hpp"
#include "loadcast/error.hpp"
#include "loadcast/experiment.hpp"
#include "loadcast/gradcheck.hpp"
#include "loadcast/road.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

namespace loadcast::cli {

namespace fs = std::filesystem;

namespace {

void print_error(std::ostream& err, const std::string& module, const std::string& kind, const std::string& msg) {
    err << "error: module=" << module << " kind=" << kind << " message=" << nlohmann::json(msg).dump() << '\n';
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw InvalidArgument("cli", "cannot write '" + path + "'");
    return f;
}

std::size_t grid_threads() {
    if (const char* env = std::getenv("V2X_LOADCAST_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1) return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
        }
        throw ConfigError(std::string("V2X_LOADCAST_THREADS must be a positive integer, got '") + env + "'");
    }
    return 0;
}

void print_matrix(std::ostream& out, const CorrelationMatrix& m) {
    out << std::setw(8) << "";
    for (const auto& l : m.labels) out << std::setw(9) << l;
    out << '\n';
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
        out << std::setw(8) << m.labels[i];
        for (std::size_t j = 0; j < m.labels.size(); ++j) out << std::setw(9) << std::fixed << std::setprecision(4) << m.at(i, j);
        out << '\n';
    }
    out.unsetf(std::ios::fixed);
}

int run_pipeline(const AppConfig& config, std::ostream& out, std::ostream& err) {
    const auto specs = config.experiment_specs();
    const auto road = config.load_road();
    const auto rows = run_scenario_grid(specs, road, grid_threads());

    fs::create_directories(fs::path(config.out) / "runs");
    {
        auto f = open_out((fs::path(config.out) / "config.txt").string());
        f << dump_config(config);
    }
    const auto metrics = metric_rows(rows);
    {
        auto f = open_out((fs::path(config.out) / "metrics.csv").string());
        write_metrics_csv(f, metrics);
    }
    {
        auto f = open_out((fs::path(config.out) / "comparison.csv").string());
        write_comparison_csv(f, metrics);
    }
    int failures = 0;
    for (const auto& row : rows) {
        if (!row.report) {
            ++failures;
            const auto c1 = row.error.find(':'), c2 = row.error.find(':', c1 + 1);
            print_error(err, row.error.substr(0, c1), row.error.substr(c1 + 1, c2 - c1 - 1),
                        row.spec.scenario_id + "/" + to_string(row.spec.mode) + "/seed " +
                            std::to_string(row.spec.seed) + ": " + row.error.substr(c2 + 2));
            continue;
        }
        const auto& r = *row.report;
        const std::string name = r.scenario_id + "_" + r.mode + "_s" + std::to_string(r.seed) + ".json";
        auto f = open_out((fs::path(config.out) / "runs" / name).string());
        f << to_json(r).dump(1) << '\n';
        out << r.scenario_id << ' ' << std::setw(7) << std::left << r.mode << std::right << " seed=" << r.seed
            << " test_mae=" << r.test_mae << " val_mae=" << r.val_mae << " naive=" << r.naive_test_mae
            << " epochs=" << r.epochs << '\n';
    }
    std::ifstream cmp(fs::path(config.out) / "comparison.csv");
    out << cmp.rdbuf();
    return failures == 0 ? 0 : 1;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"v2x_loadcast: V2X base-station load forecasting from road and network features", "v2x_loadcast"};
    app.require_subcommand(1);

    // ingest
    std::string ingest_input, ingest_impute = "none", ingest_map, ingest_out;
    auto* ingest = app.add_subcommand("ingest", "Validate a road CSV and print its correlation report");
    ingest->add_option("--input", ingest_input, "Road CSV (header timestamp,flow,speed)")->required();
    ingest->add_option("--impute", ingest_impute, "Missing 5-minute slots: none (error) or hold")
        ->check(CLI::IsMember({"none", "hold"}));
    ingest->add_option("--map", ingest_map, "Column mapping timestamp=<col>,flow=<col>,speed=<col>");
    ingest->add_option("--out", ingest_out, "Write the validated series as canonical CSV");

    // synth
    std::size_t synth_days = 20;
    std::uint64_t synth_seed = 1;
    std::string synth_out;
    auto* synth = app.add_subcommand("synth", "Synthesize a weekday road series");
    synth->add_option("--days", synth_days, "Number of work days")->check(CLI::PositiveNumber);
    synth->add_option("--seed", synth_seed, "Generator seed");
    synth->add_option("--out", synth_out, "Output CSV")->required();

    // simulate
    std::string sim_road, sim_out, sim_impute = "none";
    ScenarioConfig sim_cfg;
    auto* simulate = app.add_subcommand("simulate", "Generate per-interval call counts from a road CSV");
    simulate->set_help_flag("--help", "Print this help message and exit");  // -h is taken by --h
    simulate->add_option("--road", sim_road, "Road CSV")->required();
    simulate->add_option("--lambda", sim_cfg.lambda, "New service requests per minute per vehicle");
    simulate->add_option("--h", sim_cfg.handover_prob, "Handover probability");
    simulate->add_option("--range", sim_cfg.cell_range, "Cell range in miles");
    simulate->add_option("--seed", sim_cfg.seed, "Simulation seed");
    simulate->add_flag("--exact-flow", sim_cfg.exact_flow, "Place exactly F arrivals per interval");
    simulate->add_option("--impute", sim_impute, "none or hold")->check(CLI::IsMember({"none", "hold"}));
    simulate->add_option("--out", sim_out, "Output CSV (timestamp,flow,speed,calls)")->required();

    // run / grid share their flags
    struct RunFlags {
        std::string config_path, grid, seeds, out, road, mode;
        std::size_t days = 0, epochs = 0;
        std::vector<std::string> sets;
        bool dump = false;
    };
    RunFlags run_flags, grid_flags;
    auto add_run_flags = [](CLI::App* sub, RunFlags& f) {
        sub->add_option("--config", f.config_path, "Flat key = value config file");
        sub->add_option("--grid", f.grid, "Scenario grid: none or table1")->check(CLI::IsMember({"none", "table1"}));
        sub->add_option("--days", f.days, "Work days of road data");
        sub->add_option("--seeds", f.seeds, "Comma-separated root seeds, e.g. 1,2,3");
        sub->add_option("--out", f.out, "Output directory");
        sub->add_option("--road", f.road, "Road CSV (default: synthetic)");
        sub->add_option("--mode", f.mode, "net, netroad or both");
        sub->add_option("--epochs", f.epochs, "Maximum training epochs");
        sub->add_option("--set", f.sets, "Override any config key: --set key=value (repeatable)");
        sub->add_flag("--dump-config", f.dump, "Print the effective config and exit");
    };
    auto* run = app.add_subcommand("run", "Simulate, train and evaluate one scenario (or a grid)");
    add_run_flags(run, run_flags);
    auto* grid = app.add_subcommand("grid", "Run the seven-scenario grid in both feature modes");
    add_run_flags(grid, grid_flags);

    // gradcheck
    std::size_t gc_models = 100;
    std::uint64_t gc_seed = 0;
    std::string gc_cell = "both";
    double gc_step = 1e-5, gc_tol = 1e-4;
    auto* gradcheck = app.add_subcommand("gradcheck", "Compare BPTT gradients with central differences");
    gradcheck->add_option("--seeds", gc_models, "Number of random models");
    gradcheck->add_option("--seed", gc_seed, "Root seed");
    gradcheck->add_option("--cell", gc_cell, "lstm, gru or both")->check(CLI::IsMember({"lstm", "gru", "both"}));
    gradcheck->add_option("--step", gc_step, "Finite-difference step");
    gradcheck->add_option("--tol", gc_tol, "Relative error tolerance");

    // report
    std::string rep_metrics, rep_run, rep_out;
    auto* report = app.add_subcommand("report", "Emit plot-ready CSV from run outputs");
    report->add_option("--metrics", rep_metrics, "metrics.csv to summarize as a Net vs Net&Road table");
    report->add_option("--run", rep_run, "Run JSON to export as per-epoch curves");
    report->add_option("--out", rep_out, "Output CSV (default: stdout)");

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*ingest) {
            IngestOptions opts;
            if (!ingest_map.empty()) opts.columns = ColumnMap::parse(ingest_map);
            opts.impute = ingest_impute == "hold" ? Impute::Hold : Impute::None;
            const auto series = parse_road_csv(ingest_input, opts);
            out << "records=" << series.size() << " days=" << series.days() << " imputed=" << series.imputed().size()
                << '\n';
            for (auto ts : series.imputed()) out << "imputed " << format_iso8601(ts) << '\n';
            print_matrix(out, correlation_report(series));
            if (!ingest_out.empty()) write_road_csv(ingest_out, series);
            return 0;
        }
        if (*synth) {
            write_road_csv(synth_out, synthesize_road_series(synth_days, synth_seed));
            return 0;
        }
        if (*simulate) {
            IngestOptions opts;
            opts.impute = sim_impute == "hold" ? Impute::Hold : Impute::None;
            const auto road = parse_road_csv(sim_road, opts);
            const auto calls = simulate_calls(road, sim_cfg);
            auto f = open_out(sim_out);
            write_calls_csv(f, road, calls);
            if (calls.zero_speed_warnings > 0)
                err << "warning: " << calls.zero_speed_warnings << " intervals with zero speed used the "
                    << kSpeedFloorMph << " mph floor\n";
            return 0;
        }
        if (*run || *grid) {
            const RunFlags& f = *run ? run_flags : grid_flags;
            AppConfig config;
            if (*grid) config.grid = "table1";
            if (!f.config_path.empty()) config = load_config(f.config_path, config);
            if (!f.grid.empty()) config.set("grid", f.grid);
            if (f.days) config.days = f.days;
            if (!f.seeds.empty()) config.set("seeds", f.seeds);
            if (!f.out.empty()) config.out = f.out;
            if (!f.road.empty()) config.road = f.road;
            if (!f.mode.empty()) config.set("mode", f.mode);
            if (f.epochs) config.epochs = f.epochs;
            for (const auto& kv : f.sets) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
                config.set(kv.substr(0, eq), kv.substr(eq + 1));
            }
            config.validate();
            if (f.dump) {
                out << dump_config(config);
                return 0;
            }
            return run_pipeline(config, out, err);
        }
        if (*gradcheck) {
            bool ok = true;
            for (auto kind : {CellKind::LSTM, CellKind::GRU}) {
                if (gc_cell != "both" && gc_cell != to_string(kind)) continue;
                const auto sweep = grad_check_sweep(gc_models, kind, gc_seed, gc_step, gc_tol);
                out << to_string(kind) << " models=" << sweep.models << " failures=" << sweep.failures
                    << " max_rel_error=" << std::scientific << std::setprecision(3) << sweep.max_rel_error
                    << std::defaultfloat << " worst=" << sweep.worst << ' ' << (sweep.passed() ? "PASS" : "FAIL")
                    << '\n';
                ok = ok && sweep.passed();
            }
            return ok ? 0 : 2;
        }
        if (*report) {
            if (rep_metrics.empty() == rep_run.empty())
                throw ConfigError("report needs exactly one of --metrics or --run");
            std::ostringstream buf;
            if (!rep_metrics.empty()) {
                std::ifstream in(rep_metrics);
                if (!in) throw InvalidArgument("cli", "cannot open '" + rep_metrics + "'");
                write_comparison_csv(buf, read_metrics_csv(in));
            } else {
                std::ifstream in(rep_run);
                if (!in) throw InvalidArgument("cli", "cannot open '" + rep_run + "'");
                write_curve_csv(buf, run_report_from_json(nlohmann::json::parse(in)));
            }
            if (rep_out.empty()) {
                out << buf.str();
            } else {
                auto f = open_out(rep_out);
                f << buf.str();
            }
            return 0;
        }
    } catch (const Error& e) {
        print_error(err, e.module(), e.kind(), e.what());
        return 1;
    } catch (const nlohmann::json::exception& e) {
        print_error(err, "cli", "JsonError", e.what());
        return 1;
    } catch (const std::exception& e) {
        print_error(err, "cli", "Exception", e.what());
        return 1;
    }
    return 0;
}

int dispatch(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return dispatch(args, std::cout, std::cerr);
}

}  // namespace loadcast::cli
