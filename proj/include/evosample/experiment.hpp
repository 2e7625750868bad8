#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "evosample/dataset.hpp"
#include "evosample/error.hpp"
#include "evosample/evolve.hpp"
#include "evosample/serialize.hpp"
#include "evosample/stats.hpp"
#include "evosample/version.hpp"

namespace evosample {

// One benchmark cell: dataset x sampling mode x fitness, repeated `runs`
// times with run seed = base_seed + run_index. `jobs` and `progress` steer
// execution only; they are deliberately absent from the report echo so a
// report is invariant under parallelism.
struct ExperimentSpec {
    std::string name;           // label for bench summaries
    std::string data_path;
    std::string target_column;  // empty: last CSV column
    Mode mode = Mode::sub_sampling;
    FitnessKind fitness;
    double test_fraction = 0.1;
    long runs = 1;
    std::uint64_t base_seed = 0;
    GaConfig ga;
    int jobs = 1;
    bool progress = false;

    // The mode/fitness knobs above are canonical; they overwrite the copies
    // nested inside GaConfig.
    GaConfig resolved_ga() const {
        GaConfig g = ga;
        g.genome.mode = mode;
        g.fitness = fitness;
        return g;
    }

    void validate() const {
        if (data_path.empty()) throw ConfigError("data_path is required");
        if (runs < 1) throw ConfigError("runs must be >= 1");
        if (!(test_fraction > 0.0 && test_fraction < 1.0))
            throw ConfigError("test_fraction must lie in (0,1)");
        if (jobs < 1) throw ConfigError("jobs must be >= 1");
        resolved_ga().validate();
    }
};

struct SingleRun {
    RunOutcome outcome;
    long empty_oob_events = 0;
};

// One repetition: split train/test, evolve on the training side, score FI
// and HOF ensembles on the untouched test side. The run's entire randomness
// comes from one sequential stream seeded here, so any run index can be
// reproduced in isolation.
inline SingleRun run_single(const Dataset& full, const GaConfig& ga_in, double test_fraction,
                            std::uint64_t seed, long run_index, const ProgressFn& progress = {}) {
    GaConfig ga = ga_in;
    ga.seed = seed;
    Rng rng = make_rng(seed);
    const SplitPair split = train_test_split(full, test_fraction, rng);
    const EvolutionResult res = evolve(split.train, ga, rng, progress);

    SingleRun out;
    out.outcome.run_index = run_index;
    out.outcome.seed = seed;
    out.outcome.fi_test_mse = mse(predict_ensemble(res.first_individual, split.test),
                                  split.test.target);
    out.outcome.hof_test_mse = mse(predict_ensemble(res.hall_of_fame, split.test),
                                   split.test.target);
    out.empty_oob_events = res.empty_oob_events;
    if (!std::isfinite(out.outcome.fi_test_mse) || !std::isfinite(out.outcome.hof_test_mse))
        throw InvariantError("non-finite test MSE");
    return out;
}

inline ProgressFn make_stderr_progress(long run_index) {
    return [run_index](int gen, double best, double mean) {
        std::fprintf(stderr, "run=%ld gen=%d best=%.6g mean=%.6g\n", run_index, gen, best, mean);
    };
}

namespace detail {

[[noreturn]] inline void rethrow_tagged(std::exception_ptr ep, long run_index) {
    const std::string tag = "run " + std::to_string(run_index) + ": ";
    try {
        std::rethrow_exception(ep);
    } catch (const ConfigError& e) {
        throw ConfigError(tag + e.what());
    } catch (const DataError& e) {
        throw DataError(tag + e.what());
    } catch (const InvariantError& e) {
        throw InvariantError(tag + e.what());
    } catch (const std::exception& e) {
        throw InvariantError(tag + e.what());
    }
}

// Executes all runs, sequentially or on a small pool. Results land in a
// run-indexed vector either way, so assembly order never depends on thread
// scheduling. The first failing run (lowest index) aborts the experiment.
inline std::vector<SingleRun> execute_runs(const Dataset& full, const ExperimentSpec& spec) {
    const GaConfig ga = spec.resolved_ga();
    std::vector<SingleRun> singles(spec.runs);

    const int jobs = static_cast<int>(std::min<long>(spec.jobs, spec.runs));
    if (jobs <= 1) {
        for (long i = 0; i < spec.runs; ++i) {
            try {
                singles[i] = run_single(full, ga, spec.test_fraction, spec.base_seed + i, i,
                                        spec.progress ? make_stderr_progress(i) : ProgressFn{});
            } catch (...) {
                rethrow_tagged(std::current_exception(), i);
            }
        }
        return singles;
    }

    std::vector<std::exception_ptr> errors(spec.runs);
    std::atomic<long> next{0};
    auto worker = [&] {
        for (;;) {
            const long i = next.fetch_add(1);
            if (i >= spec.runs) return;
            try {
                singles[i] = run_single(full, ga, spec.test_fraction, spec.base_seed + i, i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (long i = 0; i < spec.runs; ++i)
        if (errors[i]) rethrow_tagged(errors[i], i);
    return singles;
}

}  // namespace detail

// Full experiment: load data, repeat runs, aggregate, and emit the report
// document. With runs=1 the aggregate is null (a paired test needs 2 runs).
inline ordered_json run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const auto t0 = std::chrono::steady_clock::now();

    const Dataset full = load_csv(spec.data_path, spec.target_column);
    const long n_test = round_half_up(spec.test_fraction * static_cast<double>(full.n_rows));
    const std::vector<SingleRun> singles = detail::execute_runs(full, spec);

    std::vector<RunOutcome> outcomes;
    outcomes.reserve(singles.size());
    long empty_oob_total = 0;
    for (const auto& s : singles) {
        outcomes.push_back(s.outcome);
        empty_oob_total += s.empty_oob_events;
    }

    ordered_json report;
    report["tool"] = {{"name", "evosample"}, {"version", kVersion}};

    ordered_json spec_echo;
    spec_echo["name"] = spec.name;
    spec_echo["data_path"] = spec.data_path;
    spec_echo["target_column"] = full.target_name;
    spec_echo["mode"] = to_string(spec.mode);
    spec_echo["fitness"] = to_string(spec.fitness.kind);
    spec_echo["test_fraction"] = spec.test_fraction;
    spec_echo["runs"] = spec.runs;
    spec_echo["base_seed"] = spec.base_seed;
    spec_echo["ga"] = ga_config_to_json(spec.resolved_ga());
    report["spec"] = std::move(spec_echo);

    ordered_json dataset;
    dataset["path"] = spec.data_path;
    dataset["n_rows"] = full.n_rows;
    dataset["n_cols"] = full.n_cols;
    dataset["target_column"] = full.target_name;
    dataset["train_rows"] = full.n_rows - static_cast<std::size_t>(n_test);
    dataset["test_rows"] = n_test;
    report["dataset"] = std::move(dataset);

    ordered_json runs_json = ordered_json::array();
    for (const auto& o : outcomes) runs_json.push_back(run_outcome_to_json(o));
    report["runs"] = std::move(runs_json);

    report["aggregate"] =
        outcomes.size() >= 2 ? aggregate_to_json(aggregate_runs(outcomes)) : ordered_json(nullptr);
    report["empty_oob_events"] = empty_oob_total;

    const auto t1 = std::chrono::steady_clock::now();
    report["wall_clock_seconds"] = std::chrono::duration<double>(t1 - t0).count();
    return report;
}

inline void write_runs_csv(const std::vector<RunOutcome>& outcomes, std::ostream& out) {
    out << "run_index,seed,fi_test_mse,hof_test_mse\n";
    out.precision(17);
    for (const auto& o : outcomes)
        out << o.run_index << ',' << o.seed << ',' << o.fi_test_mse << ',' << o.hof_test_mse
            << '\n';
}

// ---------------------------------------------------------------------------
// Benchmark grids

struct CellResult {
    ExperimentSpec spec;
    ordered_json report;     // null when the cell failed
    std::string error;       // empty when the cell succeeded
    bool ok() const { return error.empty(); }
};

struct BenchPlan {
    std::filesystem::path output_dir;
    std::vector<ExperimentSpec> cells;
};

namespace detail {

template <typename T>
inline T json_get_or(const nlohmann::json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

inline void apply_ga_overrides(GaConfig& ga, const nlohmann::json& j) {
    ga.population_size = json_get_or(j, "population_size", ga.population_size);
    ga.generations = json_get_or(j, "generations", ga.generations);
    ga.tournament_size = json_get_or(j, "tournament_size", ga.tournament_size);
    ga.crossover_rate = json_get_or(j, "crossover_rate", ga.crossover_rate);
    ga.mutation_rate = json_get_or(j, "mutation_rate", ga.mutation_rate);
    if (j.contains("genome")) {
        const auto& g = j.at("genome");
        ga.genome.ensemble_size = json_get_or(g, "ensemble_size", ga.genome.ensemble_size);
        ga.genome.bag_fraction = json_get_or(g, "bag_fraction", ga.genome.bag_fraction);
        ga.genome.feature_fraction = json_get_or(g, "feature_fraction", ga.genome.feature_fraction);
        ga.genome.private_test_fraction =
            json_get_or(g, "private_test_fraction", ga.genome.private_test_fraction);
        ga.genome.mutation_intensity =
            json_get_or(g, "mutation_intensity", ga.genome.mutation_intensity);
        ga.genome.floor_rows = json_get_or(g, "floor_rows", ga.genome.floor_rows);
        ga.genome.floor_features = json_get_or(g, "floor_features", ga.genome.floor_features);
        ga.genome.max_depth = json_get_or(g, "max_depth", ga.genome.max_depth);
    }
}

}  // namespace detail

// Grid file: {"output_dir", "defaults": {runs, base_seed, jobs, ga,
// global_holdout_fraction}, "datasets": [{name, path, target_column,
// test_fraction}], "cells": [{dataset, mode, fitness, + any default
// override}]}. Cell values override defaults; dataset entries supply the
// data path and split fraction.
inline BenchPlan parse_grid(const std::string& grid_path) {
    std::ifstream in(grid_path);
    if (!in) throw FileNotFoundError(grid_path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("grid config " + grid_path + ": " + e.what());
    }

    try {
        BenchPlan plan;
        plan.output_dir = detail::json_get_or<std::string>(j, "output_dir", "results");

        struct DatasetEntry {
            std::string path;
            std::string target_column;
            double test_fraction = 0.1;
        };
        std::map<std::string, DatasetEntry> datasets;
        if (!j.contains("datasets") || !j.at("datasets").is_array())
            throw ConfigError("grid config needs a 'datasets' array");
        for (const auto& d : j.at("datasets")) {
            DatasetEntry e;
            const std::string name = d.at("name").get<std::string>();
            e.path = d.at("path").get<std::string>();
            e.target_column = detail::json_get_or<std::string>(d, "target_column", "");
            e.test_fraction = detail::json_get_or(d, "test_fraction", 0.1);
            datasets[name] = e;
        }

        ExperimentSpec defaults;
        if (j.contains("defaults")) {
            const auto& d = j.at("defaults");
            defaults.runs = detail::json_get_or<long>(d, "runs", defaults.runs);
            defaults.base_seed = detail::json_get_or<std::uint64_t>(d, "base_seed",
                                                                    defaults.base_seed);
            defaults.jobs = detail::json_get_or(d, "jobs", defaults.jobs);
            defaults.fitness.global_holdout_fraction = detail::json_get_or(
                d, "global_holdout_fraction", defaults.fitness.global_holdout_fraction);
            if (d.contains("ga")) detail::apply_ga_overrides(defaults.ga, d.at("ga"));
        }

        if (!j.contains("cells") || !j.at("cells").is_array() || j.at("cells").empty())
            throw ConfigError("grid config has no cells");
        for (const auto& c : j.at("cells")) {
            ExperimentSpec spec = defaults;
            const std::string ds_name = c.at("dataset").get<std::string>();
            const auto it = datasets.find(ds_name);
            if (it == datasets.end())
                throw ConfigError("cell references unknown dataset '" + ds_name + "'");
            spec.data_path = it->second.path;
            spec.target_column = it->second.target_column;
            spec.test_fraction = it->second.test_fraction;
            spec.mode = mode_from_string(c.at("mode").get<std::string>());
            spec.fitness.kind = fitness_kind_from_string(c.at("fitness").get<std::string>());
            spec.runs = detail::json_get_or<long>(c, "runs", spec.runs);
            spec.base_seed = detail::json_get_or<std::uint64_t>(c, "base_seed", spec.base_seed);
            spec.fitness.global_holdout_fraction = detail::json_get_or(
                c, "global_holdout_fraction", spec.fitness.global_holdout_fraction);
            if (c.contains("ga")) detail::apply_ga_overrides(spec.ga, c.at("ga"));
            spec.name = ds_name + "_" + to_string(spec.mode) + "_" + to_string(spec.fitness.kind);
            plan.cells.push_back(std::move(spec));
        }
        return plan;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("grid config " + grid_path + ": " + e.what());
    }
}

namespace detail {

inline std::string format_mean_std(double mean, double std) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << mean << " (" << std << ")";
    return os.str();
}

inline std::string format_p(double p) {
    std::ostringstream os;
    os << std::setprecision(3) << p;
    return os.str();
}

}  // namespace detail

// Human-diffable pivot: datasets as row groups, the five canonical
// mode x fitness cells as columns, HOF/FI/Win%/p as sub-rows. Cells absent
// from the grid stay blank; failed cells say so.
inline std::string render_summary_table(const std::vector<CellResult>& cells) {
    struct Column {
        Mode mode;
        FitnessKind::Kind kind;
        const char* title;
    };
    static constexpr Column kColumns[] = {
        {Mode::sub_sampling, FitnessKind::Kind::fempo, "subsample/FEMPO"},
        {Mode::sub_sampling, FitnessKind::Kind::fempt, "subsample/FEMPT"},
        {Mode::sub_sampling, FitnessKind::Kind::fegt, "subsample/FEGT"},
        {Mode::sub_spacing, FitnessKind::Kind::fempo, "subspace/FEMPO"},
        {Mode::sub_spacing, FitnessKind::Kind::fegt, "subspace/FEGT"},
    };

    // Dataset order follows first appearance in the grid.
    std::vector<std::string> dataset_order;
    for (const auto& c : cells) {
        const std::string ds = c.spec.data_path;
        if (std::find(dataset_order.begin(), dataset_order.end(), ds) == dataset_order.end())
            dataset_order.push_back(ds);
    }

    auto find_cell = [&](const std::string& ds, const Column& col) -> const CellResult* {
        for (const auto& c : cells)
            if (c.spec.data_path == ds && c.spec.mode == col.mode &&
                c.spec.fitness.kind == col.kind)
                return &c;
        return nullptr;
    };

    constexpr int kLabelWidth = 22;
    constexpr int kCellWidth = 16;
    std::ostringstream out;
    out << std::left << std::setw(kLabelWidth) << "dataset / metric";
    for (const auto& col : kColumns) out << std::setw(kCellWidth) << col.title;
    out << '\n' << std::string(kLabelWidth + 5 * kCellWidth, '-') << '\n';

    for (const auto& ds : dataset_order) {
        const std::string stem = std::filesystem::path(ds).stem().string();
        const char* metrics[] = {"HOF mean (std)", "FI mean (std)", "Win %", "p-value"};
        for (int row = 0; row < 4; ++row) {
            out << std::left << std::setw(kLabelWidth)
                << (row == 0 ? stem + "  " + metrics[row] : "  " + std::string(metrics[row]));
            for (const auto& col : kColumns) {
                const CellResult* c = find_cell(ds, col);
                std::string text;
                if (!c) {
                    text = "";
                } else if (!c->ok()) {
                    text = row == 0 ? "FAILED" : "";
                } else if (c->report.at("aggregate").is_null()) {
                    text = row == 0 ? "n/a (1 run)" : "";
                } else {
                    const auto& a = c->report.at("aggregate");
                    switch (row) {
                        case 0:
                            text = detail::format_mean_std(a.at("hof_mean").get<double>(),
                                                           a.at("hof_std").get<double>());
                            break;
                        case 1:
                            text = detail::format_mean_std(a.at("fi_mean").get<double>(),
                                                           a.at("fi_std").get<double>());
                            break;
                        case 2:
                            text = detail::format_p(a.at("win_percent").get<double>());
                            break;
                        case 3:
                            text = detail::format_p(a.at("p_value").get<double>());
                            break;
                    }
                }
                out << std::setw(kCellWidth) << text;
            }
            out << '\n';
        }
        out << '\n';
    }
    return out.str();
}

inline std::string render_summary_csv(const std::vector<CellResult>& cells) {
    std::ostringstream out;
    out << "name,data_path,mode,fitness,n_runs,hof_mean,hof_std,fi_mean,fi_std,"
           "win_percent,p_value,status\n";
    out.precision(17);
    for (const auto& c : cells) {
        out << c.spec.name << ',' << c.spec.data_path << ',' << to_string(c.spec.mode) << ','
            << to_string(c.spec.fitness.kind) << ',';
        if (c.ok() && !c.report.at("aggregate").is_null()) {
            const auto& a = c.report.at("aggregate");
            out << a.at("n_runs").get<long>() << ',' << a.at("hof_mean").get<double>() << ','
                << a.at("hof_std").get<double>() << ',' << a.at("fi_mean").get<double>() << ','
                << a.at("fi_std").get<double>() << ',' << a.at("win_percent").get<double>() << ','
                << a.at("p_value").get<double>() << ",ok";
        } else if (c.ok()) {
            out << c.spec.runs << ",,,,,,,ok";
        } else {
            out << ",,,,,,,failed: " << c.error;
        }
        out << '\n';
    }
    return out.str();
}

struct BenchOutcome {
    BenchPlan plan;
    std::vector<CellResult> cells;
};

// Executes every cell; a failing cell is recorded and the rest continue.
// Per-cell reports, summary.csv, and summary.txt land in output_dir.
inline BenchOutcome run_benchmark(const std::string& grid_path, bool echo_progress = false) {
    BenchPlan plan = parse_grid(grid_path);
    std::filesystem::create_directories(plan.output_dir);

    std::vector<CellResult> results;
    results.reserve(plan.cells.size());
    for (const auto& spec : plan.cells) {
        CellResult cell;
        cell.spec = spec;
        if (echo_progress) std::fprintf(stderr, "cell %s: starting\n", spec.name.c_str());
        try {
            cell.report = run_experiment(spec);
            const auto out_path = plan.output_dir / (spec.name + ".json");
            std::ofstream out(out_path);
            if (!out) throw DataError("cannot write " + out_path.string());
            out << cell.report.dump(2) << '\n';
        } catch (const Error& e) {
            cell.error = e.what();
        }
        if (echo_progress)
            std::fprintf(stderr, "cell %s: %s\n", spec.name.c_str(),
                         cell.ok() ? "done" : cell.error.c_str());
        results.push_back(std::move(cell));
    }

    {
        std::ofstream csv(plan.output_dir / "summary.csv");
        csv << render_summary_csv(results);
        std::ofstream txt(plan.output_dir / "summary.txt");
        txt << render_summary_table(results);
    }
    return {std::move(plan), std::move(results)};
}

}  // namespace evosample
