// Command-line front end: `run` (one experiment), `bench` (grid of cells),
// `synth` (synthetic CSV fixture), `selftest` (deterministic invariant
// suite). Exit codes: 0 success, 1 usage/config error, 2 data error,
// 3 internal invariant violation.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <evosample/evosample.hpp>

namespace {

using namespace evosample;

void apply_config_file(ExperimentSpec& spec, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFoundError(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
    try {
        if (j.contains("name")) spec.name = j.at("name").get<std::string>();
        if (j.contains("data_path")) spec.data_path = j.at("data_path").get<std::string>();
        if (j.contains("target_column"))
            spec.target_column = j.at("target_column").get<std::string>();
        if (j.contains("mode")) spec.mode = mode_from_string(j.at("mode").get<std::string>());
        if (j.contains("fitness"))
            spec.fitness.kind = fitness_kind_from_string(j.at("fitness").get<std::string>());
        if (j.contains("global_holdout_fraction"))
            spec.fitness.global_holdout_fraction = j.at("global_holdout_fraction").get<double>();
        if (j.contains("test_fraction")) spec.test_fraction = j.at("test_fraction").get<double>();
        if (j.contains("runs")) spec.runs = j.at("runs").get<long>();
        if (j.contains("base_seed")) spec.base_seed = j.at("base_seed").get<std::uint64_t>();
        if (j.contains("jobs")) spec.jobs = j.at("jobs").get<int>();
        if (j.contains("ga")) detail::apply_ga_overrides(spec.ga, j.at("ga"));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
}

void write_report(const ordered_json& report, const std::string& output_path) {
    if (output_path.empty() || output_path == "-") {
        std::cout << report.dump(2) << '\n';
        return;
    }
    std::ofstream out(output_path);
    if (!out) throw DataError("cannot write " + output_path);
    out << report.dump(2) << '\n';
}

void write_csv_from_report(const ordered_json& report, const std::string& csv_path) {
    std::vector<RunOutcome> outcomes;
    for (const auto& r : report.at("runs")) {
        RunOutcome o;
        o.run_index = r.at("run_index").get<long>();
        o.seed = r.at("seed").get<std::uint64_t>();
        o.fi_test_mse = r.at("fi_test_mse").get<double>();
        o.hof_test_mse = r.at("hof_test_mse").get<double>();
        outcomes.push_back(o);
    }
    std::ofstream out(csv_path);
    if (!out) throw DataError("cannot write " + csv_path);
    write_runs_csv(outcomes, out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"evosample: evolutionary sampling for bagged tree ensembles"};
    app.require_subcommand(1);

    // --- run ---------------------------------------------------------------
    auto* run = app.add_subcommand("run", "run one experiment and emit a JSON report");
    std::string config_path;
    ExperimentSpec spec;
    std::string mode_s = "sub_sampling";
    std::string fitness_s = "fempo";
    std::string output_path;
    std::string csv_path;

    run->add_option("--config", config_path, "JSON config supplying any subset of options");
    run->add_option("--data", spec.data_path, "CSV dataset path");
    run->add_option("--target-column", spec.target_column,
                    "target column name (default: last column)");
    run->add_option("--mode", mode_s, "sub_sampling | sub_spacing");
    run->add_option("--fitness", fitness_s, "fempo | fempt | fegt");
    run->add_option("--test-fraction", spec.test_fraction, "held-out test fraction per run");
    run->add_option("--global-holdout-fraction", spec.fitness.global_holdout_fraction,
                    "fegt holdout fraction carved from the training split");
    run->add_option("--runs", spec.runs, "number of repetitions");
    run->add_option("--base-seed", spec.base_seed, "run i uses seed base_seed + i");
    run->add_option("--jobs", spec.jobs, "parallel runs (each run stays sequential)");
    run->add_flag("--progress", spec.progress, "per-generation progress on stderr (jobs=1)");
    run->add_option("--name", spec.name, "label echoed into the report");
    run->add_option("--output", output_path, "report path (default: stdout)");
    run->add_option("--csv", csv_path, "also write per-run outcomes as CSV");

    run->add_option("--population-size", spec.ga.population_size, "GA population size");
    run->add_option("--generations", spec.ga.generations, "GA generations");
    run->add_option("--tournament-size", spec.ga.tournament_size, "tournament draw count");
    run->add_option("--crossover-rate", spec.ga.crossover_rate, "per-pair crossover rate");
    run->add_option("--mutation-rate", spec.ga.mutation_rate, "per-individual mutation rate");
    run->add_option("--ensemble-size", spec.ga.genome.ensemble_size, "members per individual");
    run->add_option("--bag-fraction", spec.ga.genome.bag_fraction, "bag draws per eligible row");
    run->add_option("--feature-fraction", spec.ga.genome.feature_fraction,
                    "sub-spacing feature subset fraction");
    run->add_option("--private-test-fraction", spec.ga.genome.private_test_fraction,
                    "fempt per-member holdout fraction");
    run->add_option("--mutation-intensity", spec.ga.genome.mutation_intensity,
                    "fraction of elements touched per mutation");
    run->add_option("--floor-rows", spec.ga.genome.floor_rows, "minimum bag size");
    run->add_option("--floor-features", spec.ga.genome.floor_features, "minimum feature count");
    run->add_option("--max-depth", spec.ga.genome.max_depth, "member tree depth cap");

    // --- bench ---------------------------------------------------------------
    auto* bench = app.add_subcommand("bench", "run a benchmark grid and summarize");
    std::string grid_path;
    bool bench_progress = false;
    bench->add_option("--grid", grid_path, "grid config JSON")->required();
    bench->add_flag("--progress", bench_progress, "per-cell progress on stderr");

    // --- synth ---------------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "emit a synthetic regression CSV");
    std::size_t synth_rows = 200;
    std::size_t synth_cols = 3;
    double synth_noise = 0.5;
    std::uint64_t synth_seed = 0;
    std::string synth_out;
    synth->add_option("--rows", synth_rows, "row count");
    synth->add_option("--cols", synth_cols, "feature count");
    synth->add_option("--noise", synth_noise, "gaussian noise scale");
    synth->add_option("--seed", synth_seed, "generator seed");
    synth->add_option("--out", synth_out, "output path (default: stdout)");

    // --- selftest --------------------------------------------------------------
    auto* selftest =
        app.add_subcommand("selftest", "deterministic invariant and oracle checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (run->parsed()) {
            if (!config_path.empty()) {
                // Config file first, explicit flags override it.
                const ExperimentSpec flag_values = spec;  // what CLI11 parsed
                spec = ExperimentSpec{};
                apply_config_file(spec, config_path);
                auto take = [&](const char* flag, auto member) {
                    if (run->count(flag) > 0) spec.*member = flag_values.*member;
                };
                take("--data", &ExperimentSpec::data_path);
                take("--target-column", &ExperimentSpec::target_column);
                take("--test-fraction", &ExperimentSpec::test_fraction);
                take("--runs", &ExperimentSpec::runs);
                take("--base-seed", &ExperimentSpec::base_seed);
                take("--jobs", &ExperimentSpec::jobs);
                take("--progress", &ExperimentSpec::progress);
                take("--name", &ExperimentSpec::name);
                if (run->count("--global-holdout-fraction") > 0)
                    spec.fitness.global_holdout_fraction =
                        flag_values.fitness.global_holdout_fraction;
                auto take_ga = [&](const char* flag, auto member) {
                    if (run->count(flag) > 0) spec.ga.*member = flag_values.ga.*member;
                };
                take_ga("--population-size", &GaConfig::population_size);
                take_ga("--generations", &GaConfig::generations);
                take_ga("--tournament-size", &GaConfig::tournament_size);
                take_ga("--crossover-rate", &GaConfig::crossover_rate);
                take_ga("--mutation-rate", &GaConfig::mutation_rate);
                auto take_genome = [&](const char* flag, auto member) {
                    if (run->count(flag) > 0)
                        spec.ga.genome.*member = flag_values.ga.genome.*member;
                };
                take_genome("--ensemble-size", &GenomeConfig::ensemble_size);
                take_genome("--bag-fraction", &GenomeConfig::bag_fraction);
                take_genome("--feature-fraction", &GenomeConfig::feature_fraction);
                take_genome("--private-test-fraction", &GenomeConfig::private_test_fraction);
                take_genome("--mutation-intensity", &GenomeConfig::mutation_intensity);
                take_genome("--floor-rows", &GenomeConfig::floor_rows);
                take_genome("--floor-features", &GenomeConfig::floor_features);
                take_genome("--max-depth", &GenomeConfig::max_depth);
            }
            if (run->count("--mode") > 0 || config_path.empty())
                spec.mode = mode_from_string(mode_s);
            if (run->count("--fitness") > 0 || config_path.empty())
                spec.fitness.kind = fitness_kind_from_string(fitness_s);

            const ordered_json report = run_experiment(spec);
            write_report(report, output_path);
            if (!csv_path.empty()) write_csv_from_report(report, csv_path);
            return 0;
        }

        if (bench->parsed()) {
            const BenchOutcome outcome = run_benchmark(grid_path, bench_progress);
            std::cout << render_summary_table(outcome.cells);
            std::cout << "reports written to " << outcome.plan.output_dir.string() << '\n';
            int failed = 0;
            for (const auto& c : outcome.cells) {
                if (!c.ok()) {
                    ++failed;
                    std::cerr << "cell " << c.spec.name << " failed: " << c.error << '\n';
                }
            }
            return failed == 0 ? 0 : 1;
        }

        if (synth->parsed()) {
            Rng rng = make_rng(synth_seed);
            const Dataset ds = make_synthetic(synth_rows, synth_cols, synth_noise, rng);
            if (synth_out.empty() || synth_out == "-") {
                write_csv(ds, std::cout);
            } else {
                std::ofstream out(synth_out);
                if (!out) throw DataError("cannot write " + synth_out);
                write_csv(ds, out);
            }
            return 0;
        }

        if (selftest->parsed()) {
            bool all_pass = true;
            for (const CheckResult& r : run_selftest()) {
                std::cout << (r.pass ? "PASS  " : "FAIL  ") << r.name;
                if (!r.pass) std::cout << " -- " << r.detail;
                std::cout << '\n';
                all_pass = all_pass && r.pass;
            }
            return all_pass ? 0 : 3;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const InvariantError& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
