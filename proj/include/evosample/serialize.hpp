#pragma once

#include <nlohmann/json.hpp>

#include "evosample/evolve.hpp"
#include "evosample/fitness_kind.hpp"
#include "evosample/genome.hpp"
#include "evosample/stats.hpp"
#include "evosample/tree.hpp"

namespace evosample {

// ordered_json keeps insertion order, so two dumps of the same data are
// byte-identical — required by the determinism contract on reports.
using ordered_json = nlohmann::ordered_json;

inline ordered_json tree_to_json(const TreeNode& node) {
    ordered_json j;
    if (node.is_leaf()) {
        j["value"] = node.value;
        j["n_samples"] = node.n_samples;
        return j;
    }
    j["feature"] = node.feature;
    j["threshold"] = node.threshold;
    j["n_samples"] = node.n_samples;
    j["left"] = tree_to_json(*node.left);
    j["right"] = tree_to_json(*node.right);
    return j;
}

inline ordered_json member_to_json(const MemberGenome& m) {
    ordered_json j;
    j["bag"] = m.bag;
    j["features"] = m.features;
    j["private_test"] = m.private_test;
    j["tree"] = m.model ? tree_to_json(m.model->root()) : ordered_json(nullptr);
    return j;
}

inline ordered_json individual_to_json(const Individual& ind) {
    ordered_json j;
    j["fitness"] = ind.fitness ? ordered_json(*ind.fitness) : ordered_json(nullptr);
    ordered_json members = ordered_json::array();
    for (const auto& m : ind.members) members.push_back(member_to_json(m));
    j["members"] = std::move(members);
    return j;
}

inline ordered_json genome_config_to_json(const GenomeConfig& g) {
    ordered_json j;
    j["mode"] = to_string(g.mode);
    j["ensemble_size"] = g.ensemble_size;
    j["bag_fraction"] = g.bag_fraction;
    j["feature_fraction"] = g.feature_fraction;
    j["private_test_fraction"] = g.private_test_fraction;
    j["mutation_intensity"] = g.mutation_intensity;
    j["floor_rows"] = g.floor_rows;
    j["floor_features"] = g.floor_features;
    j["max_depth"] = g.max_depth;
    return j;
}

inline ordered_json ga_config_to_json(const GaConfig& ga) {
    ordered_json j;
    j["population_size"] = ga.population_size;
    j["generations"] = ga.generations;
    j["tournament_size"] = ga.tournament_size;
    j["crossover_rate"] = ga.crossover_rate;
    j["mutation_rate"] = ga.mutation_rate;
    j["fitness"] = to_string(ga.fitness.kind);
    j["global_holdout_fraction"] = ga.fitness.global_holdout_fraction;
    j["genome"] = genome_config_to_json(ga.genome);
    return j;
}

inline ordered_json run_outcome_to_json(const RunOutcome& r) {
    ordered_json j;
    j["run_index"] = r.run_index;
    j["seed"] = r.seed;
    j["fi_test_mse"] = r.fi_test_mse;
    j["hof_test_mse"] = r.hof_test_mse;
    return j;
}

inline ordered_json aggregate_to_json(const AggregateReport& a) {
    ordered_json j;
    j["n_runs"] = a.n_runs;
    j["hof_mean"] = a.hof_mean;
    j["hof_std"] = a.hof_std;
    j["fi_mean"] = a.fi_mean;
    j["fi_std"] = a.fi_std;
    j["win_percent"] = a.win_percent;
    // A constant nonzero difference yields an infinite t; JSON has no
    // infinity, so the sentinel becomes a string.
    if (std::isfinite(a.t_statistic))
        j["t_statistic"] = a.t_statistic;
    else
        j["t_statistic"] = a.t_statistic > 0 ? "inf" : "-inf";
    j["p_value"] = a.p_value;
    return j;
}

}  // namespace evosample
