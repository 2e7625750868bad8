#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "evosample/dataset.hpp"
#include "evosample/error.hpp"
#include "evosample/fitness.hpp"
#include "evosample/fitness_kind.hpp"
#include "evosample/genome.hpp"
#include "evosample/rng.hpp"

namespace evosample {

struct GaConfig {
    int population_size = 30;
    int generations = 30;
    int tournament_size = 3;
    double crossover_rate = 0.6;  // per consecutive pair after selection
    double mutation_rate = 0.4;   // per individual untouched by crossover
    GenomeConfig genome;
    FitnessKind fitness;
    std::uint64_t seed = 0;

    void validate() const {
        if (population_size < 2) throw ConfigError("population_size must be >= 2");
        if (generations < 0) throw ConfigError("generations must be >= 0");
        if (tournament_size < 1) throw ConfigError("tournament_size must be >= 1");
        auto rate = [](double v, const char* name) {
            if (!(v >= 0.0 && v <= 1.0))
                throw ConfigError(std::string(name) + " must lie in [0,1]");
        };
        rate(crossover_rate, "crossover_rate");
        rate(mutation_rate, "mutation_rate");
        genome.validate();
        fitness.validate();
        if (crossover_rate > 0.0 && genome.ensemble_size < 3)
            throw ConfigError("crossover requires ensemble_size >= 3 (no interior cut pair)");
    }
};

struct GenerationStats {
    double best = 0.0;
    double mean = 0.0;
    double hof = 0.0;  // archive fitness after this generation's update
};

struct EvolutionResult {
    Individual first_individual;  // generation 0, population index 0
    Individual hall_of_fame;      // strict-min archive over the whole run
    std::vector<GenerationStats> history;  // generations + 1 entries
    long empty_oob_events = 0;
};

// Draws k contestants uniformly with replacement and returns the one with
// minimal fitness; the strict comparison breaks ties toward the earliest
// draw.
inline const Individual& tournament_select(const std::vector<Individual>& population, int k,
                                           Rng& rng) {
    if (population.empty()) throw InvariantError("tournament_select: empty population");
    const Individual* best = nullptr;
    for (int i = 0; i < k; ++i) {
        const Individual& c = population[uniform_index(rng, population.size())];
        if (!c.fitness) throw InvariantError("tournament_select: unevaluated individual");
        if (!best || *c.fitness < *best->fitness) best = &c;
    }
    return *best;
}

using ProgressFn = std::function<void(int generation, double best, double mean)>;

// The generational loop. One sequential rng stream drives everything, in a
// fixed event order per generation: selection draws, then one crossover gate
// per consecutive pair (cut points only when the gate passes), then one
// mutation gate per individual the crossover left untouched. Under FEGT the
// global holdout is carved from `train` first, before any individual exists,
// and bags index the remaining rows only.
inline EvolutionResult evolve(const Dataset& train, const GaConfig& cfg, Rng& rng,
                              const ProgressFn& progress = {}) {
    cfg.validate();

    SplitPair fegt_split;
    const bool is_fegt = cfg.fitness.kind == FitnessKind::Kind::fegt;
    if (is_fegt) fegt_split = train_test_split(train, cfg.fitness.global_holdout_fraction, rng);
    const Dataset& fit_train = is_fegt ? fegt_split.train : train;

    FitnessContext ctx;
    ctx.train = &fit_train;
    ctx.global_holdout = is_fegt ? &fegt_split.test : nullptr;

    std::vector<Individual> population;
    population.reserve(cfg.population_size);
    for (int i = 0; i < cfg.population_size; ++i)
        population.push_back(init_individual(fit_train, cfg.genome, cfg.fitness, rng));

    EvolutionResult result;
    double hof_fitness = 0.0;

    auto evaluate_generation = [&](int gen) {
        double sum = 0.0;
        double best = 0.0;
        const Individual* best_ind = nullptr;
        for (auto& ind : population) {
            const double f = evaluate(ind, ctx, cfg.fitness);
            sum += f;
            if (!best_ind || f < best) {
                best = f;
                best_ind = &ind;
            }
        }
        if (result.history.empty() || best < hof_fitness) {
            result.hall_of_fame = *best_ind;
            hof_fitness = best;
        }
        const double mean = sum / static_cast<double>(population.size());
        result.history.push_back({best, mean, hof_fitness});
        if (progress) progress(gen, best, mean);
    };

    evaluate_generation(0);
    result.first_individual = population[0];

    for (int gen = 1; gen <= cfg.generations; ++gen) {
        std::vector<Individual> selected;
        selected.reserve(cfg.population_size);
        for (int i = 0; i < cfg.population_size; ++i)
            selected.push_back(tournament_select(population, cfg.tournament_size, rng));

        std::vector<bool> touched(selected.size(), false);
        for (std::size_t i = 0; i + 1 < selected.size(); i += 2) {
            if (uniform_real(rng) < cfg.crossover_rate) {
                auto children = crossover_two_point(selected[i], selected[i + 1], rng);
                selected[i] = std::move(children.first);
                selected[i + 1] = std::move(children.second);
                touched[i] = true;
                touched[i + 1] = true;
            }
        }
        for (std::size_t i = 0; i < selected.size(); ++i) {
            if (touched[i]) continue;
            if (uniform_real(rng) < cfg.mutation_rate)
                selected[i] = mutate(selected[i], fit_train, cfg.genome, rng);
        }

        population = std::move(selected);
        evaluate_generation(gen);
    }

    result.empty_oob_events = ctx.empty_oob_events;
    return result;
}

}  // namespace evosample
