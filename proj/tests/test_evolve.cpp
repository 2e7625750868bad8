#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <vector>

#include <evosample/dataset.hpp>
#include <evosample/error.hpp>
#include <evosample/evolve.hpp>
#include <evosample/rng.hpp>

using namespace evosample;

namespace {

Individual with_fitness(double f) {
    Individual ind;
    ind.fitness = f;
    return ind;
}

// Small, fast GA used throughout: OOB always exists at bag_fraction 0.5.
GaConfig small_cfg() {
    GaConfig cfg;
    cfg.population_size = 12;
    cfg.generations = 8;
    cfg.genome.ensemble_size = 5;
    cfg.genome.bag_fraction = 0.5;
    cfg.genome.floor_rows = 5;
    cfg.genome.max_depth = 3;
    return cfg;
}

}  // namespace

TEST_CASE("tournament returns the single individual of a trivial population", "[evolve]") {
    std::vector<Individual> pop;
    pop.push_back(with_fitness(7.0));
    Rng rng = make_rng(1);
    CHECK(&tournament_select(pop, 5, rng) == &pop[0]);
}

TEST_CASE("a huge tournament is an argmin", "[evolve]") {
    std::vector<Individual> pop;
    for (double f : {4.0, 2.0, 9.0, 1.0, 5.0}) pop.push_back(with_fitness(f));
    Rng rng = make_rng(2);
    // 200 draws with replacement from 5 candidates miss the minimum with
    // probability (4/5)^200; for this seed the argmin is certain.
    CHECK(*tournament_select(pop, 200, rng).fitness == 1.0);
}

TEST_CASE("tournament ties go to the earliest draw", "[evolve]") {
    std::vector<Individual> pop;
    for (int i = 0; i < 6; ++i) pop.push_back(with_fitness(3.0));
    Rng rng = make_rng(3);
    Rng probe = rng;  // replicate the first selection draw
    const std::size_t first = uniform_index(probe, pop.size());
    CHECK(&tournament_select(pop, 4, rng) == &pop[first]);
}

TEST_CASE("tournament selection pressure orders ranks by frequency", "[evolve]") {
    std::vector<Individual> pop;
    for (double f : {1.0, 2.0, 3.0, 4.0, 5.0}) pop.push_back(with_fitness(f));
    Rng rng = make_rng(4);
    long counts[5] = {0, 0, 0, 0, 0};
    for (int i = 0; i < 10000; ++i) {
        const Individual& winner = tournament_select(pop, 3, rng);
        counts[static_cast<int>(*winner.fitness) - 1]++;
    }
    // P(rank r wins) = ((6-r)^3 - (5-r)^3) / 125: 0.488, 0.296, 0.152,
    // 0.056, 0.008. Strictly decreasing with gaps far above noise.
    for (int r = 1; r < 5; ++r) CHECK(counts[r] < counts[r - 1]);
    CHECK(counts[0] > 4500);
    CHECK(counts[4] < 250);
}

TEST_CASE("tournament rejects unevaluated individuals", "[evolve]") {
    std::vector<Individual> pop(3);
    Rng rng = make_rng(5);
    CHECK_THROWS_AS(tournament_select(pop, 3, rng), InvariantError);
    CHECK_THROWS_AS(tournament_select(std::vector<Individual>{}, 3, rng), InvariantError);
}

TEST_CASE("zero generations still evaluates and archives generation zero", "[evolve]") {
    Rng data_rng = make_rng(6);
    const Dataset train = make_synthetic(80, 3, 0.4, data_rng);
    GaConfig cfg = small_cfg();
    cfg.generations = 0;
    Rng rng = make_rng(7);
    const EvolutionResult res = evolve(train, cfg, rng);

    REQUIRE(res.history.size() == 1);
    CHECK(res.history[0].hof == res.history[0].best);
    REQUIRE(res.hall_of_fame.fitness.has_value());
    CHECK(*res.hall_of_fame.fitness == res.history[0].best);
    REQUIRE(res.first_individual.fitness.has_value());
    CHECK(*res.first_individual.fitness >= res.history[0].best);
    CHECK(res.history[0].mean >= res.history[0].best);
}

TEST_CASE("with no operators the population is a fixed point", "[evolve]") {
    Rng data_rng = make_rng(8);
    const Dataset train = make_synthetic(80, 3, 0.4, data_rng);
    GaConfig cfg = small_cfg();
    cfg.crossover_rate = 0.0;
    cfg.mutation_rate = 0.0;
    cfg.generations = 6;
    Rng rng = make_rng(9);
    const EvolutionResult res = evolve(train, cfg, rng);

    REQUIRE(res.history.size() == 7);
    for (const auto& g : res.history) {
        CHECK(g.best == res.history[0].best);  // selection cannot invent fitness
        CHECK(g.hof == res.history[0].best);
        CHECK(g.mean >= g.best - 1e-12);  // equal up to mean-accumulation rounding
    }
    CHECK(*res.hall_of_fame.fitness == res.history[0].best);
}

TEST_CASE("identical seeds give bitwise identical runs", "[evolve]") {
    Rng data_rng = make_rng(10);
    const Dataset train = make_synthetic(100, 4, 0.4, data_rng);
    for (auto kind : {FitnessKind::Kind::fempo, FitnessKind::Kind::fegt}) {
        GaConfig cfg = small_cfg();
        cfg.fitness.kind = kind;
        Rng r1 = make_rng(11);
        Rng r2 = make_rng(11);
        const EvolutionResult a = evolve(train, cfg, r1);
        const EvolutionResult b = evolve(train, cfg, r2);
        REQUIRE(a.history.size() == b.history.size());
        for (std::size_t i = 0; i < a.history.size(); ++i) {
            CHECK(a.history[i].best == b.history[i].best);
            CHECK(a.history[i].mean == b.history[i].mean);
            CHECK(a.history[i].hof == b.history[i].hof);
        }
        CHECK(*a.hall_of_fame.fitness == *b.hall_of_fame.fitness);
        CHECK(*a.first_individual.fitness == *b.first_individual.fitness);
        CHECK(r1() == r2());  // streams consumed identically
    }
}

TEST_CASE("fegt carves the holdout before any bag is drawn", "[evolve]") {
    Rng data_rng = make_rng(12);
    const Dataset train = make_synthetic(100, 3, 0.4, data_rng);
    GaConfig cfg = small_cfg();
    cfg.genome.bag_fraction = 1.0;
    cfg.fitness.kind = FitnessKind::Kind::fegt;
    cfg.fitness.global_holdout_fraction = 0.2;
    cfg.generations = 0;
    Rng rng = make_rng(13);
    const EvolutionResult res = evolve(train, cfg, rng);
    // 20 rows leave for the holdout; bags index the remaining 80 only.
    for (const auto& m : res.first_individual.members) {
        CHECK(m.bag.size() == 80);
        for (int r : m.bag) CHECK(r < 80);
    }
}

TEST_CASE("progress fires once per evaluated generation", "[evolve]") {
    Rng data_rng = make_rng(14);
    const Dataset train = make_synthetic(60, 2, 0.4, data_rng);
    GaConfig cfg = small_cfg();
    cfg.generations = 4;
    std::vector<int> seen;
    Rng rng = make_rng(15);
    evolve(train, cfg, rng, [&](int gen, double best, double mean) {
        seen.push_back(gen);
        CHECK(best <= mean + 1e-12);
    });
    CHECK(seen == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("crossover demands room for an interior cut pair", "[evolve]") {
    Rng data_rng = make_rng(16);
    const Dataset train = make_synthetic(60, 2, 0.4, data_rng);
    GaConfig cfg = small_cfg();
    cfg.genome.ensemble_size = 2;
    Rng rng = make_rng(17);
    CHECK_THROWS_AS(evolve(train, cfg, rng), ConfigError);
    cfg.crossover_rate = 0.0;  // without crossover K = 2 is legal
    cfg.generations = 1;
    Rng rng2 = make_rng(18);
    CHECK_NOTHROW(evolve(train, cfg, rng2));
}

TEST_CASE("evolution usually beats the best initial individual", "[evolve]") {
    Rng data_rng = make_rng(19);
    const Dataset train = make_synthetic(150, 4, 0.5, data_rng);
    GaConfig cfg = small_cfg();
    cfg.generations = 12;
    int improved = 0;
    for (int s = 0; s < 30; ++s) {
        Rng rng = make_rng(400 + s);
        const EvolutionResult res = evolve(train, cfg, rng);
        REQUIRE(*res.hall_of_fame.fitness <= res.history[0].best);
        if (*res.hall_of_fame.fitness < res.history[0].best) ++improved;
    }
    CHECK(improved >= 18);  // 60% of 30; typically far higher
}
