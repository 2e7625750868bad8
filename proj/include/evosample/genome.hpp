#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "evosample/dataset.hpp"
#include "evosample/error.hpp"
#include "evosample/fitness_kind.hpp"
#include "evosample/rng.hpp"
#include "evosample/tree.hpp"

namespace evosample {

// Which half of the sampling description evolves. Sub-sampling perturbs row
// bags; sub-spacing perturbs feature subsets (bags are still bootstrapped so
// out-of-bag rows exist in both modes).
enum class Mode { sub_sampling, sub_spacing };

inline const char* to_string(Mode m) {
    return m == Mode::sub_sampling ? "sub_sampling" : "sub_spacing";
}

inline Mode mode_from_string(const std::string& s) {
    if (s == "sub_sampling") return Mode::sub_sampling;
    if (s == "sub_spacing") return Mode::sub_spacing;
    throw ConfigError("unknown mode '" + s + "' (expected sub_sampling|sub_spacing)");
}

struct GenomeConfig {
    Mode mode = Mode::sub_sampling;
    int ensemble_size = 10;
    double bag_fraction = 1.0;           // bag draws per eligible row
    double feature_fraction = 0.5;       // sub-spacing subset size over D
    double private_test_fraction = 0.2;  // fempt per-member holdout over N
    double mutation_intensity = 0.1;     // fraction of elements touched per event
    int floor_rows = 10;                 // delete never shrinks a bag below this
    int floor_features = 1;
    int max_depth = 5;                   // member tree depth cap

    void validate() const {
        if (ensemble_size < 1) throw ConfigError("ensemble_size must be >= 1");
        auto fraction = [](double v, const char* name) {
            if (!(v > 0.0 && v <= 1.0))
                throw ConfigError(std::string(name) + " must lie in (0,1]");
        };
        fraction(bag_fraction, "bag_fraction");
        fraction(feature_fraction, "feature_fraction");
        fraction(private_test_fraction, "private_test_fraction");
        fraction(mutation_intensity, "mutation_intensity");
        if (floor_rows < 1) throw ConfigError("floor_rows must be >= 1");
        if (floor_features < 1) throw ConfigError("floor_features must be >= 1");
        if (max_depth < 1) throw ConfigError("max_depth must be >= 1");
    }
};

// One ensemble member: a bag of training-row indices (multiset, kept sorted),
// a feature subset (distinct, sorted), optionally a private test row set, and
// the tree fitted to (bag, features). The tree is shared immutable state; a
// member travels with its tree through crossover without refitting.
struct MemberGenome {
    std::vector<int> bag;
    std::vector<int> features;
    std::vector<int> private_test;
    std::shared_ptr<const RegressionTree> model;
};

// The GA's unit of selection: an ordered, fixed-size ensemble plus a fitness
// cache. Any operator that changes members clears the cache.
struct Individual {
    std::vector<MemberGenome> members;
    std::optional<double> fitness;
};

namespace detail {

inline void refit(MemberGenome& m, const Dataset& train, int max_depth) {
    if (m.bag.empty()) throw ConfigError("member has an empty bag");
    if (m.features.empty()) throw ConfigError("member has an empty feature set");
    m.model = std::make_shared<const RegressionTree>(
        RegressionTree::fit(train, m.bag, m.features, max_depth));
}

// Rows a member may draw into its bag: everything except its private test.
inline std::vector<int> eligible_rows(std::size_t n_rows, const std::vector<int>& private_test) {
    std::vector<int> out;
    out.reserve(n_rows - private_test.size());
    std::size_t p = 0;
    for (std::size_t r = 0; r < n_rows; ++r) {
        if (p < private_test.size() && private_test[p] == static_cast<int>(r)) {
            ++p;
            continue;
        }
        out.push_back(static_cast<int>(r));
    }
    return out;
}

inline void draw_bag(MemberGenome& m, const std::vector<int>& eligible, double bag_fraction,
                     Rng& rng) {
    const long n_draws = round_half_up(bag_fraction * static_cast<double>(eligible.size()));
    if (n_draws < 1) throw ConfigError("bag_fraction yields an empty bag");
    m.bag.clear();
    m.bag.reserve(n_draws);
    for (long i = 0; i < n_draws; ++i)
        m.bag.push_back(eligible[uniform_index(rng, eligible.size())]);
    std::sort(m.bag.begin(), m.bag.end());
}

}  // namespace detail

// Creates one individual of K freshly sampled, freshly fitted members.
// Per member, in rng order: private test rows (fempt only), bag draws,
// feature subset (sub-spacing only).
inline Individual init_individual(const Dataset& train, const GenomeConfig& cfg,
                                  const FitnessKind& fitness, Rng& rng) {
    cfg.validate();
    if (train.n_rows < 2 || train.n_cols < 1)
        throw ConfigError("training data too small to sample from");

    Individual ind;
    ind.members.resize(cfg.ensemble_size);
    for (auto& m : ind.members) {
        if (fitness.kind == FitnessKind::Kind::fempt) {
            const long n_priv =
                round_half_up(cfg.private_test_fraction * static_cast<double>(train.n_rows));
            if (n_priv < 1 || static_cast<std::size_t>(n_priv) >= train.n_rows)
                throw ConfigError("private_test_fraction leaves no usable split");
            m.private_test = sample_without_replacement(rng, train.n_rows, n_priv);
        }
        detail::draw_bag(m, detail::eligible_rows(train.n_rows, m.private_test),
                         cfg.bag_fraction, rng);

        if (cfg.mode == Mode::sub_spacing) {
            long n_feat = round_half_up(cfg.feature_fraction * static_cast<double>(train.n_cols));
            n_feat = std::clamp<long>(n_feat, 1, static_cast<long>(train.n_cols));
            m.features = sample_without_replacement(rng, train.n_cols, n_feat);
        } else {
            m.features.resize(train.n_cols);
            for (std::size_t j = 0; j < train.n_cols; ++j) m.features[j] = static_cast<int>(j);
        }
        detail::refit(m, train, cfg.max_depth);
    }
    return ind;
}

namespace detail {

enum class MutationOp { erase, replace, insert };

// Number of elements one mutation event touches.
inline long perturbation_count(double intensity, std::size_t size) {
    return std::max<long>(1, round_half_up(intensity * static_cast<double>(size)));
}

inline void delete_random(std::vector<int>& v, long count, Rng& rng) {
    for (long i = 0; i < count; ++i) v.erase(v.begin() + uniform_index(rng, v.size()));
}

inline void mutate_rows(MemberGenome& m, const Dataset& train, const GenomeConfig& cfg,
                        MutationOp op, Rng& rng) {
    const long n = perturbation_count(cfg.mutation_intensity, m.bag.size());
    const long deletable =
        std::max<long>(0, static_cast<long>(m.bag.size()) - cfg.floor_rows);
    const auto eligible = eligible_rows(train.n_rows, m.private_test);
    auto insert_rows = [&](long count) {
        for (long i = 0; i < count; ++i)
            m.bag.push_back(eligible[uniform_index(rng, eligible.size())]);
        std::sort(m.bag.begin(), m.bag.end());
    };
    switch (op) {
        case MutationOp::erase:
            delete_random(m.bag, std::min(n, deletable), rng);
            break;
        case MutationOp::replace: {
            const long n_del = std::min(n, deletable);
            delete_random(m.bag, n_del, rng);
            insert_rows(n_del);
            break;
        }
        case MutationOp::insert:
            insert_rows(n);
            break;
    }
}

inline void mutate_features(MemberGenome& m, const Dataset& train, const GenomeConfig& cfg,
                            MutationOp op, Rng& rng) {
    const long n = perturbation_count(cfg.mutation_intensity, m.features.size());
    auto absent_columns = [&] {
        std::vector<int> out;
        std::size_t p = 0;
        for (std::size_t j = 0; j < train.n_cols; ++j) {
            if (p < m.features.size() && m.features[p] == static_cast<int>(j)) {
                ++p;
                continue;
            }
            out.push_back(static_cast<int>(j));
        }
        return out;
    };
    auto insert_features = [&](long count) {
        const auto absent = absent_columns();
        const long n_ins = std::min<long>(count, static_cast<long>(absent.size()));
        if (n_ins <= 0) return;  // feature set saturated at D
        const auto picks = sample_without_replacement(rng, absent.size(), n_ins);
        for (int p : picks) m.features.push_back(absent[p]);
        std::sort(m.features.begin(), m.features.end());
    };
    const long deletable =
        std::max<long>(0, static_cast<long>(m.features.size()) - cfg.floor_features);
    switch (op) {
        case MutationOp::erase:
            delete_random(m.features, std::min(n, deletable), rng);
            break;
        case MutationOp::replace: {
            const long n_del = std::min(n, deletable);
            delete_random(m.features, n_del, rng);
            insert_features(n_del);
            break;
        }
        case MutationOp::insert:
            insert_features(n);
            break;
    }
}

}  // namespace detail

// One mutation event: pick one member uniformly, pick delete/replace/insert
// with equal probability, perturb that member's rows (sub-sampling) or
// features (sub-spacing), refit only that member's tree. Floors make every
// operation total: a delete stops at floor_rows / floor_features and an
// insert of features saturates at the full column set (the refit still
// happens, so the event is never an error).
inline Individual mutate(const Individual& ind, const Dataset& train, const GenomeConfig& cfg,
                         Rng& rng) {
    Individual out = ind;
    MemberGenome& m = out.members[uniform_index(rng, out.members.size())];
    const auto op = static_cast<detail::MutationOp>(uniform_index(rng, 3));
    if (cfg.mode == Mode::sub_sampling)
        detail::mutate_rows(m, train, cfg, op, rng);
    else
        detail::mutate_features(m, train, cfg, op, rng);
    detail::refit(m, train, cfg.max_depth);
    out.fitness.reset();
    return out;
}

// Classic two-point crossover on the member sequence: cut points p < q are
// drawn uniformly from the interior, and the children swap the [p, q) block.
// Members keep their fitted trees; only the fitness caches are cleared.
inline std::pair<Individual, Individual> crossover_two_point(const Individual& a,
                                                             const Individual& b, Rng& rng) {
    const std::size_t k = a.members.size();
    if (b.members.size() != k)
        throw InvariantError("crossover: parents have different ensemble sizes");
    if (k < 3)
        throw ConfigError("crossover requires ensemble_size >= 3 (no interior cut pair)");

    std::size_t p = 1 + uniform_index(rng, k - 1);
    std::size_t q = 1 + uniform_index(rng, k - 1);
    while (q == p) q = 1 + uniform_index(rng, k - 1);
    if (p > q) std::swap(p, q);

    Individual child_a = a;
    Individual child_b = b;
    for (std::size_t i = p; i < q; ++i) std::swap(child_a.members[i], child_b.members[i]);
    child_a.fitness.reset();
    child_b.fitness.reset();
    return {std::move(child_a), std::move(child_b)};
}

}  // namespace evosample
