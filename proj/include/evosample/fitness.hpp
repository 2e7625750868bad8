#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "evosample/dataset.hpp"
#include "evosample/error.hpp"
#include "evosample/fitness_kind.hpp"
#include "evosample/genome.hpp"
#include "evosample/stats.hpp"

namespace evosample {

// Evaluation-time context. `train` is the dataset the bags index into;
// `global_holdout` is present only under FEGT and holds rows disjoint from
// train. `empty_oob_events` counts FEMPO imputation events for run logs.
struct FitnessContext {
    const Dataset* train = nullptr;
    const Dataset* global_holdout = nullptr;
    long empty_oob_events = 0;
};

// Training rows a member never saw: the complement of (distinct bag indices
// union private_test). Relies on both index lists being sorted.
inline std::vector<int> oob_rows(const MemberGenome& m, std::size_t n_rows) {
    std::vector<int> out;
    std::size_t bi = 0;
    std::size_t pi = 0;
    for (int r = 0; r < static_cast<int>(n_rows); ++r) {
        while (bi < m.bag.size() && m.bag[bi] < r) ++bi;
        while (pi < m.private_test.size() && m.private_test[pi] < r) ++pi;
        const bool in_bag = bi < m.bag.size() && m.bag[bi] == r;
        const bool in_priv = pi < m.private_test.size() && m.private_test[pi] == r;
        if (!in_bag && !in_priv) out.push_back(r);
    }
    return out;
}

namespace detail {

inline const RegressionTree& fitted_model(const MemberGenome& m) {
    if (!m.model) throw InvariantError("member has no fitted tree");
    return *m.model;
}

// RMSE of one member's tree over the given rows, ascending row order.
inline double member_rmse(const MemberGenome& m, const Dataset& ds, std::span<const int> rows) {
    const RegressionTree& tree = fitted_model(m);
    double sum = 0.0;
    for (int r : rows) {
        const double d = tree.predict(ds.row(r)) - ds.target[r];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(rows.size()));
}

}  // namespace detail

// Per-row arithmetic mean of the K member predictions, members in order.
inline std::vector<double> predict_ensemble(const Individual& ind, const Dataset& rows) {
    if (ind.members.empty()) throw InvariantError("predict_ensemble: empty individual");
    std::vector<double> out(rows.n_rows, 0.0);
    for (const auto& m : ind.members) {
        const RegressionTree& tree = detail::fitted_model(m);
        for (std::size_t r = 0; r < rows.n_rows; ++r) out[r] += tree.predict(rows.row(r));
    }
    const double k = static_cast<double>(ind.members.size());
    for (double& v : out) v /= k;
    return out;
}

// FEMPO: mean per-member out-of-bag RMSE. A member whose bag covers every
// row has no OOB score; it is imputed as the mean of the other members,
// which reduces to averaging over the members that do have OOB rows. Each
// imputation is counted in ctx.empty_oob_events.
inline double fempo(const Individual& ind, FitnessContext& ctx) {
    if (!ctx.train) throw InvariantError("fempo: context has no training data");
    double sum = 0.0;
    long scored = 0;
    for (const auto& m : ind.members) {
        const auto rows = oob_rows(m, ctx.train->n_rows);
        if (rows.empty()) {
            ++ctx.empty_oob_events;
            continue;
        }
        sum += detail::member_rmse(m, *ctx.train, rows);
        ++scored;
    }
    if (scored == 0) throw ConfigError("fempo: every member's bag covers all training rows");
    return sum / static_cast<double>(scored);
}

// FEMPT: mean per-member RMSE on that member's private test rows.
inline double fempt(const Individual& ind, FitnessContext& ctx) {
    if (!ctx.train) throw InvariantError("fempt: context has no training data");
    double sum = 0.0;
    for (const auto& m : ind.members) {
        if (m.private_test.empty())
            throw ConfigError("fempt: member has no private test rows (wrong fitness kind at init?)");
        sum += detail::member_rmse(m, *ctx.train, m.private_test);
    }
    return sum / static_cast<double>(ind.members.size());
}

// FEGT: ensemble RMSE on the global holdout carved out before evolution.
inline double fegt(const Individual& ind, FitnessContext& ctx) {
    if (!ctx.global_holdout || ctx.global_holdout->n_rows == 0)
        throw ConfigError("fegt: context has no global holdout");
    const auto preds = predict_ensemble(ind, *ctx.global_holdout);
    return rmse(preds, ctx.global_holdout->target);
}

// Dispatch with per-genome-state caching: operators that change members
// clear ind.fitness, so a set cache is always current.
inline double evaluate(Individual& ind, FitnessContext& ctx, const FitnessKind& kind) {
    if (ind.fitness) return *ind.fitness;
    double f = 0.0;
    switch (kind.kind) {
        case FitnessKind::Kind::fempo: f = fempo(ind, ctx); break;
        case FitnessKind::Kind::fempt: f = fempt(ind, ctx); break;
        case FitnessKind::Kind::fegt: f = fegt(ind, ctx); break;
    }
    ind.fitness = f;
    return f;
}

}  // namespace evosample
