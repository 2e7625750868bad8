#pragma once

// Independent recomputation oracles and the deterministic self-checks built
// on them. Every oracle takes a different computational path from the
// production code it validates: exhaustive naive split search instead of
// prefix sums, direct quadrature of the t density instead of the incomplete
// beta, set algebra instead of merge walks, compensated instead of plain
// summation.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "evosample/dataset.hpp"
#include "evosample/error.hpp"
#include "evosample/evolve.hpp"
#include "evosample/experiment.hpp"
#include "evosample/fitness.hpp"
#include "evosample/genome.hpp"
#include "evosample/rng.hpp"
#include "evosample/stats.hpp"
#include "evosample/tree.hpp"

namespace evosample::oracle {

// --- compensated summation ---------------------------------------------

inline double kahan_sum(std::span<const double> xs) {
    double sum = 0.0;
    double c = 0.0;
    for (double x : xs) {
        const double y = x - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    return sum;
}

inline double mse_compensated(std::span<const double> pred, std::span<const double> truth) {
    std::vector<double> sq(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        sq[i] = d * d;
    }
    return kahan_sum(sq) / static_cast<double>(pred.size());
}

// --- exhaustive-split tree oracle ---------------------------------------

struct OracleNode {
    bool leaf = true;
    int feature = -1;
    double threshold = 0.0;
    double value = 0.0;
    long n = 0;
    std::unique_ptr<OracleNode> left;
    std::unique_ptr<OracleNode> right;
};

namespace detail {

inline double naive_mean(const Dataset& ds, const std::vector<int>& rows) {
    std::vector<double> ys(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) ys[i] = ds.target[rows[i]];
    return kahan_sum(ys) / static_cast<double>(rows.size());
}

inline double naive_sse(const Dataset& ds, const std::vector<int>& rows) {
    const double m = naive_mean(ds, rows);
    std::vector<double> devs(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double d = ds.target[rows[i]] - m;
        devs[i] = d * d;
    }
    return kahan_sum(devs);
}

}  // namespace detail

// Same split definition as production, found the slow way: every candidate
// (feature, midpoint-between-distinct-values) is materialized, both child
// SSEs are recomputed from scratch, and the scan keeps the first strict
// minimum in (feature asc, threshold asc) order.
inline std::unique_ptr<OracleNode> oracle_fit(const Dataset& ds, const std::vector<int>& rows,
                                              const std::vector<int>& features, int depth,
                                              int max_depth) {
    auto node = std::make_unique<OracleNode>();
    node->n = static_cast<long>(rows.size());
    node->value = detail::naive_mean(ds, rows);

    bool constant = true;
    for (int r : rows)
        if (ds.target[r] != ds.target[rows[0]]) {
            constant = false;
            break;
        }
    if (depth >= max_depth || rows.size() < 2 || constant) return node;

    const double parent_sse = detail::naive_sse(ds, rows);
    double best_sse = parent_sse;
    int best_feature = -1;
    double best_threshold = 0.0;

    for (int f : features) {
        std::vector<double> values;
        values.reserve(rows.size());
        for (int r : rows) values.push_back(ds.at(r, f));
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t i = 0; i + 1 < values.size(); ++i) {
            const double thr = (values[i] + values[i + 1]) / 2.0;
            std::vector<int> left_rows;
            std::vector<int> right_rows;
            for (int r : rows) (ds.at(r, f) <= thr ? left_rows : right_rows).push_back(r);
            if (left_rows.empty() || right_rows.empty()) continue;
            const double sse =
                detail::naive_sse(ds, left_rows) + detail::naive_sse(ds, right_rows);
            if (sse < best_sse) {
                best_sse = sse;
                best_feature = f;
                best_threshold = thr;
            }
        }
    }
    if (best_feature < 0) return node;

    std::vector<int> left_rows;
    std::vector<int> right_rows;
    for (int r : rows)
        (ds.at(r, best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);

    node->leaf = false;
    node->feature = best_feature;
    node->threshold = best_threshold;
    node->left = oracle_fit(ds, left_rows, features, depth + 1, max_depth);
    node->right = oracle_fit(ds, right_rows, features, depth + 1, max_depth);
    return node;
}

inline bool same_tree(const OracleNode& a, const TreeNode& b, double tol, std::string& why) {
    if (a.n != b.n_samples) {
        why = "n_samples " + std::to_string(a.n) + " vs " + std::to_string(b.n_samples);
        return false;
    }
    if (a.leaf != b.is_leaf()) {
        why = a.leaf ? "oracle leaf, production split" : "oracle split, production leaf";
        return false;
    }
    if (a.leaf) {
        if (std::fabs(a.value - b.value) > tol) {
            why = "leaf value " + std::to_string(a.value) + " vs " + std::to_string(b.value);
            return false;
        }
        return true;
    }
    if (a.feature != b.feature) {
        why = "feature " + std::to_string(a.feature) + " vs " + std::to_string(b.feature);
        return false;
    }
    if (std::fabs(a.threshold - b.threshold) > tol) {
        why = "threshold " + std::to_string(a.threshold) + " vs " + std::to_string(b.threshold);
        return false;
    }
    return same_tree(*a.left, *b.left, tol, why) && same_tree(*a.right, *b.right, tol, why);
}

// --- Student-t quadrature oracle -----------------------------------------

inline double student_t_pdf(double u, long df) {
    const double d = static_cast<double>(df);
    const double log_c =
        std::lgamma((d + 1.0) / 2.0) - std::lgamma(d / 2.0) - 0.5 * std::log(d * M_PI);
    return std::exp(log_c - (d + 1.0) / 2.0 * std::log1p(u * u / d));
}

namespace detail {

template <typename F>
double simpson_rec(const F& f, double a, double b, double fa, double fm, double fb, double whole,
                   double tol, int depth) {
    const double m = (a + b) / 2.0;
    const double lm = (a + m) / 2.0;
    const double rm = (m + b) / 2.0;
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
    const double m = (a + b) / 2.0;
    const double fa = f(a);
    const double fm = f(m);
    const double fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 60);
}

}  // namespace detail

// Two-sided p by direct integration: 2 * integral of the t density over
// [|t|, U] plus an asymptotic power-series tail for (U, infinity). With
// U >= 1e4 the truncated series is accurate to ~1e-16 relative.
inline double t_two_sided_p_quadrature(double t, long df) {
    const double d = static_cast<double>(df);
    const double at = std::fabs(t);
    const double upper = std::max(50.0 * (at + std::sqrt(d)), 1e4);

    const double body = detail::adaptive_simpson(
        [df](double u) { return student_t_pdf(u, df); }, at, upper, 1e-13);

    const double a = (d + 1.0) / 2.0;
    const double z = d / (upper * upper);
    const double series = 1.0 / d - a * z / (d + 2.0) + a * (a + 1.0) / 2.0 * z * z / (d + 4.0) -
                          a * (a + 1.0) * (a + 2.0) / 6.0 * z * z * z / (d + 6.0);
    const double log_c =
        std::lgamma((d + 1.0) / 2.0) - std::lgamma(d / 2.0) - 0.5 * std::log(d * M_PI);
    const double tail = std::exp(log_c + a * std::log(d) - d * std::log(upper)) * series;

    const double p = 2.0 * (body + tail);
    return std::min(1.0, std::max(0.0, p));
}

// --- brute-force fitness oracles ------------------------------------------

inline double rmse_compensated_rows(const RegressionTree& tree, const Dataset& ds,
                                    const std::vector<int>& rows) {
    std::vector<double> sq(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double d = tree.predict(ds.row(rows[i])) - ds.target[rows[i]];
        sq[i] = d * d;
    }
    return std::sqrt(kahan_sum(sq) / static_cast<double>(rows.size()));
}

// Rebuilds each member's OOB set with std::set algebra instead of the
// production merge walk.
inline double fempo_bruteforce(const Individual& ind, const Dataset& train) {
    std::vector<double> scores;
    for (const auto& m : ind.members) {
        const std::set<int> bag(m.bag.begin(), m.bag.end());
        const std::set<int> priv(m.private_test.begin(), m.private_test.end());
        std::vector<int> rows;
        for (int r = 0; r < static_cast<int>(train.n_rows); ++r)
            if (!bag.count(r) && !priv.count(r)) rows.push_back(r);
        if (rows.empty()) continue;
        scores.push_back(rmse_compensated_rows(*m.model, train, rows));
    }
    if (scores.empty()) throw ConfigError("oracle fempo: no member has OOB rows");
    return kahan_sum(scores) / static_cast<double>(scores.size());
}

inline double fempt_bruteforce(const Individual& ind, const Dataset& train) {
    std::vector<double> scores;
    for (const auto& m : ind.members)
        scores.push_back(rmse_compensated_rows(*m.model, train, m.private_test));
    return kahan_sum(scores) / static_cast<double>(scores.size());
}

// Materializes the full member-by-row prediction matrix and collapses it
// with compensated sums.
inline double fegt_bruteforce(const Individual& ind, const Dataset& holdout) {
    const std::size_t k = ind.members.size();
    std::vector<double> sq(holdout.n_rows);
    for (std::size_t r = 0; r < holdout.n_rows; ++r) {
        std::vector<double> preds(k);
        for (std::size_t j = 0; j < k; ++j)
            preds[j] = ind.members[j].model->predict(holdout.row(r));
        const double d = kahan_sum(preds) / static_cast<double>(k) - holdout.target[r];
        sq[r] = d * d;
    }
    return std::sqrt(kahan_sum(sq) / static_cast<double>(holdout.n_rows));
}

}  // namespace evosample::oracle

namespace evosample {

struct CheckResult {
    std::string name;
    bool pass = true;
    std::string detail;
};

namespace selfcheck_detail {

inline GaConfig small_ga(Mode mode, FitnessKind::Kind kind) {
    GaConfig cfg;
    cfg.population_size = 12;
    cfg.generations = 12;
    cfg.genome.mode = mode;
    cfg.genome.ensemble_size = 5;
    cfg.genome.floor_rows = 5;
    cfg.fitness.kind = kind;
    return cfg;
}

inline void fail(CheckResult& res, const std::string& detail) {
    res.pass = false;
    if (res.detail.empty()) res.detail = detail;
}

}  // namespace selfcheck_detail

// Hall-of-fame fitness never increases, always equals the running minimum of
// per-generation bests, and the returned individual carries that exact
// fitness. 20 seeded synthetic runs cycling through both modes and all
// three fitness kinds.
inline CheckResult check_hof_monotonic() {
    CheckResult res{"hall-of-fame monotonicity over 20 synthetic runs"};
    for (int i = 0; i < 20 && res.pass; ++i) {
        Rng rng = make_rng(100 + i);
        const Dataset train = make_synthetic(150, 4, 0.5, rng);
        const Mode mode = (i % 2 == 0) ? Mode::sub_sampling : Mode::sub_spacing;
        const auto kind = static_cast<FitnessKind::Kind>(i % 3);
        const GaConfig cfg = selfcheck_detail::small_ga(mode, kind);

        const EvolutionResult r = evolve(train, cfg, rng);
        if (r.history.size() != static_cast<std::size_t>(cfg.generations) + 1) {
            selfcheck_detail::fail(res, "run " + std::to_string(i) + ": history length " +
                                            std::to_string(r.history.size()));
            break;
        }
        double running_min = r.history[0].best;
        for (std::size_t g = 0; g < r.history.size(); ++g) {
            running_min = std::min(running_min, r.history[g].best);
            if (r.history[g].hof != running_min)
                selfcheck_detail::fail(res, "run " + std::to_string(i) + " gen " +
                                                std::to_string(g) +
                                                ": archive != running min of bests");
            if (g > 0 && r.history[g].hof > r.history[g - 1].hof)
                selfcheck_detail::fail(res, "run " + std::to_string(i) + " gen " +
                                                std::to_string(g) + ": archive increased");
        }
        if (!r.hall_of_fame.fitness || *r.hall_of_fame.fitness != r.history.back().hof)
            selfcheck_detail::fail(res,
                                   "run " + std::to_string(i) + ": returned HOF fitness mismatch");
    }
    return res;
}

// Crossover conserves the combined member multiset of the two parents,
// fitted trees included (compared by identity: trees travel, no refits).
inline CheckResult check_crossover_conservation() {
    CheckResult res{"crossover conservation over 1000 seeded crossovers"};
    using Key = std::tuple<std::vector<int>, std::vector<int>, std::vector<int>, const void*>;
    auto keys_of = [](const Individual& a, const Individual& b) {
        std::vector<Key> keys;
        for (const auto* ind : {&a, &b})
            for (const auto& m : ind->members)
                keys.emplace_back(m.bag, m.features, m.private_test,
                                  static_cast<const void*>(m.model.get()));
        std::sort(keys.begin(), keys.end());
        return keys;
    };

    for (int i = 0; i < 1000 && res.pass; ++i) {
        Rng rng = make_rng(2000 + i);
        const Dataset train = make_synthetic(40, 3, 0.3, rng);
        GenomeConfig cfg;
        cfg.mode = (i % 2 == 0) ? Mode::sub_sampling : Mode::sub_spacing;
        cfg.ensemble_size = 3 + static_cast<int>(uniform_index(rng, 10));  // 3..12
        cfg.floor_rows = 5;
        FitnessKind kind;
        kind.kind = (i % 3 == 0) ? FitnessKind::Kind::fempt : FitnessKind::Kind::fempo;

        const Individual a = init_individual(train, cfg, kind, rng);
        const Individual b = init_individual(train, cfg, kind, rng);
        const auto before = keys_of(a, b);
        const auto children = crossover_two_point(a, b, rng);
        const auto after = keys_of(children.first, children.second);
        if (before != after)
            selfcheck_detail::fail(res, "seed " + std::to_string(2000 + i) +
                                            ": member multiset not conserved");
        if (children.first.fitness || children.second.fitness)
            selfcheck_detail::fail(res, "seed " + std::to_string(2000 + i) +
                                            ": child fitness cache not cleared");
    }
    return res;
}

// No member is ever evaluated on a row inside its own bag: OOB sets and
// private test sets stay disjoint from the bag through init and mutation.
inline CheckResult check_oob_isolation() {
    CheckResult res{"OOB / private-test isolation over 1000 seeded individuals"};
    for (int i = 0; i < 1000 && res.pass; ++i) {
        Rng rng = make_rng(3000 + i);
        const Dataset train = make_synthetic(60, 4, 0.4, rng);
        GenomeConfig cfg;
        cfg.mode = (i % 2 == 0) ? Mode::sub_sampling : Mode::sub_spacing;
        cfg.ensemble_size = 4;
        cfg.floor_rows = 5;
        FitnessKind kind;
        kind.kind = (i % 2 == 0) ? FitnessKind::Kind::fempo : FitnessKind::Kind::fempt;

        Individual ind = init_individual(train, cfg, kind, rng);
        for (int mu = 0; mu < 3; ++mu) ind = mutate(ind, train, cfg, rng);

        for (const auto& m : ind.members) {
            const std::set<int> bag(m.bag.begin(), m.bag.end());
            for (int r : oob_rows(m, train.n_rows))
                if (bag.count(r))
                    selfcheck_detail::fail(res, "seed " + std::to_string(3000 + i) +
                                                    ": OOB row inside the bag");
            for (int r : m.private_test)
                if (bag.count(r))
                    selfcheck_detail::fail(res, "seed " + std::to_string(3000 + i) +
                                                    ": private-test row inside the bag");
        }
    }
    return res;
}

// Production fit against the exhaustive-split oracle, node for node, on 200
// small random datasets mixing continuous and quantized features, duplicate
// bag rows, and constant targets.
inline CheckResult check_tree_oracle() {
    CheckResult res{"tree fit vs exhaustive-split oracle on 200 datasets"};
    for (int i = 0; i < 200 && res.pass; ++i) {
        Rng rng = make_rng(5000 + i);
        const std::size_t n_rows = 3 + uniform_index(rng, 10);   // 3..12
        const std::size_t n_cols = 1 + uniform_index(rng, 3);    // 1..3
        Dataset ds = make_synthetic(n_rows, n_cols, 0.6, rng);
        if (i % 3 == 1) {
            // Quantized features create duplicate values and exercise the
            // distinct-neighbor threshold enumeration.
            for (auto& v : ds.features) v = std::floor(v * 4.0) / 4.0;
        }
        if (i % 17 == 0) {
            for (auto& y : ds.target) y = 2.5;  // constant target: root must be a leaf
        }

        std::vector<int> rows;
        if (i % 2 == 0) {
            rows.resize(n_rows);
            for (std::size_t r = 0; r < n_rows; ++r) rows[r] = static_cast<int>(r);
        } else {
            // Bootstrap-style multiset with duplicates.
            for (std::size_t r = 0; r < n_rows; ++r)
                rows.push_back(static_cast<int>(uniform_index(rng, n_rows)));
            std::sort(rows.begin(), rows.end());
        }
        std::vector<int> features(n_cols);
        for (std::size_t j = 0; j < n_cols; ++j) features[j] = static_cast<int>(j);
        const int max_depth = 1 + static_cast<int>(uniform_index(rng, 2));  // 1..2

        const RegressionTree tree = RegressionTree::fit(ds, rows, features, max_depth);
        const auto expected = oracle::oracle_fit(ds, rows, features, 0, max_depth);
        std::string why;
        if (!oracle::same_tree(*expected, tree.root(), 1e-9, why))
            selfcheck_detail::fail(res, "seed " + std::to_string(5000 + i) + ": " + why);
    }
    return res;
}

// Incomplete-beta p-values against direct quadrature of the t density over
// the full df range, plus exact symmetry in the sign of t.
inline CheckResult check_ttest_oracle() {
    CheckResult res{"t-test p-values vs quadrature oracle, df 1..200"};
    const double ts[] = {0.0, 0.5, 1.0, 2.0, 3.0, 5.0, 10.0};
    for (long df = 1; df <= 200 && res.pass; ++df) {
        for (double t : ts) {
            const double p = student_t_two_sided_p(t, df);
            const double q = oracle::t_two_sided_p_quadrature(t, df);
            if (std::fabs(p - q) > 1e-8) {
                selfcheck_detail::fail(
                    res, "df=" + std::to_string(df) + " t=" + std::to_string(t) + ": |" +
                             std::to_string(p) + " - " + std::to_string(q) + "| > 1e-8");
                break;
            }
            if (student_t_two_sided_p(-t, df) != p) {
                selfcheck_detail::fail(res, "df=" + std::to_string(df) +
                                                " t=" + std::to_string(t) + ": p not symmetric");
                break;
            }
        }
    }

    // The full paired path once, against the same oracle.
    if (res.pass) {
        const std::vector<double> d = {1.1, 0.9, 1.3, 0.7, 1.0, 1.2, 0.8, 1.05, 0.95, 1.0};
        const std::vector<double> zeros(d.size(), 0.0);
        const TTestResult r = paired_t_test(d, zeros);
        const double q = oracle::t_two_sided_p_quadrature(r.t, r.df);
        if (std::fabs(r.p - q) > 1e-8)
            selfcheck_detail::fail(res, "paired t-test p " + std::to_string(r.p) +
                                            " vs quadrature " + std::to_string(q));
    }
    return res;
}

// Two executions of one ExperimentSpec must serialize identically once the
// wall-clock field is zeroed; a parallel execution must match as well.
inline CheckResult check_determinism() {
    CheckResult res{"end-to-end report determinism"};
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "evosample_selfcheck";
    fs::create_directories(dir);
    const fs::path csv = dir / "synthetic.csv";
    {
        Rng rng = make_rng(7);
        const Dataset ds = make_synthetic(120, 3, 0.4, rng);
        std::ofstream out(csv);
        write_csv(ds, out);
    }

    ExperimentSpec spec;
    spec.name = "selfcheck";
    spec.data_path = csv.string();
    spec.mode = Mode::sub_sampling;
    spec.fitness.kind = FitnessKind::Kind::fempo;
    spec.test_fraction = 0.25;
    spec.runs = 3;
    spec.base_seed = 42;
    spec.ga.population_size = 10;
    spec.ga.generations = 5;
    spec.ga.genome.ensemble_size = 5;
    spec.ga.genome.floor_rows = 5;

    auto scrubbed = [](ordered_json j) {
        j["wall_clock_seconds"] = 0.0;
        return j.dump(2);
    };
    const std::string first = scrubbed(run_experiment(spec));
    const std::string second = scrubbed(run_experiment(spec));
    ExperimentSpec parallel = spec;
    parallel.jobs = 3;
    const std::string third = scrubbed(run_experiment(parallel));

    if (first != second) selfcheck_detail::fail(res, "two sequential executions differ");
    if (first != third) selfcheck_detail::fail(res, "parallel execution differs from sequential");
    return res;
}

// The deterministic acceptance checks, in criterion order.
inline std::vector<CheckResult> run_selftest() {
    return {
        check_hof_monotonic(),        check_crossover_conservation(), check_oob_isolation(),
        check_tree_oracle(),          check_ttest_oracle(),           check_determinism(),
    };
}

}  // namespace evosample
