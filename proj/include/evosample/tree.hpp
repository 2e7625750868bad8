#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "evosample/dataset.hpp"
#include "evosample/error.hpp"

namespace evosample {

// Either an internal split (left <=> value <= threshold) or a leaf holding
// the mean target of the training rows that reached it.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    std::unique_ptr<TreeNode> left;
    std::unique_ptr<TreeNode> right;
    double value = 0.0;
    int n_samples = 0;

    bool is_leaf() const { return left == nullptr; }
};

// Depth-capped CART regressor with the mean-squared-error criterion. No
// pruning and no minimum leaf size beyond "both children non-empty"; the
// depth cap is the only regularizer. Fitting is deterministic: candidate
// thresholds are midpoints between consecutive distinct sorted values, the
// split minimizing total child squared error wins, and ties go to the lowest
// feature index, then the smallest threshold.
//
// Ties are real, not hypothetical: two candidates on different features that
// induce the same row partition have exactly equal error. The fast prefix
// formula rounds differently per feature, so near-tie comparisons are
// re-decided on a canonical score (compensated sums over the subset in bag
// order), which is a pure function of the partition.
class RegressionTree {
public:
    // row_ids is a multiset: a row appearing twice counts twice in every mean
    // and variance, which is what bootstrap bags require.
    static RegressionTree fit(const Dataset& ds, std::span<const int> row_ids,
                              std::span<const int> feature_ids, int max_depth) {
        if (row_ids.empty()) throw ConfigError("tree fit: empty row set");
        if (feature_ids.empty()) throw ConfigError("tree fit: empty feature set");
        if (max_depth < 1) throw ConfigError("tree fit: max_depth must be >= 1");
        for (int r : row_ids)
            if (r < 0 || static_cast<std::size_t>(r) >= ds.n_rows)
                throw InvariantError("tree fit: row index out of range");
        for (int f : feature_ids)
            if (f < 0 || static_cast<std::size_t>(f) >= ds.n_cols)
                throw InvariantError("tree fit: feature index out of range");

        RegressionTree tree;
        tree.max_depth_ = max_depth;
        tree.feature_ids_.assign(feature_ids.begin(), feature_ids.end());
        std::vector<int> rows(row_ids.begin(), row_ids.end());
        tree.root_ = build(ds, rows, tree.feature_ids_, 0, max_depth);
        for (int f : tree.feature_ids_)
            tree.min_row_width_ = std::max(tree.min_row_width_, static_cast<std::size_t>(f) + 1);
        return tree;
    }

    double predict(std::span<const double> row) const {
        if (row.size() < min_row_width_)
            throw InvariantError("predict: row shorter than the tree's feature range");
        const TreeNode* node = root_.get();
        while (!node->is_leaf())
            node = row[node->feature] <= node->threshold ? node->left.get() : node->right.get();
        return node->value;
    }

    const TreeNode& root() const { return *root_; }
    int max_depth() const { return max_depth_; }
    const std::vector<int>& feature_ids() const { return feature_ids_; }

    // Longest root-to-leaf chain of internal nodes.
    int depth() const { return measure(*root_); }

private:
    static int measure(const TreeNode& node) {
        if (node.is_leaf()) return 0;
        return 1 + std::max(measure(*node.left), measure(*node.right));
    }

    static std::unique_ptr<TreeNode> make_leaf(double value, int n) {
        auto node = std::make_unique<TreeNode>();
        node->value = value;
        node->n_samples = n;
        return node;
    }

    static double compensated_sum(const std::vector<double>& xs) {
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

    // Canonical subset score: compensated mean, then compensated sum of
    // squared deviations, rows visited in the multiset's own order. Depends
    // only on which rows are in the subset, never on the feature that put
    // them there.
    static double canonical_sse(const Dataset& ds, const std::vector<int>& rows) {
        std::vector<double> buf(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) buf[i] = ds.target[rows[i]];
        const double m = compensated_sum(buf) / static_cast<double>(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const double d = ds.target[rows[i]] - m;
            buf[i] = d * d;
        }
        return compensated_sum(buf);
    }

    static std::unique_ptr<TreeNode> build(const Dataset& ds, const std::vector<int>& rows,
                                           const std::vector<int>& features, int depth,
                                           int max_depth) {
        const std::size_t n = rows.size();
        double sum = 0.0;
        for (int r : rows) sum += ds.target[r];
        const double mean = sum / static_cast<double>(n);

        bool constant = true;
        for (int r : rows)
            if (ds.target[r] != ds.target[rows[0]]) {
                constant = false;
                break;
            }
        if (depth == max_depth || n < 2 || constant)
            return make_leaf(mean, static_cast<int>(n));

        double parent_sse = 0.0;
        double abs_sum = 0.0;
        double sq_sum = 0.0;
        for (int r : rows) {
            const double d = ds.target[r] - mean;
            parent_sse += d * d;
            abs_sum += std::fabs(ds.target[r]);
            sq_sum += ds.target[r] * ds.target[r];
        }

        // Comparisons closer than this are inside the prefix formula's
        // rounding noise and get re-decided canonically. The bound is ~16x
        // the worst-case accumulated error, yet far below any genuine gap.
        const double band = 32.0 * std::numeric_limits<double>::epsilon() *
                            static_cast<double>(n) * (sq_sum + abs_sum * abs_sum + 1.0);

        struct Candidate {
            int feature;
            double threshold;
            double hat;  // prefix-formula score
        };
        std::vector<Candidate> finalists;  // everything within 2*band of the running best
        double best_hat = parent_sse;

        std::vector<std::pair<double, double>> points(n);  // (value, target)
        std::vector<double> prefix_sum(n), prefix_sq(n);
        for (int f : features) {
            for (std::size_t i = 0; i < n; ++i)
                points[i] = {ds.at(rows[i], f), ds.target[rows[i]]};
            std::stable_sort(points.begin(), points.end(),
                             [](const auto& a, const auto& b) { return a.first < b.first; });
            double s = 0.0, q = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                s += points[i].second;
                q += points[i].second * points[i].second;
                prefix_sum[i] = s;
                prefix_sq[i] = q;
            }
            for (std::size_t i = 0; i + 1 < n; ++i) {
                if (!(points[i].first < points[i + 1].first)) continue;
                const double nl = static_cast<double>(i + 1);
                const double nr = static_cast<double>(n - i - 1);
                const double sse_l = prefix_sq[i] - prefix_sum[i] * prefix_sum[i] / nl;
                const double sr = prefix_sum[n - 1] - prefix_sum[i];
                const double sse_r = (prefix_sq[n - 1] - prefix_sq[i]) - sr * sr / nr;
                const double hat = sse_l + sse_r;
                if (hat > best_hat + 2.0 * band) continue;
                finalists.push_back({f, (points[i].first + points[i + 1].first) / 2.0, hat});
                if (hat < best_hat) {
                    best_hat = hat;
                    std::erase_if(finalists,
                                  [&](const Candidate& c) { return c.hat > best_hat + 2.0 * band; });
                }
            }
        }

        // Canonical pass over the survivors, in scan order (feature asc,
        // threshold asc), strict improvement over the parent required. Exact
        // ties keep the earliest candidate.
        int best_feature = -1;
        double best_threshold = 0.0;
        double best_canon = canonical_sse(ds, rows);
        std::vector<int> left_rows, right_rows;
        for (const Candidate& c : finalists) {
            if (c.hat > best_hat + 2.0 * band) continue;
            std::vector<int> lhs, rhs;
            for (int r : rows)
                (ds.at(r, c.feature) <= c.threshold ? lhs : rhs).push_back(r);
            const double canon = canonical_sse(ds, lhs) + canonical_sse(ds, rhs);
            if (canon < best_canon) {
                best_canon = canon;
                best_feature = c.feature;
                best_threshold = c.threshold;
                left_rows = std::move(lhs);
                right_rows = std::move(rhs);
            }
        }

        if (best_feature < 0) return make_leaf(mean, static_cast<int>(n));

        auto node = std::make_unique<TreeNode>();
        node->feature = best_feature;
        node->threshold = best_threshold;
        node->value = mean;  // internal nodes carry their row mean as well
        node->n_samples = static_cast<int>(n);
        node->left = build(ds, left_rows, features, depth + 1, max_depth);
        node->right = build(ds, right_rows, features, depth + 1, max_depth);
        return node;
    }

    std::unique_ptr<TreeNode> root_;
    int max_depth_ = 0;
    std::vector<int> feature_ids_;
    std::size_t min_row_width_ = 0;
};

}  // namespace evosample
