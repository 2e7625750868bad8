#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include <evosample/dataset.hpp>
#include <evosample/error.hpp>
#include <evosample/rng.hpp>
#include <evosample/selfcheck.hpp>
#include <evosample/tree.hpp>

using namespace evosample;

namespace {

Dataset column_dataset(std::vector<std::vector<double>> columns, std::vector<double> target) {
    Dataset ds;
    ds.n_rows = target.size();
    ds.n_cols = columns.size();
    ds.target = std::move(target);
    ds.target_name = "y";
    ds.features.resize(ds.n_rows * ds.n_cols);
    for (std::size_t j = 0; j < ds.n_cols; ++j) {
        ds.feature_names.push_back("f" + std::to_string(j));
        for (std::size_t i = 0; i < ds.n_rows; ++i) ds.features[i * ds.n_cols + j] = columns[j][i];
    }
    return ds;
}

std::vector<int> iota_rows(std::size_t n) {
    std::vector<int> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<int>(i);
    return rows;
}

}  // namespace

TEST_CASE("a clean two-cluster target splits at the midpoint", "[tree]") {
    const Dataset ds = column_dataset({{1, 2, 3, 4}}, {1, 1, 3, 3});
    const auto tree = RegressionTree::fit(ds, iota_rows(4), std::vector<int>{0}, 3);

    const TreeNode& root = tree.root();
    REQUIRE_FALSE(root.is_leaf());
    CHECK(root.feature == 0);
    CHECK(root.threshold == 2.5);
    CHECK(root.left->is_leaf());
    CHECK(root.left->value == 1.0);
    CHECK(root.right->value == 3.0);
    CHECK(tree.depth() == 1);

    CHECK(tree.predict(std::vector<double>{2.0}) == 1.0);
    CHECK(tree.predict(std::vector<double>{2.5}) == 1.0);  // <= routes left
    CHECK(tree.predict(std::vector<double>{2.6}) == 3.0);
}

TEST_CASE("constant targets produce a single leaf", "[tree]") {
    const Dataset ds = column_dataset({{1, 2, 3, 4}}, {7, 7, 7, 7});
    const auto tree = RegressionTree::fit(ds, iota_rows(4), std::vector<int>{0}, 5);
    CHECK(tree.root().is_leaf());
    CHECK(tree.root().value == 7.0);
    CHECK(tree.depth() == 0);
}

TEST_CASE("no split candidates leaves the mean at the root", "[tree]") {
    // One distinct feature value: no threshold exists between distinct values.
    const Dataset ds = column_dataset({{2, 2, 2}}, {1, 2, 6});
    const auto tree = RegressionTree::fit(ds, iota_rows(3), std::vector<int>{0}, 5);
    CHECK(tree.root().is_leaf());
    CHECK(tree.root().value == 3.0);
}

TEST_CASE("ties between identical features break toward the lowest id", "[tree]") {
    const Dataset ds = column_dataset({{1, 2, 3, 4}, {1, 2, 3, 4}}, {1, 1, 3, 3});
    const auto tree = RegressionTree::fit(ds, iota_rows(4), std::vector<int>{0, 1}, 2);
    REQUIRE_FALSE(tree.root().is_leaf());
    CHECK(tree.root().feature == 0);
}

TEST_CASE("the depth cap is honored", "[tree]") {
    Rng rng = make_rng(17);
    const Dataset ds = make_synthetic(200, 3, 0.1, rng);
    for (int cap = 1; cap <= 4; ++cap) {
        const auto tree = RegressionTree::fit(ds, iota_rows(200), std::vector<int>{0, 1, 2}, cap);
        CHECK(tree.depth() <= cap);
    }
}

TEST_CASE("duplicate rows in the bag weight the fit", "[tree]") {
    const Dataset ds = column_dataset({{1, 2}}, {0, 3});
    // Row 0 appears twice: leaf means and split scoring act on the multiset.
    const auto tree = RegressionTree::fit(ds, std::vector<int>{0, 0, 1}, std::vector<int>{0}, 1);
    REQUIRE_FALSE(tree.root().is_leaf());
    CHECK(tree.root().n_samples == 3);
    CHECK(tree.root().left->n_samples == 2);
    CHECK(tree.root().left->value == 0.0);
    CHECK(tree.root().value == 1.0);  // (0 + 0 + 3) / 3
}

TEST_CASE("fit validates its inputs", "[tree]") {
    const Dataset ds = column_dataset({{1, 2, 3}}, {1, 2, 3});
    CHECK_THROWS_AS(RegressionTree::fit(ds, std::vector<int>{}, std::vector<int>{0}, 3),
                    ConfigError);
    CHECK_THROWS_AS(RegressionTree::fit(ds, iota_rows(3), std::vector<int>{}, 3), ConfigError);
    CHECK_THROWS_AS(RegressionTree::fit(ds, iota_rows(3), std::vector<int>{0}, 0), ConfigError);
    CHECK_THROWS_AS(RegressionTree::fit(ds, std::vector<int>{0, 5}, std::vector<int>{0}, 3),
                    InvariantError);
    CHECK_THROWS_AS(RegressionTree::fit(ds, iota_rows(3), std::vector<int>{2}, 3),
                    InvariantError);
}

TEST_CASE("predict rejects rows narrower than the fitted feature space", "[tree]") {
    const Dataset ds = column_dataset({{1, 2, 3, 4}, {4, 3, 2, 1}}, {1, 1, 3, 3});
    const auto tree = RegressionTree::fit(ds, iota_rows(4), std::vector<int>{0, 1}, 3);
    CHECK_THROWS_AS(tree.predict(std::vector<double>{1.0}), InvariantError);
}

TEST_CASE("fit agrees with the exhaustive-split oracle on random data", "[tree]") {
    // The full 200-dataset sweep runs in the acceptance suite; this is a
    // quick regression guard over a few representative shapes.
    for (int i = 0; i < 25; ++i) {
        Rng rng = make_rng(900 + i);
        const std::size_t n = 4 + uniform_index(rng, 8);
        const std::size_t d = 1 + uniform_index(rng, 3);
        Dataset ds = make_synthetic(n, d, 0.5, rng);
        if (i % 2 == 0)
            for (auto& v : ds.features) v = std::floor(v * 3.0) / 3.0;

        std::vector<int> features(d);
        for (std::size_t j = 0; j < d; ++j) features[j] = static_cast<int>(j);
        const int cap = 1 + static_cast<int>(uniform_index(rng, 2));
        const auto tree = RegressionTree::fit(ds, iota_rows(n), features, cap);
        const auto expected = oracle::oracle_fit(ds, iota_rows(n), features, 0, cap);
        std::string why;
        INFO("seed " << 900 + i << ": " << why);
        CHECK(oracle::same_tree(*expected, tree.root(), 1e-9, why));
    }
}
