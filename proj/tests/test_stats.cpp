#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include <evosample/error.hpp>
#include <evosample/rng.hpp>
#include <evosample/selfcheck.hpp>
#include <evosample/stats.hpp>

using namespace evosample;

TEST_CASE("mse and rmse on hand-checked values", "[stats]") {
    const std::vector<double> pred{1.0, 2.0};
    const std::vector<double> truth{1.0, 4.0};
    CHECK(mse(pred, truth) == 2.0);  // (0 + 4) / 2, exact in binary
    CHECK(rmse(pred, truth) == Catch::Approx(std::sqrt(2.0)).epsilon(1e-15));

    CHECK_THROWS_AS(mse(pred, std::vector<double>{1.0}), InvariantError);
    CHECK_THROWS_AS(mse(std::vector<double>{}, std::vector<double>{}), InvariantError);
}

TEST_CASE("plain summation stays close to compensated summation", "[stats]") {
    Rng rng = make_rng(1);
    std::vector<double> pred(1000);
    std::vector<double> truth(1000);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        pred[i] = 1e6 * uniform_real(rng);
        truth[i] = 1e6 * uniform_real(rng);
    }
    const double naive = mse(pred, truth);
    const double comp = oracle::mse_compensated(pred, truth);
    CHECK(naive == Catch::Approx(comp).epsilon(1e-10));
    CHECK(rmse(pred, truth) * rmse(pred, truth) == Catch::Approx(naive).epsilon(1e-12));
}

TEST_CASE("mean and sample standard deviation", "[stats]") {
    const std::vector<double> xs{2.0, 4.0};
    CHECK(mean(xs) == 3.0);
    CHECK(sample_std(xs) == Catch::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(sample_std(std::vector<double>{5.0, 5.0, 5.0}) == 0.0);
    CHECK_THROWS_AS(sample_std(std::vector<double>{1.0}), InvariantError);
    CHECK_THROWS_AS(mean(std::vector<double>{}), InvariantError);
}

TEST_CASE("regularized incomplete beta hits closed forms", "[stats]") {
    // I_x(1, b) = 1 - (1-x)^b.
    CHECK(regularized_incomplete_beta(1.0, 0.5, 3.0 / 7.0) ==
          Catch::Approx(1.0 - std::sqrt(4.0 / 7.0)).epsilon(1e-12));
    // Arcsine distribution: I_x(1/2, 1/2) = (2/pi) asin(sqrt(x)).
    CHECK(regularized_incomplete_beta(0.5, 0.5, 0.25) == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(regularized_incomplete_beta(0.5, 0.5, 0.5) == Catch::Approx(0.5).epsilon(1e-12));
    CHECK(regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
    CHECK(regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
    CHECK_THROWS_AS(regularized_incomplete_beta(0.0, 1.0, 0.5), InvariantError);
    CHECK_THROWS_AS(regularized_incomplete_beta(1.0, 1.0, 1.5), InvariantError);
}

TEST_CASE("incomplete beta satisfies the complement identity", "[stats]") {
    for (double a : {0.5, 1.0, 2.5, 10.0, 100.0}) {
        for (double b : {0.5, 1.0, 2.5, 10.0}) {
            for (double x : {0.01, 0.2, 0.5, 0.8, 0.99}) {
                const double lhs = regularized_incomplete_beta(a, b, x);
                const double rhs = 1.0 - regularized_incomplete_beta(b, a, 1.0 - x);
                CHECK(lhs == Catch::Approx(rhs).margin(1e-12));
            }
        }
    }
}

TEST_CASE("student t tail probabilities", "[stats]") {
    CHECK(student_t_two_sided_p(0.0, 10) == 1.0);
    // df = 1 is the Cauchy distribution: P(|T| > 1) = 1/2.
    CHECK(student_t_two_sided_p(1.0, 1) == Catch::Approx(0.5).epsilon(1e-12));
    CHECK(student_t_two_sided_p(std::numeric_limits<double>::infinity(), 5) == 0.0);
    CHECK_THROWS_AS(student_t_two_sided_p(std::nan(""), 5), InvariantError);
    CHECK_THROWS_AS(student_t_two_sided_p(1.0, 0), InvariantError);

    // Even function of t, exactly: both sides compute from t^2.
    for (double t : {0.3, 1.7, 4.2}) {
        CHECK(student_t_two_sided_p(t, 7) == student_t_two_sided_p(-t, 7));
    }
    // Strictly decreasing in |t|.
    CHECK(student_t_two_sided_p(2.0, 7) < student_t_two_sided_p(1.0, 7));
    CHECK(student_t_two_sided_p(4.0, 7) < student_t_two_sided_p(2.0, 7));
}

TEST_CASE("student t matches direct density quadrature", "[stats]") {
    // Spot checks here; the acceptance suite sweeps df = 1..200.
    for (long df : {1L, 2L, 5L, 30L, 120L}) {
        for (double t : {0.5, 2.1, 6.0}) {
            CHECK(student_t_two_sided_p(t, df) ==
                  Catch::Approx(oracle::t_two_sided_p_quadrature(t, df)).margin(1e-8));
        }
    }
}

TEST_CASE("paired t-test on a hand-checked sample", "[stats]") {
    // d = {1, 2, 3}: mean 2, sample sd 1, t = 2 sqrt(3), df 2,
    // p = I_{2/(2+12)}(1, 1/2) = 1 - sqrt(6/7).
    const std::vector<double> a{2.0, 4.0, 6.0};
    const std::vector<double> b{1.0, 2.0, 3.0};
    const TTestResult r = paired_t_test(a, b);
    CHECK(r.df == 2);
    CHECK(r.t == Catch::Approx(2.0 * std::sqrt(3.0)).epsilon(1e-12));
    CHECK(r.p == Catch::Approx(1.0 - std::sqrt(6.0 / 7.0)).epsilon(1e-10));

    const TTestResult swapped = paired_t_test(b, a);
    CHECK(swapped.t == Catch::Approx(-r.t).epsilon(1e-15));
    CHECK(swapped.p == Catch::Approx(r.p).epsilon(1e-12));
}

TEST_CASE("paired t-test degenerate inputs", "[stats]") {
    const std::vector<double> x{3.0, 4.0, 5.0};
    const TTestResult zero = paired_t_test(x, x);
    CHECK(zero.t == 0.0);
    CHECK(zero.p == 1.0);

    // Constant nonzero difference: infinite t with the sign of the shift.
    std::vector<double> shifted(x);
    for (double& v : shifted) v += 2.0;
    const TTestResult inf = paired_t_test(shifted, x);
    CHECK(std::isinf(inf.t));
    CHECK(inf.t > 0.0);
    CHECK(inf.p == 0.0);

    CHECK_THROWS_AS(paired_t_test(std::vector<double>{1.0}, std::vector<double>{2.0}),
                    InvariantError);
    CHECK_THROWS_AS(paired_t_test(x, std::vector<double>{1.0, 2.0}), InvariantError);
}

TEST_CASE("aggregate_runs collapses outcomes into a report row", "[stats]") {
    std::vector<RunOutcome> outcomes;
    outcomes.push_back({0, 2.0, 1.0, 100});  // fi 2, hof 1: a win
    outcomes.push_back({1, 2.0, 1.0, 101});
    const AggregateReport rep = aggregate_runs(outcomes);
    CHECK(rep.n_runs == 2);
    CHECK(rep.hof_mean == 1.0);
    CHECK(rep.fi_mean == 2.0);
    CHECK(rep.hof_std == 0.0);
    CHECK(rep.win_percent == 100.0);
    CHECK(std::isinf(rep.t_statistic));
    CHECK(rep.t_statistic < 0.0);  // hof - fi is negative
    CHECK(rep.p_value == 0.0);
}

TEST_CASE("aggregate_runs treats ties as non-wins", "[stats]") {
    std::vector<RunOutcome> outcomes;
    outcomes.push_back({0, 1.0, 1.0, 100});  // tie
    outcomes.push_back({1, 2.0, 3.0, 101});  // loss
    outcomes.push_back({2, 3.0, 1.0, 102});  // win
    const AggregateReport rep = aggregate_runs(outcomes);
    CHECK(rep.win_percent == Catch::Approx(100.0 / 3.0).epsilon(1e-12));

    std::vector<RunOutcome> identical;
    identical.push_back({0, 1.5, 1.5, 100});
    identical.push_back({1, 2.5, 2.5, 101});
    const AggregateReport same = aggregate_runs(identical);
    CHECK(same.win_percent == 0.0);
    CHECK(same.t_statistic == 0.0);
    CHECK(same.p_value == 1.0);

    CHECK_THROWS_AS(aggregate_runs(std::vector<RunOutcome>{{0, 1.0, 2.0, 100}}), ConfigError);
}
