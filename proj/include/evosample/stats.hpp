#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "evosample/error.hpp"

namespace evosample {

// Mean squared error with fixed left-to-right summation so results are
// reproducible across runs and across sequential/concurrent callers.
inline double mse(std::span<const double> pred, std::span<const double> truth) {
    if (pred.size() != truth.size()) throw InvariantError("mse: length mismatch");
    if (pred.empty()) throw InvariantError("mse: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        sum += d * d;
    }
    return sum / static_cast<double>(pred.size());
}

inline double rmse(std::span<const double> pred, std::span<const double> truth) {
    return std::sqrt(mse(pred, truth));
}

inline double mean(std::span<const double> xs) {
    if (xs.empty()) throw InvariantError("mean: empty input");
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

// Sample standard deviation (n-1 denominator), the convention used for the
// cross-run report columns.
inline double sample_std(std::span<const double> xs) {
    if (xs.size() < 2) throw InvariantError("sample_std: need at least 2 values");
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) {
        const double d = x - m;
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

namespace detail {

// Continued-fraction kernel for the regularized incomplete beta function
// (modified Lentz). Converges for x < (a+1)/(a+b+2); the caller applies the
// symmetry transform otherwise.
inline double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-12;
    constexpr double kFpMin = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw InvariantError("incomplete beta continued fraction did not converge");
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b), continued fraction to 1e-12.
inline double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw InvariantError("incomplete beta: a, b must be positive");
    if (!(x >= 0.0 && x <= 1.0)) throw InvariantError("incomplete beta: x outside [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * detail::beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

// Two-sided tail probability of Student's t via
// p = I_{df/(df+t^2)}(df/2, 1/2).
inline double student_t_two_sided_p(double t, long df) {
    if (df < 1) throw InvariantError("student_t_two_sided_p: df must be >= 1");
    if (std::isnan(t)) throw InvariantError("student_t_two_sided_p: t is NaN");
    if (std::isinf(t)) return 0.0;
    const double x = df / (df + t * t);
    return regularized_incomplete_beta(static_cast<double>(df) / 2.0, 0.5, x);
}

struct TTestResult {
    double t = 0.0;
    long df = 0;
    double p = 1.0;
};

// Paired t-test on a - b with sample (n-1) standard deviation. Constant
// differences are degenerate: all-zero gives (t=0, p=1), constant nonzero
// gives a signed-infinity t with p=0.
inline TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvariantError("paired_t_test: length mismatch");
    const std::size_t n = a.size();
    if (n < 2) throw InvariantError("paired_t_test: need at least 2 pairs");

    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];

    bool constant = true;
    for (std::size_t i = 1; i < n; ++i)
        if (d[i] != d[0]) {
            constant = false;
            break;
        }

    TTestResult r;
    r.df = static_cast<long>(n) - 1;
    if (constant) {
        if (d[0] == 0.0) {
            r.t = 0.0;
            r.p = 1.0;
        } else {
            r.t = std::copysign(std::numeric_limits<double>::infinity(), d[0]);
            r.p = 0.0;
        }
        return r;
    }
    const double m = mean(d);
    const double sd = sample_std(d);
    if (sd == 0.0) {
        r.t = std::copysign(std::numeric_limits<double>::infinity(), m);
        r.p = 0.0;
        return r;
    }
    r.t = m / (sd / std::sqrt(static_cast<double>(n)));
    r.p = student_t_two_sided_p(r.t, r.df);
    return r;
}

// One benchmark run's endpoint: test MSE of the first individual of
// generation 0 versus the hall-of-fame individual, same train/test split.
struct RunOutcome {
    long run_index = 0;
    double fi_test_mse = 0.0;
    double hof_test_mse = 0.0;
    std::uint64_t seed = 0;
};

struct AggregateReport {
    double hof_mean = 0.0;
    double hof_std = 0.0;
    double fi_mean = 0.0;
    double fi_std = 0.0;
    double win_percent = 0.0;  // strict hof < fi
    double t_statistic = 0.0;
    double p_value = 1.0;
    long n_runs = 0;
};

// Collapses per-run outcomes into the report row format: means, sample
// standard deviations, strict-win percentage, and a paired t-test on
// (hof, fi). Ties are not wins.
inline AggregateReport aggregate_runs(std::span<const RunOutcome> outcomes) {
    if (outcomes.size() < 2) throw ConfigError("aggregate_runs: need at least 2 runs");
    std::vector<double> hof(outcomes.size());
    std::vector<double> fi(outcomes.size());
    long wins = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        hof[i] = outcomes[i].hof_test_mse;
        fi[i] = outcomes[i].fi_test_mse;
        if (hof[i] < fi[i]) ++wins;
    }
    AggregateReport rep;
    rep.n_runs = static_cast<long>(outcomes.size());
    rep.hof_mean = mean(hof);
    rep.hof_std = sample_std(hof);
    rep.fi_mean = mean(fi);
    rep.fi_std = sample_std(fi);
    rep.win_percent = 100.0 * static_cast<double>(wins) / static_cast<double>(rep.n_runs);
    const TTestResult tt = paired_t_test(hof, fi);
    rep.t_statistic = tt.t;
    rep.p_value = tt.p;
    return rep;
}

}  // namespace evosample
