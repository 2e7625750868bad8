#pragma once

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "evosample/error.hpp"
#include "evosample/rng.hpp"

namespace evosample {

// An encoded regression dataset: a dense row-major feature matrix plus a
// target vector. Immutable after construction; safe to share across threads.
struct Dataset {
    std::vector<double> features;  // n_rows * n_cols, row major
    std::vector<double> target;    // n_rows
    std::vector<std::string> feature_names;
    std::string target_name;
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;

    double at(std::size_t row, std::size_t col) const {
        return features[row * n_cols + col];
    }
    std::span<const double> row(std::size_t r) const {
        return {features.data() + r * n_cols, n_cols};
    }
};

struct SplitPair {
    Dataset train;
    Dataset test;
    double test_fraction = 0.0;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(trim(cur));
    return out;
}

// Full-string parse; rejects trailing garbage and non-finite values.
inline std::optional<double> parse_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end != begin + s.size()) return std::nullopt;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace detail

// Distinct values sorted lexicographically map to 0, 1, 2, ... The code of a
// value depends only on the set of distinct values, not on row order.
inline std::vector<double> ordinal_encode(const std::vector<std::string>& raw) {
    std::map<std::string, double> codes;
    for (const auto& v : raw) codes[v] = 0.0;
    double next = 0.0;
    for (auto& [value, code] : codes) code = next++;
    std::vector<double> out;
    out.reserve(raw.size());
    for (const auto& v : raw) out.push_back(codes.at(v));
    return out;
}

// Reads a comma-separated file with a header row. The target column becomes
// the regression target; every other column is a feature. Columns whose cells
// all parse as finite numbers stay numeric, anything else is ordinal-encoded.
// Empty cells are a hard error: none of the supported benchmark files contain
// missing values, and silent imputation would skew comparisons.
inline Dataset load_csv(const std::string& path, const std::string& target_column) {
    std::ifstream in(path);
    if (!in) throw FileNotFoundError(path);

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && detail::trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) throw EmptyFileError(path);

    const std::vector<std::string> header = detail::split_fields(lines[0]);
    std::size_t target_idx = header.size();
    if (target_column.empty()) {
        target_idx = header.size() - 1;  // default: last column is the target
    } else {
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (header[j] == target_column) {
                target_idx = j;
                break;
            }
        }
    }
    if (target_idx == header.size()) throw MissingTargetColumnError(target_column, path);

    const std::size_t n_rows = lines.size() - 1;
    if (n_rows == 0) throw EmptyFileError(path);
    if (n_rows < 2)
        throw DataError("need at least 2 data rows, got " + std::to_string(n_rows) +
                        " in " + path);

    std::vector<std::vector<std::string>> cells(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) {
        cells[i] = detail::split_fields(lines[i + 1]);
        if (cells[i].size() != header.size())
            throw MalformedRowError(i, cells[i].size(), header.size());
        for (std::size_t j = 0; j < cells[i].size(); ++j) {
            if (cells[i][j].empty()) throw MissingValueError(header[j], i);
        }
    }

    Dataset ds;
    ds.n_rows = n_rows;
    ds.n_cols = header.size() - 1;
    ds.target_name = header[target_idx];
    ds.features.assign(n_rows * ds.n_cols, 0.0);
    ds.target.resize(n_rows);
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j != target_idx) ds.feature_names.push_back(header[j]);
    }

    // Target must be numeric.
    for (std::size_t i = 0; i < n_rows; ++i) {
        const auto v = detail::parse_double(cells[i][target_idx]);
        if (!v) throw UnparseableCellError(cells[i][target_idx], ds.target_name, i);
        ds.target[i] = *v;
    }

    std::size_t out_col = 0;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j == target_idx) continue;
        std::vector<double> numeric(n_rows);
        bool all_numeric = true;
        for (std::size_t i = 0; i < n_rows; ++i) {
            const auto v = detail::parse_double(cells[i][j]);
            if (!v) {
                all_numeric = false;
                break;
            }
            numeric[i] = *v;
        }
        if (!all_numeric) {
            std::vector<std::string> raw(n_rows);
            for (std::size_t i = 0; i < n_rows; ++i) raw[i] = cells[i][j];
            numeric = ordinal_encode(raw);
        }
        for (std::size_t i = 0; i < n_rows; ++i)
            ds.features[i * ds.n_cols + out_col] = numeric[i];
        ++out_col;
    }
    return ds;
}

namespace detail {

inline Dataset take_rows(const Dataset& ds, const std::vector<std::size_t>& rows) {
    Dataset out;
    out.n_rows = rows.size();
    out.n_cols = ds.n_cols;
    out.feature_names = ds.feature_names;
    out.target_name = ds.target_name;
    out.features.reserve(rows.size() * ds.n_cols);
    out.target.reserve(rows.size());
    for (std::size_t r : rows) {
        const auto row = ds.row(r);
        out.features.insert(out.features.end(), row.begin(), row.end());
        out.target.push_back(ds.target[r]);
    }
    return out;
}

}  // namespace detail

// Seeded uniform split. Test size is round-half-up of test_fraction * n_rows;
// both sides keep their rows in the source order.
inline SplitPair train_test_split(const Dataset& ds, double test_fraction, Rng& rng) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ConfigError("test_fraction must lie in (0,1), got " +
                          std::to_string(test_fraction));
    const long n_test = round_half_up(test_fraction * static_cast<double>(ds.n_rows));
    if (n_test < 1 || static_cast<std::size_t>(n_test) >= ds.n_rows)
        throw DegenerateSplitError("split of " + std::to_string(ds.n_rows) +
                                   " rows at fraction " + std::to_string(test_fraction) +
                                   " leaves an empty side");

    std::vector<std::size_t> order(ds.n_rows);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle(order, rng);

    std::vector<std::size_t> test_rows(order.begin(), order.begin() + n_test);
    std::vector<std::size_t> train_rows(order.begin() + n_test, order.end());
    std::sort(test_rows.begin(), test_rows.end());
    std::sort(train_rows.begin(), train_rows.end());

    SplitPair pair;
    pair.train = detail::take_rows(ds, train_rows);
    pair.test = detail::take_rows(ds, test_rows);
    pair.test_fraction = test_fraction;
    return pair;
}

// Closed-form mean of the synthetic target, exposed so tests can compute the
// noise floor exactly:
//   mean(x) = 1 if x0 <= 0.5 else 3,  plus 1.5 if a second feature exists
//   and x1 > 0.5.
inline double synthetic_mean(std::span<const double> row) {
    double m = row[0] <= 0.5 ? 1.0 : 3.0;
    if (row.size() >= 2 && row[1] > 0.5) m += 1.5;
    return m;
}

/// Test fixture generator: features uniform in [0,1), target = synthetic_mean
// plus Gaussian noise of the given scale. Draw order is all features first
// (row major), then one noise deviate per row.
inline Dataset make_synthetic(std::size_t n_rows, std::size_t n_cols, double noise, Rng& rng) {
    if (n_rows < 2) throw ConfigError("make_synthetic: need n_rows >= 2");
    if (n_cols < 1) throw ConfigError("make_synthetic: need n_cols >= 1");
    if (noise < 0.0) throw ConfigError("make_synthetic: noise must be >= 0");

    Dataset ds;
    ds.n_rows = n_rows;
    ds.n_cols = n_cols;
    ds.target_name = "target";
    for (std::size_t j = 0; j < n_cols; ++j) ds.feature_names.push_back("x" + std::to_string(j));
    ds.features.resize(n_rows * n_cols);
    for (auto& v : ds.features) v = uniform_real(rng);
    ds.target.resize(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) {
        double y = synthetic_mean(ds.row(i));
        if (noise > 0.0) y += noise * normal(rng);
        ds.target[i] = y;
    }
    return ds;
}

// Writes header plus rows; the target column is appended last.
inline void write_csv(const Dataset& ds, std::ostream& out) {
    for (const auto& name : ds.feature_names) out << name << ',';
    out << (ds.target_name.empty() ? std::string("target") : ds.target_name) << '\n';
    out.precision(17);
    for (std::size_t i = 0; i < ds.n_rows; ++i) {
        for (std::size_t j = 0; j < ds.n_cols; ++j) out << ds.at(i, j) << ',';
        out << ds.target[i] << '\n';
    }
}

}  // namespace evosample
