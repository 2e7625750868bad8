#pragma once

#include <stdexcept>
#include <string>

namespace evosample {

// Base class for everything this library throws.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid parameters or an inadmissible configuration (CLI exit code 1).
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Problems with input data files (CLI exit code 2).
struct DataError : Error {
    explicit DataError(const std::string& msg) : Error(msg) {}
};

struct FileNotFoundError : DataError {
    explicit FileNotFoundError(const std::string& path)
        : DataError("file not found: " + path) {}
};

struct EmptyFileError : DataError {
    explicit EmptyFileError(const std::string& path)
        : DataError("no data rows in file: " + path) {}
};

struct MissingTargetColumnError : DataError {
    MissingTargetColumnError(const std::string& column, const std::string& path)
        : DataError("target column '" + column + "' not present in header of " + path) {}
};

struct UnparseableCellError : DataError {
    UnparseableCellError(const std::string& cell, const std::string& column, std::size_t row)
        : DataError("cell '" + cell + "' in numeric column '" + column + "', data row " +
                    std::to_string(row) + " is not a finite number") {}
};

struct MissingValueError : DataError {
    MissingValueError(const std::string& column, std::size_t row)
        : DataError("empty cell in column '" + column + "', data row " + std::to_string(row)) {}
};

struct MalformedRowError : DataError {
    MalformedRowError(std::size_t row, std::size_t got, std::size_t want)
        : DataError("data row " + std::to_string(row) + " has " + std::to_string(got) +
                    " fields, header has " + std::to_string(want)) {}
};

struct DegenerateSplitError : DataError {
    explicit DegenerateSplitError(const std::string& msg) : DataError(msg) {}
};

// A broken internal invariant, i.e. a bug (CLI exit code 3).
struct InvariantError : Error {
    explicit InvariantError(const std::string& msg) : Error(msg) {}
};

}  // namespace evosample
