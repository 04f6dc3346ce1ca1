#pragma once

#include <stdexcept>
#include <string>

namespace snodri {

// Error families map onto process exit codes: usage/config = 1, data = 2,
// numeric failure = 3 (see tools/snodri_cli.cpp).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A calendar month with at least one day missing under the reject policy.
struct IncompleteMonth : DataError {
    using DataError::DataError;
};

/// Standardization of a constant series.
struct ZeroVariance : NumericError {
    using NumericError::NumericError;
};

/// A requested variable_id is not present in the table.
struct MissingVariable : DataError {
    using DataError::DataError;
};

/// Distribution fit on a sample with no positive mass.
struct AllZero : NumericError {
    using NumericError::NumericError;
};

}  // namespace snodri
