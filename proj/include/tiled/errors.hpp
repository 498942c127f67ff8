#pragma once

#include <stdexcept>
#include <string>

namespace tiled {

// Configuration / precondition problems (CLI exit code 1).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dataset / file problems (CLI exit code 2).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CorruptFileError : DataError {
    using DataError::DataError;
};

struct VersionMismatchError : DataError {
    using DataError::DataError;
};

struct FingerprintMismatchError : DataError {
    using DataError::DataError;
};

}  // namespace tiled
