#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qsynth {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Raised when a caller violates an operation precondition.
struct invalid_argument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Raised when a model cannot be fitted from the supplied data.
struct fit_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a training step produces a non-finite quantity.
struct train_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised on unreadable or malformed input files.
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised on unknown or ill-typed configuration keys.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) {
        throw invalid_argument(msg);
    }
}

} // namespace qsynth
