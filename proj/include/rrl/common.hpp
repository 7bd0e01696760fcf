#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace rrl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Precondition or dimension mismatch on a public entry point.
struct contract_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A computation produced a non-finite or otherwise unusable intermediate.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent market data.
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw contract_error(what);
}

}  // namespace detail

/// Largest double below 1. tanh rounds to exactly 1 for large arguments;
/// activations and positions are clamped to stay strictly inside (-1, 1).
inline constexpr double kOpenUnitMax = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;

/// sign(0) == 0.
inline double sign(double x) noexcept {
    return static_cast<double>((x > 0.0) - (x < 0.0));
}

}  // namespace rrl
