#ifndef GKB_TYPES_HPP
#define GKB_TYPES_HPP

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace gkb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Point = Eigen::VectorXd;
using Index = Eigen::Index;

/// All stochastic components draw from an explicitly passed engine.
using Rng = std::mt19937_64;

/// Bad arguments: dimension mismatch, negative weights, out-of-range indices.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Factorization or iterative solver failure.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operation not available for the given kernel or model kind.
class UnsupportedError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace gkb

#endif
