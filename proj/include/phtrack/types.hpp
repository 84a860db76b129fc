#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace phtrack {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;
using Index = Eigen::Index;

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A matrix that must be inverted (M(q), GᵀW₁K_ζ, ...) is singular or
/// rank-deficient.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// A structural invariant of a plant or design is violated.
class InvariantError : public Error {
public:
    using Error::Error;
};

/// Integration produced non-finite or exploding states.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, double time)
        : Error(what), time_(time) {}
    double time() const { return time_; }

private:
    double time_;
};

/// A simulation was requested for a design whose certificate failed.
class GateError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent scenario configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

inline void require_dim(Index actual, Index expected, const char* what) {
    if (actual != expected) {
        throw DimensionError(std::string(what) + ": expected dimension " +
                             std::to_string(expected) + ", got " +
                             std::to_string(actual));
    }
}

std::string format_vector(const Vector& v);

}  // namespace phtrack
