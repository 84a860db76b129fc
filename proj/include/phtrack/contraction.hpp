#pragma once

#include "phtrack/types.hpp"

#include <Eigen/Eigenvalues>

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace phtrack {

/// Axis-aligned box in an extended state space.
struct Box {
    Vector lower;
    Vector upper;

    Index dim() const { return lower.size(); }
    void validate() const;
    bool contains(const Vector& x) const;
};

/// Energy function of (ξ, t). The Hessian is optional; central differences
/// of the value are used when it is absent.
struct EnergyFunction {
    Index dim = 0;
    std::function<double(const Vector&, double)> value;
    std::function<Matrix(const Vector&, double)> hessian;

    Matrix hessian_at(const Vector& x, double t) const;
};

struct HessianBounds {
    double alpha = 0.0;
    double beta = 0.0;
    Index sample_count = 0;
    Box domain;
    /// Smallest sampled eigenvalue distance to the reported bounds.
    double margin = 0.0;
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
    bool valid = false;
    /// Sample with the smallest minimum eigenvalue.
    Vector witness;
    double witness_time = 0.0;
};

struct HurwitzResult {
    bool ok = false;
    double abscissa = 0.0;
};

struct ContractionCertificate {
    bool hurwitz_ok = false;
    double abscissa = 0.0;
    HessianBounds bounds;
    std::optional<double> epsilon_found;
    double n_spectrum_min_redistance = 0.0;
    bool pass = false;
    std::string reason;
    std::vector<std::string> violations;
};

struct CertifyOptions {
    double im_axis_tol = 1e-7;
    double margin_tol = 1e-9;
    std::vector<double> eps_grid = {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0};
};

template <typename Derived>
HurwitzResult hurwitz_check(const Eigen::MatrixBase<Derived>& P, double margin_tol = 1e-9) {
    using Scalar = typename Derived::Scalar;
    if (P.rows() != P.cols()) {
        throw DimensionError("hurwitz_check: matrix must be square");
    }
    if (!P.allFinite()) {
        throw Error("hurwitz_check: matrix has non-finite entries");
    }
    if (P.rows() == 0) {
        return {true, -std::numeric_limits<double>::infinity()};
    }
    Eigen::EigenSolver<MatrixX<Scalar>> es(P.eval(), false);
    if (es.info() != Eigen::Success) {
        throw Error("hurwitz_check: eigenvalue solver did not converge");
    }
    const double abscissa = static_cast<double>(es.eigenvalues().real().maxCoeff());
    return {abscissa < -margin_tol, abscissa};
}

/// N = [[P, (1 − α/β)PPᵀ], [−(1 − α/β + ε)I, −Pᵀ]].
template <typename Derived>
MatrixX<typename Derived::Scalar> n_matrix(const Eigen::MatrixBase<Derived>& P,
                                           typename Derived::Scalar alpha,
                                           typename Derived::Scalar beta,
                                           typename Derived::Scalar eps) {
    using Scalar = typename Derived::Scalar;
    if (P.rows() != P.cols()) {
        throw DimensionError("n_matrix: P must be square");
    }
    if (!(alpha > 0 && alpha < beta)) {
        throw InvariantError("n_matrix: requires 0 < alpha < beta");
    }
    if (!(eps > 0)) {
        throw InvariantError("n_matrix: requires eps > 0");
    }
    const Index k = P.rows();
    const Scalar kappa = Scalar(1) - alpha / beta;
    MatrixX<Scalar> N(2 * k, 2 * k);
    N.topLeftCorner(k, k) = P;
    N.topRightCorner(k, k) = kappa * P * P.transpose();
    N.bottomLeftCorner(k, k) = -(kappa + eps) * MatrixX<Scalar>::Identity(k, k);
    N.bottomRightCorner(k, k) = -P.transpose();
    return N;
}

/// Samples the Hessian on a Latin-hypercube design of the box; times are
/// paired with samples cyclically.
HessianBounds estimate_hessian_bounds(const EnergyFunction& Hd, const Box& domain,
                                      const std::vector<double>& times, Index n_samples,
                                      std::uint64_t seed = 0, double guard = 1e-3);

/// Latin-hypercube samples of a box, one column per sample.
Matrix latin_hypercube(const Box& domain, Index n_samples, std::uint64_t seed);

ContractionCertificate certify(const Matrix& P, const HessianBounds& bounds,
                               const CertifyOptions& options = {},
                               std::vector<std::string> design_violations = {});

/// Smallest |Re λ| / (1 + |λ|) over the spectrum of N.
double n_axis_distance(const Matrix& N);

std::vector<double> uniform_times(double t0, double period, Index count);

}  // namespace phtrack
