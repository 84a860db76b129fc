#include "phtrack/contraction.hpp"
#include "phtrack/scenarios.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>

using namespace phtrack;
using namespace phtrack::testing;

namespace {

// Hurwitz iff the Lyapunov equation PᵀX + XP = −I has an SPD solution.
bool lyapunov_oracle(const Matrix& P) {
    const Index k = P.rows();
    const Matrix I = Matrix::Identity(k, k);
    const Matrix A = Eigen::kroneckerProduct(I, P.transpose()) +
                     Eigen::kroneckerProduct(P.transpose(), I);
    const Vector rhs = -Eigen::Map<const Vector>(I.data(), k * k);
    const Vector x = A.fullPivLu().solve(rhs);
    Matrix X = Eigen::Map<const Matrix>(x.data(), k, k);
    X = 0.5 * (X + X.transpose());
    return Eigen::SelfAdjointEigenSolver<Matrix>(X).eigenvalues().minCoeff() > 0;
}

}  // namespace

TEST(Hurwitz, DiagonalAndOscillatory) {
    EXPECT_TRUE(hurwitz_check(Matrix(-Matrix::Identity(3, 3))).ok);
    Matrix R(2, 2);
    R << 0, 1, -1, 0;
    const auto r = hurwitz_check(R);
    EXPECT_FALSE(r.ok);
    EXPECT_NEAR(r.abscissa, 0.0, 1e-12);
    Matrix A(2, 2);
    A << -1, 10, 0, -2;
    EXPECT_NEAR(hurwitz_check(A).abscissa, -1.0, 1e-12);
}

TEST(Hurwitz, RejectsBadInput) {
    EXPECT_THROW(hurwitz_check(Matrix(Matrix::Zero(2, 3))), DimensionError);
    Matrix bad = Matrix::Identity(2, 2);
    bad(0, 1) = std::nan("");
    EXPECT_THROW(hurwitz_check(bad), Error);
}

TEST(Hurwitz, AgreesWithLyapunovOracle) {
    std::mt19937_64 rng(4);
    for (int k = 0; k < 40; ++k) {
        Matrix P(4, 4);
        for (Index j = 0; j < 4; ++j) {
            P.col(j) = uniform(rng, 4, -1, 1);
        }
        P -= 0.4 * Matrix::Identity(4, 4);
        const auto r = hurwitz_check(P);
        if (std::abs(r.abscissa) > 1e-3) {
            EXPECT_EQ(r.ok, lyapunov_oracle(P)) << P;
        }
    }
}

TEST(NMatrix, ScalarToyMatchesHandAssembly) {
    Matrix P(1, 1);
    P << -0.7;
    const double alpha = 0.5;
    const double beta = 2.0;
    const double eps = 0.01;
    const double kappa = 1 - alpha / beta;
    Matrix expected(2, 2);
    expected << -0.7, kappa * 0.49, -(kappa + eps), 0.7;
    EXPECT_LT((n_matrix(P, alpha, beta, eps) - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(NMatrix, BlockLayout) {
    Matrix P(2, 2);
    P << -1, 2, -3, -4;
    const Matrix N = n_matrix(P, 1.0, 4.0, 0.1);
    ASSERT_EQ(N.rows(), 4);
    EXPECT_EQ(Matrix(N.topLeftCorner(2, 2)), P);
    EXPECT_LT((N.topRightCorner(2, 2) - 0.75 * P * P.transpose()).norm(), 1e-14);
    EXPECT_LT((N.bottomLeftCorner(2, 2) + 0.85 * Matrix::Identity(2, 2)).norm(), 1e-14);
    EXPECT_EQ(Matrix(N.bottomRightCorner(2, 2)), Matrix(-P.transpose()));
}

TEST(NMatrix, RequiresOrderedPositiveBounds) {
    const Matrix P = -Matrix::Identity(2, 2);
    EXPECT_THROW(n_matrix(P, 2.0, 1.0, 0.1), InvariantError);
    EXPECT_THROW(n_matrix(P, 0.0, 1.0, 0.1), InvariantError);
    EXPECT_THROW(n_matrix(P, 1.0, 2.0, 0.0), InvariantError);
}

TEST(Certify, NegativeIdentityPasses) {
    HessianBounds b;
    b.alpha = 1.0;
    b.beta = 2.0;
    b.valid = true;
    CertifyOptions o;
    o.eps_grid = {1e-3};
    const auto c = certify(-Matrix::Identity(2, 2), b, o);
    EXPECT_TRUE(c.pass) << c.reason;
    ASSERT_TRUE(c.epsilon_found.has_value());
    EXPECT_EQ(*c.epsilon_found, 1e-3);
    // Spectrum of N is ±sqrt(1 − κ(κ + ε)) with κ = 1/2.
    const double lam = std::sqrt(1 - 0.5 * (0.5 + 1e-3));
    EXPECT_NEAR(c.n_spectrum_min_redistance, lam / (1 + lam), 1e-12);
}

TEST(Certify, SkewMatrixIsNotHurwitz) {
    HessianBounds b;
    b.alpha = 1.0;
    b.beta = 2.0;
    b.valid = true;
    Matrix P(2, 2);
    P << 0, 1, -1, 0;
    const auto c = certify(P, b);
    EXPECT_FALSE(c.pass);
    EXPECT_NE(c.reason.find("not Hurwitz"), std::string::npos);
}

TEST(Certify, InvalidBoundsAreReported) {
    HessianBounds b;
    b.min_eigenvalue = -0.5;
    const auto c = certify(-Matrix::Identity(2, 2), b, {}, {"Gamma33 not positive definite"});
    EXPECT_FALSE(c.pass);
    EXPECT_NE(c.reason.find("Hessian not positive definite"), std::string::npos);
    EXPECT_NE(c.reason.find("Gamma33"), std::string::npos);
}

TEST(Certify, OrthogonalPHasImaginaryAxisSpectrumForSmallKappa) {
    // P = −I + skew with large rotation: N keeps purely imaginary pairs when
    // κ(κ+ε)‖P‖² exceeds the real part budget.
    Matrix P(2, 2);
    P << -0.01, 5, -5, -0.01;
    HessianBounds b;
    b.alpha = 0.9;
    b.beta = 1.0;
    b.valid = true;
    const auto c = certify(P, b);
    EXPECT_TRUE(c.hurwitz_ok);
    EXPECT_FALSE(c.pass);
    EXPECT_NE(c.reason.find("imaginary axis"), std::string::npos);
}

TEST(HessianBounds, QuadraticHasExactBounds) {
    EnergyFunction e;
    e.dim = 2;
    Matrix K(2, 2);
    K << 3, 1, 1, 3;
    e.value = [K](const Vector& x, double) { return 0.5 * x.dot(K * x); };
    const Box box{vec({-1, -1}), vec({1, 1})};
    const auto b = estimate_hessian_bounds(e, box, {0.0}, 200, 7);
    EXPECT_TRUE(b.valid);
    EXPECT_NEAR(b.min_eigenvalue, 2.0, 1e-5);
    EXPECT_NEAR(b.max_eigenvalue, 4.0, 1e-5);
    EXPECT_NEAR(b.alpha, 2.0 * (1 - 1e-3), 1e-5);
    EXPECT_NEAR(b.beta, 4.0 * (1 + 1e-3), 1e-5);
    EXPECT_GT(b.margin, 0.0);
}

TEST(HessianBounds, NonConvexHasWitness) {
    EnergyFunction e;
    e.dim = 1;
    e.value = [](const Vector& x, double) { return std::cos(x(0)); };
    e.hessian = [](const Vector& x, double) { return Matrix::Constant(1, 1, -std::cos(x(0))); };
    const auto b = estimate_hessian_bounds(e, Box{vec({-1}), vec({1})}, {0.0}, 500, 1);
    EXPECT_FALSE(b.valid);
    EXPECT_LT(b.min_eigenvalue, -0.99);
    EXPECT_LT(std::abs(b.witness(0)), 0.01);
}

TEST(HessianBounds, DeterministicForSeed) {
    EnergyFunction e;
    e.dim = 2;
    e.value = [](const Vector& x, double t) { return std::exp(0.3 * x(0) * std::sin(t)) + x.squaredNorm(); };
    const Box box{vec({-2, -1}), vec({2, 1})};
    const auto a = estimate_hessian_bounds(e, box, {0.0, 0.5, 1.0}, 300, 11);
    const auto b = estimate_hessian_bounds(e, box, {0.0, 0.5, 1.0}, 300, 11);
    EXPECT_EQ(a.alpha, b.alpha);
    EXPECT_EQ(a.beta, b.beta);
}

TEST(LatinHypercube, OneSamplePerStratum) {
    const Box box{vec({0, -5}), vec({1, 5})};
    const Matrix X = latin_hypercube(box, 50, 3);
    for (Index i = 0; i < 2; ++i) {
        std::vector<int> hits(50, 0);
        for (Index s = 0; s < 50; ++s) {
            ASSERT_TRUE(box.contains(X.col(s)));
            const double u = (X(i, s) - box.lower(i)) / (box.upper(i) - box.lower(i));
            ++hits[static_cast<std::size_t>(std::min(49.0, std::floor(u * 50)))];
        }
        for (int h : hits) {
            EXPECT_EQ(h, 1);
        }
    }
}

TEST(Box, ValidateRejectsInvertedBounds) {
    EXPECT_THROW((Box{vec({1}), vec({0})}).validate(), InvariantError);
    EXPECT_THROW((Box{vec({0, 0}), vec({1})}).validate(), DimensionError);
}

TEST(BallOnWheelDesign, ClosedLoopMatrixIsHurwitz) {
    const auto s = build_ball_on_wheel(BallOnWheelParams{});
    const Matrix P = s.tracker->closed_loop_matrix();
    ASSERT_EQ(P.rows(), 6);
    const auto r = hurwitz_check(P);
    EXPECT_TRUE(r.ok) << r.abscissa;
    EXPECT_TRUE(lyapunov_oracle(P));
}

TEST(BallOnWheelDesign, EnergyHessianMatchesDifferencesAndIsIndefinite) {
    const auto s = build_ball_on_wheel(BallOnWheelParams{});
    // Independent oracle: with cos q1 > 0 the q1 curvature of the shaped
    // potential is −λ1 cos q1 + (Γ-independent) positive terms; the sampler
    // must find the same sign as a direct evaluation at the witness.
    const auto b = estimate_hessian_bounds(s.tracker->closed_loop_energy(), s.domain,
                                           uniform_times(0.0, 1.0, 8), 2000, 0);
    const Matrix Hw = s.tracker->closed_loop_hessian(b.witness, b.witness_time);
    EXPECT_NEAR(Eigen::SelfAdjointEigenSolver<Matrix>(Hw).eigenvalues().minCoeff(),
                b.min_eigenvalue, 1e-12);
    EXPECT_GT(std::cos(b.witness(0)), 0.0);
    EXPECT_LT(b.min_eigenvalue, 0.0);
}
