#include "phtrack/ph_core.hpp"
#include "phtrack/scenarios.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace phtrack;
using namespace phtrack::testing;

namespace {

MechanicalPHd pendulum_cart() {
    // q-dependent inertia so the kinetic term contributes to ∇_q H.
    MechanicalPHd sys;
    sys.dof = 2;
    sys.constant_inertia = false;
    sys.inertia = [](const Vector& q) {
        Matrix M(2, 2);
        M << 2.0 + std::cos(q(1)), 0.3 * std::sin(q(1)), 0.3 * std::sin(q(1)), 1.5;
        return M;
    };
    sys.potential = [](const Vector& q) { return 0.7 * std::cos(q(0)) + 0.2 * q(1) * q(1); };
    sys.potential_gradient = [](const Vector& q) {
        return vec({-0.7 * std::sin(q(0)), 0.4 * q(1)});
    };
    Matrix G(2, 1);
    G << 1.0, 0.0;
    sys.input_matrix = G;
    sys.disturbance = Vector::Zero(1);
    return sys;
}

}  // namespace

TEST(HamiltonianGrad, MatchesFiniteDifferencesWithVaryingInertia) {
    const auto sys = pendulum_cart();
    std::mt19937_64 rng(1);
    for (int k = 0; k < 100; ++k) {
        const Vector q = uniform(rng, 2, -2, 2);
        const Vector p = uniform(rng, 2, -2, 2);
        const auto g = hamiltonian_grad(sys, q, p);
        const Vector dq = fd_gradient([&](const Vector& x) { return sys.hamiltonian(x, p); }, q);
        const Vector dp = fd_gradient([&](const Vector& x) { return sys.hamiltonian(q, x); }, p);
        EXPECT_LT(rel_err(g.dq, dq), 1e-6);
        EXPECT_LT(rel_err(g.dp, dp), 1e-6);
    }
}

TEST(HamiltonianGrad, AnalyticInertiaDerivativeAgreesWithDifferences) {
    auto sys = pendulum_cart();
    const auto fd = sys;
    sys.inertia_derivative = [](const Vector& q, Index i) {
        Matrix D = Matrix::Zero(2, 2);
        if (i == 1) {
            D << -std::sin(q(1)), 0.3 * std::cos(q(1)), 0.3 * std::cos(q(1)), 0.0;
        }
        return D;
    };
    const Vector q = vec({0.3, -0.8});
    const Vector p = vec({1.1, -0.4});
    EXPECT_LT(rel_err(hamiltonian_grad(sys, q, p).dq, hamiltonian_grad(fd, q, p).dq), 1e-7);
}

TEST(HamiltonianGrad, BallOnWheelGradient) {
    const auto sys = ball_on_wheel_plant(BallOnWheelParams{});
    std::mt19937_64 rng(2);
    for (int k = 0; k < 100; ++k) {
        const Vector q = uniform(rng, 2, -3, 3);
        const Vector p = uniform(rng, 2, -1, 1);
        const auto g = hamiltonian_grad(sys, q, p);
        EXPECT_LT(rel_err(g.dq, fd_gradient([&](const Vector& x) { return sys.hamiltonian(x, p); }, q)),
                  1e-6);
        EXPECT_LT(rel_err(g.dp, fd_gradient([&](const Vector& x) { return sys.hamiltonian(q, x); }, p)),
                  1e-6);
    }
}

TEST(HamiltonianGrad, SingularInertiaNamesTheConfiguration) {
    auto sys = MechanicalPHd::with_constant_inertia(
        Matrix::Zero(1, 1), [](const Vector&) { return 0.0; },
        [](const Vector&) { return Vector::Zero(1); }, Matrix::Identity(1, 1));
    try {
        hamiltonian_grad(sys, vec({0.25}), vec({1.0}));
        FAIL() << "expected SingularityError";
    } catch (const SingularityError& e) {
        EXPECT_NE(std::string(e.what()).find("0.25"), std::string::npos);
    }
}

TEST(OpenLoop, ZeroInputAtEquilibriumIsStatic) {
    const auto sys = ball_on_wheel_plant(BallOnWheelParams{});
    const auto r = open_loop_vector_field<double>(sys, Vector::Zero(2), Vector::Zero(2), Vector::Zero(1),
                                          Vector::Zero(1));
    EXPECT_EQ(r.q_dot.norm(), 0.0);
    EXPECT_EQ(r.p_dot.norm(), 0.0);
}

TEST(OpenLoop, PhFormConservesEnergyWithoutInput) {
    const auto sys = pendulum_cart();
    const auto ph = as_ph_system(sys);
    const Vector x = vec({0.4, -0.2, 0.7, 1.3});
    const Vector f = ph.vector_field(x, Vector::Zero(1));
    EXPECT_NEAR(ph.gradH(x).dot(f), 0.0, 1e-12);
    const auto r = open_loop_vector_field<double>(sys, Vector(x.head(2)), Vector(x.tail(2)),
                                          Vector::Zero(1), Vector::Zero(1));
    EXPECT_LT((f.head(2) - r.q_dot).norm(), 1e-14);
    EXPECT_LT((f.tail(2) - r.p_dot).norm(), 1e-14);
}

TEST(OpenLoop, DimensionMismatchIsRejected) {
    const auto sys = ball_on_wheel_plant(BallOnWheelParams{});
    EXPECT_THROW(open_loop_vector_field<double>(sys, Vector::Zero(2), Vector::Zero(2), Vector::Zero(2),
                                        Vector::Zero(1)),
                 DimensionError);
}

TEST(PhSystem, RejectsNonSkewInterconnection) {
    const std::vector<Vector> samples{Vector::Zero(2)};
    auto R = [](const Vector&) { return Matrix(Matrix::Zero(2, 2)); };
    auto H = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
    auto gH = [](const Vector& x) { return x; };
    auto g = [](const Vector&) { return Matrix(Matrix::Identity(2, 1)); };
    auto Jbad = [](const Vector&) { return Matrix(Matrix::Identity(2, 2)); };
    EXPECT_THROW(PhSystem<double>::from_parts(2, 1, Jbad, R, H, gH, g, samples), InvariantError);
    auto J = [](const Vector&) {
        Matrix m(2, 2);
        m << 0, 1, -1, 0;
        return m;
    };
    auto Rneg = [](const Vector&) { return Matrix(-Matrix::Identity(2, 2)); };
    EXPECT_THROW(PhSystem<double>::from_parts(2, 1, J, Rneg, H, gH, g, samples), InvariantError);
    const auto ok = PhSystem<double>::from_parts(2, 1, J, R, H, gH, g, samples);
    EXPECT_NEAR(ok.vector_field(vec({1, 2}), vec({0})).dot(vec({1, 2})), 0.0, 1e-15);
}

TEST(MechanicalPH, ValidateCatchesInvalidPlants) {
    auto sys = pendulum_cart();
    const std::vector<Vector> samples{Vector::Zero(2), vec({1.0, 3.0})};
    EXPECT_NO_THROW(sys.validate(samples));
    sys.input_matrix = Matrix::Zero(2, 1);
    EXPECT_THROW(sys.validate(samples), InvariantError);
    sys.input_matrix = Matrix::Identity(3, 1);
    EXPECT_THROW(sys.validate(samples), DimensionError);
}

TEST(Annihilator, RandomFullRankMatchesSvdOracle) {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 50; ++k) {
        Matrix G(4, 2);
        G.col(0) = uniform(rng, 4, -1, 1);
        G.col(1) = uniform(rng, 4, -1, 1);
        const auto a = annihilator_of(G);
        ASSERT_EQ(a.gperp.rows(), 2);
        EXPECT_LT((a.gperp * G).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LT((a.gdag * G - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LT((a.gperp * a.gperp.transpose() - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(),
                  1e-10);
        // The SVD pseudo-inverse is the same left inverse for full column rank.
        Eigen::JacobiSVD<Matrix> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Matrix pinv = svd.matrixV() * svd.singularValues().cwiseInverse().asDiagonal() *
                            svd.matrixU().transpose();
        EXPECT_LT((a.gdag - pinv).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Annihilator, SquareInputHasEmptyAnnihilator) {
    const auto a = annihilator_of<double>(Matrix::Identity(2, 2));
    EXPECT_EQ(a.gperp.rows(), 0);
    EXPECT_LT((a.gdag - Matrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(Annihilator, BallOnWheelInput) {
    Matrix G(2, 1);
    G << 0, 1;
    const auto a = annihilator_of(G);
    EXPECT_NEAR(std::abs(a.gperp(0, 0)), 1.0, 1e-15);
    EXPECT_NEAR(a.gperp(0, 1), 0.0, 1e-15);
}

TEST(Annihilator, RankDeficientIsSingular) {
    Matrix G(3, 2);
    G << 1, 2, 2, 4, 3, 6;
    EXPECT_THROW(annihilator_of(G), SingularityError);
}

TEST(Templates, LongDoubleInstantiation) {
    using L = long double;
    auto sys = MechanicalPH<L>::with_constant_inertia(
        MatrixX<L>::Identity(1, 1) * 2, [](const VectorX<L>& q) { return q.squaredNorm(); },
        [](const VectorX<L>& q) { return VectorX<L>(2 * q); }, MatrixX<L>::Identity(1, 1));
    VectorX<L> q(1), p(1);
    q << 0.5L;
    p << 1.0L;
    const auto g = hamiltonian_grad(sys, q, p);
    EXPECT_NEAR(static_cast<double>(g.dp(0)), 0.5, 1e-18);
    EXPECT_NEAR(static_cast<double>(g.dq(0)), 1.0, 1e-18);
}
