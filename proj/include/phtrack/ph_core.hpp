#pragma once

#include "phtrack/types.hpp"

#include <functional>
#include <optional>
#include <span>
#include <utility>

namespace phtrack {

/// Input-state-output port-Hamiltonian system  ẋ = F(x)∇H(x) + g(x)u,
/// with F = J − R.
template <typename Scalar>
struct PhSystem {
    using VectorType = VectorX<Scalar>;
    using MatrixType = MatrixX<Scalar>;

    Index n = 0;
    Index m = 0;
    std::function<MatrixType(const VectorType&)> F;
    std::function<Scalar(const VectorType&)> H;
    std::function<VectorType(const VectorType&)> gradH;
    std::function<MatrixType(const VectorType&)> g;

    VectorType vector_field(const VectorType& x, const VectorType& u) const {
        require_dim(x.size(), n, "PhSystem state");
        require_dim(u.size(), m, "PhSystem input");
        return F(x) * gradH(x) + g(x) * u;
    }

    VectorType output(const VectorType& x) const {
        return g(x).transpose() * gradH(x);
    }

    /// Builds F from separate J, R parts and checks at every sample that J
    /// is skew, R is symmetric positive semi-definite and g has rank m.
    static PhSystem from_parts(Index n, Index m,
                               std::function<MatrixType(const VectorType&)> J,
                               std::function<MatrixType(const VectorType&)> R,
                               std::function<Scalar(const VectorType&)> H,
                               std::function<VectorType(const VectorType&)> gradH,
                               std::function<MatrixType(const VectorType&)> g,
                               std::span<const VectorType> samples,
                               Scalar tol = Scalar(1e-12)) {
        for (const auto& x : samples) {
            const MatrixType Jx = J(x);
            const MatrixType Rx = R(x);
            if ((Jx + Jx.transpose()).cwiseAbs().maxCoeff() > tol) {
                throw InvariantError("interconnection matrix J(x) is not skew-symmetric");
            }
            if ((Rx - Rx.transpose()).cwiseAbs().maxCoeff() > tol) {
                throw InvariantError("damping matrix R(x) is not symmetric");
            }
            Eigen::SelfAdjointEigenSolver<MatrixType> es(Rx, Eigen::EigenvaluesOnly);
            if (es.eigenvalues().minCoeff() < -tol) {
                throw InvariantError("damping matrix R(x) is not positive semi-definite");
            }
            Eigen::FullPivLU<MatrixType> lu(g(x));
            if (lu.rank() != m) {
                throw InvariantError("input matrix g(x) does not have full column rank");
            }
        }
        PhSystem sys;
        sys.n = n;
        sys.m = m;
        sys.F = [J = std::move(J), R = std::move(R)](const VectorType& x) -> MatrixType {
            return J(x) - R(x);
        };
        sys.H = std::move(H);
        sys.gradH = std::move(gradH);
        sys.g = std::move(g);
        return sys;
    }
};

/// Mechanical pH plant  H(q,p) = ½pᵀM⁻¹(q)p + V(q), input matrix G (constant),
/// matched constant disturbance d entering as G(u + d).
template <typename Scalar>
struct MechanicalPH {
    using VectorType = VectorX<Scalar>;
    using MatrixType = MatrixX<Scalar>;

    Index dof = 0;
    std::function<MatrixType(const VectorType&)> inertia;
    /// ∂M/∂q_i; optional. Only consulted when the inertia is not constant.
    std::function<MatrixType(const VectorType&, Index)> inertia_derivative;
    bool constant_inertia = true;
    std::function<Scalar(const VectorType&)> potential;
    std::function<VectorType(const VectorType&)> potential_gradient;
    MatrixType input_matrix;
    VectorType disturbance;

    Index inputs() const { return input_matrix.cols(); }

    static MechanicalPH with_constant_inertia(
        MatrixType M, std::function<Scalar(const VectorType&)> V,
        std::function<VectorType(const VectorType&)> gradV, MatrixType G,
        std::optional<VectorType> d = std::nullopt) {
        MechanicalPH sys;
        sys.dof = M.rows();
        sys.inertia = [M = std::move(M)](const VectorType&) { return M; };
        sys.constant_inertia = true;
        sys.potential = std::move(V);
        sys.potential_gradient = std::move(gradV);
        sys.disturbance = d.value_or(VectorType::Zero(G.cols()));
        sys.input_matrix = std::move(G);
        return sys;
    }

    Scalar hamiltonian(const VectorType& q, const VectorType& p) const {
        Eigen::LLT<MatrixType> llt(inertia(q));
        return Scalar(0.5) * p.dot(llt.solve(p)) + potential(q);
    }

    /// Checks symmetry and positive definiteness of M at the samples and
    /// rank(G) = m ≤ n.
    void validate(std::span<const VectorType> samples, Scalar tol = Scalar(1e-12)) const {
        if (input_matrix.rows() != dof) {
            throw DimensionError("input matrix must have n rows");
        }
        if (inputs() > dof) {
            throw InvariantError("input dimension m exceeds degrees of freedom n");
        }
        Eigen::FullPivLU<MatrixType> lu(input_matrix);
        if (lu.rank() != inputs()) {
            throw InvariantError("input matrix G is rank deficient");
        }
        for (const auto& q : samples) {
            const MatrixType M = inertia(q);
            if ((M - M.transpose()).cwiseAbs().maxCoeff() > tol * (1 + M.cwiseAbs().maxCoeff())) {
                throw InvariantError("inertia matrix is not symmetric");
            }
            Eigen::SelfAdjointEigenSolver<MatrixType> es(M, Eigen::EigenvaluesOnly);
            if (es.eigenvalues().minCoeff() <= 0) {
                throw InvariantError("inertia matrix is not positive definite");
            }
        }
    }
};

using MechanicalPHd = MechanicalPH<double>;

template <typename Scalar>
struct HamiltonianGradient {
    VectorX<Scalar> dq;
    VectorX<Scalar> dp;
};

template <typename Scalar>
struct PhaseRate {
    VectorX<Scalar> q_dot;
    VectorX<Scalar> p_dot;
};

/// ½∇_q(pᵀA⁻¹(q)p) for a q-dependent SPD matrix A. Uses ∂A/∂q_i when
/// provided, otherwise central differences with step 1e-7.
template <typename Scalar>
VectorX<Scalar> kinetic_gradient(
    const std::function<MatrixX<Scalar>(const VectorX<Scalar>&)>& A,
    const std::function<MatrixX<Scalar>(const VectorX<Scalar>&, Index)>& dA,
    const VectorX<Scalar>& q, const VectorX<Scalar>& p) {
    const Index n = q.size();
    VectorX<Scalar> out(n);
    if (dA) {
        Eigen::LLT<MatrixX<Scalar>> llt(A(q));
        const VectorX<Scalar> v = llt.solve(p);
        for (Index i = 0; i < n; ++i) {
            out(i) = Scalar(-0.5) * v.dot(dA(q, i) * v);
        }
        return out;
    }
    const Scalar h = Scalar(1e-7);
    auto kinetic = [&](const VectorX<Scalar>& x) {
        Eigen::LLT<MatrixX<Scalar>> llt(A(x));
        return Scalar(0.5) * p.dot(llt.solve(p));
    };
    VectorX<Scalar> qp = q;
    VectorX<Scalar> qm = q;
    for (Index i = 0; i < n; ++i) {
        qp(i) = q(i) + h;
        qm(i) = q(i) - h;
        out(i) = (kinetic(qp) - kinetic(qm)) / (2 * h);
        qp(i) = q(i);
        qm(i) = q(i);
    }
    return out;
}

/// (∇_q H, ∇_p H) of the mechanical Hamiltonian.
template <typename Scalar>
HamiltonianGradient<Scalar> hamiltonian_grad(const MechanicalPH<Scalar>& sys,
                                             const VectorX<Scalar>& q,
                                             const VectorX<Scalar>& p) {
    require_dim(q.size(), sys.dof, "hamiltonian_grad q");
    require_dim(p.size(), sys.dof, "hamiltonian_grad p");
    const MatrixX<Scalar> M = sys.inertia(q);
    Eigen::LLT<MatrixX<Scalar>> llt(M);
    if (llt.info() != Eigen::Success) {
        throw SingularityError("inertia matrix is singular or indefinite at q = " +
                               format_vector(q.template cast<double>()));
    }
    HamiltonianGradient<Scalar> g;
    g.dp = llt.solve(p);
    g.dq = sys.potential_gradient(q);
    if (!sys.constant_inertia) {
        g.dq += kinetic_gradient<Scalar>(sys.inertia, sys.inertia_derivative, q, p);
    }
    return g;
}

/// q̇ = ∇_p H,  ṗ = −∇_q H + G(u + d).
template <typename Scalar>
PhaseRate<Scalar> open_loop_vector_field(const MechanicalPH<Scalar>& sys,
                                         const VectorX<Scalar>& q,
                                         const VectorX<Scalar>& p,
                                         const VectorX<Scalar>& u,
                                         const VectorX<Scalar>& d) {
    require_dim(u.size(), sys.inputs(), "open_loop_vector_field u");
    require_dim(d.size(), sys.inputs(), "open_loop_vector_field d");
    const auto grad = hamiltonian_grad(sys, q, p);
    return {grad.dp, -grad.dq + sys.input_matrix * (u + d)};
}

/// Canonical pH form of a mechanical plant: x = (q, p), J = [[0, I], [−I, 0]],
/// R = 0, g = [0; G].
template <typename Scalar>
PhSystem<Scalar> as_ph_system(const MechanicalPH<Scalar>& sys) {
    using V = VectorX<Scalar>;
    using Mt = MatrixX<Scalar>;
    const Index n = sys.dof;
    PhSystem<Scalar> ph;
    ph.n = 2 * n;
    ph.m = sys.inputs();
    ph.F = [n](const V&) {
        Mt J = Mt::Zero(2 * n, 2 * n);
        J.topRightCorner(n, n).setIdentity();
        J.bottomLeftCorner(n, n) = -Mt::Identity(n, n);
        return J;
    };
    ph.H = [sys, n](const V& x) { return sys.hamiltonian(x.head(n), x.tail(n)); };
    ph.gradH = [sys, n](const V& x) {
        const auto g = hamiltonian_grad(sys, V(x.head(n)), V(x.tail(n)));
        V out(2 * n);
        out << g.dq, g.dp;
        return out;
    };
    ph.g = [G = sys.input_matrix, n](const V&) {
        Mt out = Mt::Zero(2 * n, G.cols());
        out.bottomRows(n) = G;
        return out;
    };
    return ph;
}

/// Full-rank left annihilator G⊥ (rows orthonormal, G⊥G = 0) and left
/// pseudo-inverse G† = (GᵀG)⁻¹Gᵀ of a constant input matrix.
template <typename Scalar>
struct Annihilator {
    MatrixX<Scalar> gperp;
    MatrixX<Scalar> gdag;
};

template <typename Scalar>
Annihilator<Scalar> annihilator_of(const MatrixX<Scalar>& G) {
    const Index n = G.rows();
    const Index m = G.cols();
    if (m > n || m == 0) {
        throw DimensionError("annihilator_of: G must be n x m with 0 < m <= n");
    }
    Eigen::JacobiSVD<MatrixX<Scalar>> svd(G);
    const auto& s = svd.singularValues();
    if (s(m - 1) <= std::numeric_limits<Scalar>::epsilon() * n * s(0)) {
        throw SingularityError("annihilator_of: G is rank deficient");
    }
    Eigen::HouseholderQR<MatrixX<Scalar>> qr(G);
    const MatrixX<Scalar> Q = qr.householderQ() * MatrixX<Scalar>::Identity(n, n);
    Annihilator<Scalar> a;
    a.gperp = Q.rightCols(n - m).transpose();
    a.gdag = (G.transpose() * G).ldlt().solve(G.transpose());
    return a;
}

}  // namespace phtrack
