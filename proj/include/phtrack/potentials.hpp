#pragma once

#include "phtrack/types.hpp"

#include <functional>
#include <memory>

namespace phtrack {

/// V(y, t) = ½(y − c(t))ᵀK(y − c(t)).
struct ShiftedQuadratic {
    Matrix K;
    std::function<Vector(double)> center;

    Index dim() const { return K.rows(); }
    double value(const Vector& y, double t) const;
    Vector grad(const Vector& y, double t) const;
    const Matrix& hessian() const { return K; }
};

/// Scalar field with gradient and Hessian.
struct ScalarField {
    std::function<double(const Vector&)> f;
    std::function<Vector(const Vector&)> grad;
    std::function<Matrix(const Vector&)> hess;

    static ScalarField linear(const Vector& w);
};

/// Potential V_d3(q, z1; a) of the robust velocity-free design. The anchor a
/// is a time-varying parameter chosen so that Γ22Φ vanishes on the reference.
class PotentialVd3 {
public:
    virtual ~PotentialVd3() = default;

    virtual Index n() const = 0;
    virtual Index m() const = 0;
    virtual Index anchor_dim() const = 0;

    virtual double value(const Vector& q, const Vector& z1, const Vector& a) const = 0;
    virtual Vector grad_q(const Vector& q, const Vector& z1, const Vector& a) const = 0;
    virtual Vector grad_z1(const Vector& q, const Vector& z1, const Vector& a) const = 0;
    /// Hessian in (q, z1), size (n+m)².
    virtual Matrix hessian(const Vector& q, const Vector& z1, const Vector& a) const = 0;

    /// Anchor making Γ22Φ(q⋆, z1⋆; a) = 0.
    virtual Vector solve_anchor(const Vector& q_star, const Vector& z1_star,
                                const Matrix& Gamma22) const = 0;
};

/// φ1(q) + ½k1(φ2(q) − ℓ3)² + ½k2(φ2(q) − φ3(z1))² with m = 1; the anchor is ℓ3.
class UnderactuatedPotential final : public PotentialVd3 {
public:
    UnderactuatedPotential(Index n, double k1, double k2, ScalarField phi1, ScalarField phi2,
                           ScalarField phi3);

    Index n() const override { return n_; }
    Index m() const override { return 1; }
    Index anchor_dim() const override { return 1; }

    double value(const Vector& q, const Vector& z1, const Vector& a) const override;
    Vector grad_q(const Vector& q, const Vector& z1, const Vector& a) const override;
    Vector grad_z1(const Vector& q, const Vector& z1, const Vector& a) const override;
    Matrix hessian(const Vector& q, const Vector& z1, const Vector& a) const override;
    Vector solve_anchor(const Vector& q_star, const Vector& z1_star,
                        const Matrix& Gamma22) const override;

    double k1() const { return k1_; }
    double k2() const { return k2_; }
    const ScalarField& phi1() const { return phi1_; }
    const ScalarField& phi2() const { return phi2_; }
    const ScalarField& phi3() const { return phi3_; }

private:
    Index n_;
    double k1_;
    double k2_;
    ScalarField phi1_;
    ScalarField phi2_;
    ScalarField phi3_;
};

/// ½(q − L)ᵀKq(q − L) + ½(q − z1)ᵀKc(q − z1) with n = m; the anchor is L,
/// L = Kq⁻¹Kc(q⋆ − z1⋆) + q⋆, so that Φ vanishes on the reference.
class FullyActuatedPotential final : public PotentialVd3 {
public:
    FullyActuatedPotential(Matrix Kq, Matrix Kc);

    Index n() const override { return Kq_.rows(); }
    Index m() const override { return Kq_.rows(); }
    Index anchor_dim() const override { return Kq_.rows(); }

    double value(const Vector& q, const Vector& z1, const Vector& a) const override;
    Vector grad_q(const Vector& q, const Vector& z1, const Vector& a) const override;
    Vector grad_z1(const Vector& q, const Vector& z1, const Vector& a) const override;
    Matrix hessian(const Vector& q, const Vector& z1, const Vector& a) const override;
    Vector solve_anchor(const Vector& q_star, const Vector& z1_star,
                        const Matrix& Gamma22) const override;

    const Matrix& Kq() const { return Kq_; }
    const Matrix& Kc() const { return Kc_; }

private:
    Matrix Kq_;
    Matrix Kc_;
};

/// ½(q − L)ᵀKq(q − L) + ½z1ᵀKz1 z1; the anchor is L = q⋆.
class DecoupledQuadraticPotential final : public PotentialVd3 {
public:
    DecoupledQuadraticPotential(Matrix Kq, Matrix Kz1);

    Index n() const override { return Kq_.rows(); }
    Index m() const override { return Kz1_.rows(); }
    Index anchor_dim() const override { return Kq_.rows(); }

    double value(const Vector& q, const Vector& z1, const Vector& a) const override;
    Vector grad_q(const Vector& q, const Vector& z1, const Vector& a) const override;
    Vector grad_z1(const Vector& q, const Vector& z1, const Vector& a) const override;
    Matrix hessian(const Vector& q, const Vector& z1, const Vector& a) const override;
    Vector solve_anchor(const Vector& q_star, const Vector& z1_star,
                        const Matrix& Gamma22) const override;

private:
    Matrix Kq_;
    Matrix Kz1_;
};

}  // namespace phtrack
