#include "phtrack/potentials.hpp"

#include <cmath>

namespace phtrack {

double ShiftedQuadratic::value(const Vector& y, double t) const {
    const Vector e = y - center(t);
    return 0.5 * e.dot(K * e);
}

Vector ShiftedQuadratic::grad(const Vector& y, double t) const {
    require_dim(y.size(), K.rows(), "ShiftedQuadratic argument");
    return K * (y - center(t));
}

ScalarField ScalarField::linear(const Vector& w) {
    return {[w](const Vector& x) { return w.dot(x); }, [w](const Vector&) { return w; },
            [n = w.size()](const Vector&) { return Matrix::Zero(n, n); }};
}

UnderactuatedPotential::UnderactuatedPotential(Index n, double k1, double k2, ScalarField phi1,
                                               ScalarField phi2, ScalarField phi3)
    : n_(n), k1_(k1), k2_(k2), phi1_(std::move(phi1)), phi2_(std::move(phi2)),
      phi3_(std::move(phi3)) {
    if (!(k1 > 0) || !(k2 > 0)) {
        throw InvariantError("potential gains k1, k2 must be positive");
    }
}

double UnderactuatedPotential::value(const Vector& q, const Vector& z1, const Vector& a) const {
    const double e1 = phi2_.f(q) - a(0);
    const double e2 = phi2_.f(q) - phi3_.f(z1);
    return phi1_.f(q) + 0.5 * k1_ * e1 * e1 + 0.5 * k2_ * e2 * e2;
}

Vector UnderactuatedPotential::grad_q(const Vector& q, const Vector& z1, const Vector& a) const {
    const double f2 = phi2_.f(q);
    return phi1_.grad(q) + (k1_ * (f2 - a(0)) + k2_ * (f2 - phi3_.f(z1))) * phi2_.grad(q);
}

Vector UnderactuatedPotential::grad_z1(const Vector& q, const Vector& z1, const Vector&) const {
    return -k2_ * (phi2_.f(q) - phi3_.f(z1)) * phi3_.grad(z1);
}

Matrix UnderactuatedPotential::hessian(const Vector& q, const Vector& z1, const Vector& a) const {
    const Vector g2 = phi2_.grad(q);
    const Vector g3 = phi3_.grad(z1);
    const double f2 = phi2_.f(q);
    const double e1 = f2 - a(0);
    const double e2 = f2 - phi3_.f(z1);
    Matrix Hm(n_ + 1, n_ + 1);
    Hm.topLeftCorner(n_, n_) = phi1_.hess(q) + (k1_ + k2_) * g2 * g2.transpose() +
                               (k1_ * e1 + k2_ * e2) * phi2_.hess(q);
    Hm.topRightCorner(n_, 1) = -k2_ * g2 * g3.transpose();
    Hm.bottomLeftCorner(1, n_) = Hm.topRightCorner(n_, 1).transpose();
    Hm.bottomRightCorner(1, 1) = k2_ * g3 * g3.transpose() - k2_ * e2 * phi3_.hess(z1);
    return Hm;
}

Vector UnderactuatedPotential::solve_anchor(const Vector& q_star, const Vector& z1_star,
                                            const Matrix& Gamma22) const {
    require_dim(Gamma22.rows(), 1, "Gamma22 rows");
    require_dim(Gamma22.cols(), n_, "Gamma22 cols");
    // Φ is affine in ℓ3 with slope −k1∇φ2.
    const Vector phi0 = grad_q(q_star, z1_star, Vector::Zero(1));
    const double slope = k1_ * Gamma22.row(0).dot(phi2_.grad(q_star));
    if (std::abs(slope) < 1e-14) {
        throw SingularityError("anchor equation is degenerate: Gamma22 grad(phi2) = 0");
    }
    Vector a(1);
    a(0) = Gamma22.row(0).dot(phi0) / slope;
    return a;
}

FullyActuatedPotential::FullyActuatedPotential(Matrix Kq, Matrix Kc)
    : Kq_(std::move(Kq)), Kc_(std::move(Kc)) {
    if (Kq_.rows() != Kc_.rows() || Kq_.rows() != Kq_.cols() || Kc_.rows() != Kc_.cols()) {
        throw DimensionError("Kq and Kc must be square of equal size");
    }
}

double FullyActuatedPotential::value(const Vector& q, const Vector& z1, const Vector& a) const {
    const Vector e1 = q - a;
    const Vector e2 = q - z1;
    return 0.5 * e1.dot(Kq_ * e1) + 0.5 * e2.dot(Kc_ * e2);
}

Vector FullyActuatedPotential::grad_q(const Vector& q, const Vector& z1, const Vector& a) const {
    return Kq_ * (q - a) + Kc_ * (q - z1);
}

Vector FullyActuatedPotential::grad_z1(const Vector& q, const Vector& z1, const Vector&) const {
    return -Kc_ * (q - z1);
}

Matrix FullyActuatedPotential::hessian(const Vector&, const Vector&, const Vector&) const {
    const Index n = Kq_.rows();
    Matrix Hm(2 * n, 2 * n);
    Hm << Kq_ + Kc_, -Kc_, -Kc_, Kc_;
    return Hm;
}

Vector FullyActuatedPotential::solve_anchor(const Vector& q_star, const Vector& z1_star,
                                            const Matrix&) const {
    return Kq_.ldlt().solve(Kc_ * (q_star - z1_star)) + q_star;
}

DecoupledQuadraticPotential::DecoupledQuadraticPotential(Matrix Kq, Matrix Kz1)
    : Kq_(std::move(Kq)), Kz1_(std::move(Kz1)) {}

double DecoupledQuadraticPotential::value(const Vector& q, const Vector& z1,
                                          const Vector& a) const {
    const Vector e = q - a;
    return 0.5 * e.dot(Kq_ * e) + 0.5 * z1.dot(Kz1_ * z1);
}

Vector DecoupledQuadraticPotential::grad_q(const Vector& q, const Vector&, const Vector& a) const {
    return Kq_ * (q - a);
}

Vector DecoupledQuadraticPotential::grad_z1(const Vector&, const Vector& z1, const Vector&) const {
    return Kz1_ * z1;
}

Matrix DecoupledQuadraticPotential::hessian(const Vector&, const Vector&, const Vector&) const {
    const Index n = Kq_.rows();
    const Index m = Kz1_.rows();
    Matrix Hm = Matrix::Zero(n + m, n + m);
    Hm.topLeftCorner(n, n) = Kq_;
    Hm.bottomRightCorner(m, m) = Kz1_;
    return Hm;
}

Vector DecoupledQuadraticPotential::solve_anchor(const Vector& q_star, const Vector&,
                                                 const Matrix&) const {
    return q_star;
}

}  // namespace phtrack
