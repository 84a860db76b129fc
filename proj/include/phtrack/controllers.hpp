#pragma once

#include "phtrack/contraction.hpp"
#include "phtrack/ph_core.hpp"
#include "phtrack/potentials.hpp"
#include "phtrack/reference.hpp"

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace phtrack {

/// Velocity-free tracker. State ξ = (q, p, q_e, p_e), x_e = (q_e, p_e).
struct DesignNoVelocity {
    Matrix Jd12;
    Matrix Md;
    Matrix Me;
    Matrix s11;
    Matrix s12;
    Matrix S2;
    Matrix Je;
    Matrix Re;
    /// V_d1 over y = (q, q_e).
    ShiftedQuadratic Vd1;

    Index n() const { return Jd12.rows(); }
    Index m() const { return Me.rows(); }
    Matrix S1() const;
    Matrix Fe() const;
    void validate() const;
};

/// Matched-disturbance-robust tracker. State (q, p, ζ).
struct DesignRobust {
    Matrix Jd12;
    std::function<Matrix(const Vector&)> Md;
    /// ∂M_d/∂q_i; optional, finite differences otherwise.
    std::function<Matrix(const Vector&, Index)> dMd;
    bool constant_Md = true;
    Matrix Rd;
    Matrix W1;
    Matrix W2;
    Matrix W3;
    Matrix Kzeta;
    /// V_d2 over q.
    ShiftedQuadratic Vd2;
    /// γ₁(t); set when a reference is bound.
    TimeMap gamma1_map;

    Index n() const { return Jd12.rows(); }
    Index m() const { return Kzeta.rows(); }
    void validate() const;
};

/// Robust velocity-free tracker. State (q, p, z1, z2).
struct DesignRobustNoVelocity {
    Matrix Jd12;
    Matrix Md;
    Matrix Kz;
    Matrix Gamma11;
    Matrix Gamma12;
    Matrix Gamma21;
    Matrix Gamma22;
    Matrix Gamma33;
    std::shared_ptr<const PotentialVd3> Vd3;
    /// Anchor a(t) of V_d3, γ₂(t) and z1⋆(t); set when a reference is bound.
    TimeMap anchor;
    TimeMap gamma2_map;
    TimeMap z1_star;

    Index n() const { return Jd12.rows(); }
    Index m() const { return Kz.rows(); }
    void validate() const;
    /// Conditions on the blocks that the contraction certificate relies on.
    std::vector<std::string> structural_violations() const;
};

struct MatchingReport {
    std::vector<std::pair<std::string, double>> equations;

    double max() const;
    bool ok(double tol = 1e-8) const { return max() <= tol; }
};

// Velocity-free tracker.
Vector control_no_velocity(const DesignNoVelocity& design, const MechanicalPHd& sys,
                           const Vector& q, const Vector& xe, double t);
Vector extension_no_velocity(const DesignNoVelocity& design, const MechanicalPHd& sys,
                             const Vector& q, const Vector& xe, double t);
Matrix assemble_P1(const DesignNoVelocity& design);

// Robust tracker.
Vector theta(const DesignRobust& design, const Vector& q, const Vector& p, double t);
Vector gamma1(const DesignRobust& design, const MechanicalPHd& sys,
              const ReferenceTrajectory& ref, double t);
Vector control_robust(const DesignRobust& design, const MechanicalPHd& sys, const Vector& q,
                      const Vector& p, const Vector& zeta, double t);
Vector zeta_dot(const DesignRobust& design, const Vector& q, const Vector& p, double t);
Vector mu1(const DesignRobust& design, const MechanicalPHd& sys, const Vector& d);
Matrix assemble_P2(const DesignRobust& design);

// Robust velocity-free tracker.
Vector phi(const DesignRobustNoVelocity& design, const Vector& q, const Vector& z1, double t);
Vector gamma2(const DesignRobustNoVelocity& design, const MechanicalPHd& sys,
              const ReferenceTrajectory& ref, const Vector& z1_star, double t);
Vector control_robust_no_velocity(const DesignRobustNoVelocity& design,
                                  const MechanicalPHd& sys, const Vector& q, const Vector& Z,
                                  double t);
Vector z_dot(const DesignRobustNoVelocity& design, const Vector& q, const Vector& Z, double t);
Vector mu2(const DesignRobustNoVelocity& design, const MechanicalPHd& sys, const Vector& d);
Matrix assemble_P3(const DesignRobustNoVelocity& design);

// Reduced parametrizations.
std::pair<Matrix, Matrix> design_reduction_S1(const Matrix& G, const Matrix& k11,
                                              const Matrix& k12);
/// (W1, Rd) = (G K2, G Kv Gᵀ).
std::pair<Matrix, Matrix> design_reduction_W(const Matrix& G, const Matrix& K2,
                                             const Matrix& Kv);
/// (Γ11, Γ12) from [Γ11, Γ12] = G K_f with K_f of size m × 2m.
std::pair<Matrix, Matrix> design_reduction_F1(const Matrix& G, const Matrix& Kf);

/// G⊥(∇V(q) − J_d12ᵀ∇Ṽ_d(q)) at q, max-norm.
double conventional_matching_residual(const MechanicalPHd& sys, const Matrix& Jd12,
                                      const std::function<Vector(const Vector&)>& gradVd,
                                      const Vector& q);

/// Matching residuals over Latin-hypercube samples of the closed-loop state
/// box; times are paired with samples cyclically.
MatchingReport matching_residual(const DesignNoVelocity& design, const MechanicalPHd& sys,
                                 const Box& domain, const std::vector<double>& times,
                                 Index n_samples = 1000, std::uint64_t seed = 0);
MatchingReport matching_residual(const DesignRobust& design, const MechanicalPHd& sys,
                                 const Box& domain, const std::vector<double>& times,
                                 Index n_samples = 1000, std::uint64_t seed = 0);
MatchingReport matching_residual(const DesignRobustNoVelocity& design, const MechanicalPHd& sys,
                                 const Box& domain, const std::vector<double>& times,
                                 Index n_samples = 1000, std::uint64_t seed = 0);

/// Sets the centre of V_d1 so that the reference with x_e⋆ = 0 is a solution
/// of the closed loop. Tables use step dt/2.
void bind_reference(DesignNoVelocity& design, const MechanicalPHd& sys,
                    ReferenceTrajectory& ref, double dt);
/// Sets the centre of V_d2 (so that ζ⋆ is constant) and the γ₁ table.
void bind_reference(DesignRobust& design, const MechanicalPHd& sys, ReferenceTrajectory& ref,
                    double dt);
/// Start for z1⋆ on the slow manifold of its ODE (z̈1⋆(t0) = 0), found by
/// Newton from `guess`; returns `guess` when the iteration fails.
Vector slow_z1_start(const DesignRobustNoVelocity& design, const ReferenceTrajectory& ref,
                     const Vector& guess);
/// Integrates z1⋆ by RK4 from z1_0 and tabulates the anchor, z1⋆ and γ₂.
void bind_reference(DesignRobustNoVelocity& design, const MechanicalPHd& sys,
                    ReferenceTrajectory& ref, double dt, const Vector& z1_0);

/// Left pseudo-inverse via complete orthogonal decomposition.
Matrix pseudo_inverse(const Matrix& A);

}  // namespace phtrack
