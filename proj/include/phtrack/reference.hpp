#pragma once

#include "phtrack/ph_core.hpp"
#include "phtrack/time_table.hpp"

#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace phtrack {

using TimeMap = std::function<Vector(double)>;

/// Scalar signal with its first two derivatives.
struct ScalarSignal {
    std::function<double(double)> f;
    std::function<double(double)> df;
    std::function<double(double)> ddf;

    static ScalarSignal sinusoid(double amplitude, double omega);
    static ScalarSignal constant(double value);
};

/// Feasible reference (x⋆, u⋆) of a mechanical plant plus named auxiliary
/// tables (controller references and anchors).
struct ReferenceTrajectory {
    double t0 = 0.0;
    double tf = 0.0;
    Index n = 0;
    Index m = 0;
    TimeMap q_star;
    TimeMap p_star;
    TimeMap u_star;
    TimeMap p_star_dot;
    /// Optional; central differences of q⋆ are used when absent.
    TimeMap q_star_dot;
    std::map<std::string, TimeTable> aux;
    double b0 = 0.0;
    double b1 = 0.0;

    Vector x_star(double t) const;
    Vector q_dot(double t) const;
    Vector p_dot(double t) const;
    bool in_horizon(double t) const;
};

/// Ball-on-wheel inertia and gravity constants: M = [[m1, m2], [m2, m3]],
/// V(q) = m4 cos q1, G = [0, 1]ᵀ.
struct WheelConstants {
    double m1 = 0.0;
    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;

    Matrix inertia() const;
};

/// Closed-form feasible reference with q1⋆ = a(t). Inner integrals use a
/// cumulative third-order Simpson rule on a grid of step dt/2.
ReferenceTrajectory ball_on_wheel_reference(const WheelConstants& c, const ScalarSignal& a,
                                            double b0, double b1, double t0, double tf,
                                            double dt);

/// Fully actuated (G invertible) reference from a position signal per axis:
/// p⋆ = M q̇⋆, u⋆ = G⁻¹(M q̈⋆ + ∇V(q⋆)).
ReferenceTrajectory fully_actuated_reference(const MechanicalPHd& sys,
                                             const std::vector<ScalarSignal>& axes, double t0,
                                             double tf);

/// Constant equilibrium reference.
ReferenceTrajectory equilibrium_reference(const MechanicalPHd& sys, const Vector& q_eq,
                                          double t0, double tf);

/// Max-norm defect of ẋ⋆ = F(x⋆)∇H(x⋆) + g u⋆ over the times; ẋ⋆ by
/// fourth-order central differences of the reference maps.
double feasibility_residual(const MechanicalPHd& sys, const ReferenceTrajectory& ref,
                            const std::vector<double>& times);

/// Max-norm of p⋆ − M(q⋆)q̇⋆ over the times.
double momentum_consistency(const MechanicalPHd& sys, const ReferenceTrajectory& ref,
                            const std::vector<double>& times);

TimeTable tabulate(const TimeMap& f, double t0, double t1, double dt);

/// Derivative of a time map by fourth-order differences, one-sided near the
/// ends of [lo, hi].
Vector differentiate(const TimeMap& f, double t, double lo, double hi, double h = 1e-3);

/// Uniform grid t0, t0+dt, ..., tf (inclusive).
std::vector<double> time_grid(double t0, double tf, double dt);

/// CSV with header t, q*1.., p*1.., u*1..
void write_reference_csv(std::ostream& os, const ReferenceTrajectory& ref,
                         const std::vector<double>& times);

}  // namespace phtrack
