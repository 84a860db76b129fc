#pragma once

#include "phtrack/contraction.hpp"
#include "phtrack/reference.hpp"
#include "phtrack/trackers.hpp"

#include <cmath>
#include <iosfwd>
#include <limits>
#include <vector>

namespace phtrack {

/// Classical fourth-order Runge–Kutta step of ẋ = f(t, x).
template <typename F>
Vector rk4_step(F&& f, const Vector& x, double t, double dt) {
    const Vector k1 = f(t, x);
    const Vector k2 = f(t + dt / 2, Vector(x + dt / 2 * k1));
    const Vector k3 = f(t + dt / 2, Vector(x + dt / 2 * k2));
    const Vector k4 = f(t + dt, Vector(x + dt * k3));
    if (!k1.allFinite() || !k2.allFinite() || !k3.allFinite() || !k4.allFinite()) {
        throw DivergenceError("non-finite derivative in RK4 step", t);
    }
    return x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
}

/// Constant matched disturbance switched on as an exact step at `onset`.
struct DisturbanceSchedule {
    double onset = std::numeric_limits<double>::infinity();
    Vector value;

    static DisturbanceSchedule none(Index m);
    bool active(double t) const;
    Vector at(double t) const;
};

struct SimulationTrace {
    Index n = 0;
    Index m = 0;
    Index k = 0;
    std::vector<double> t;
    /// One column per grid point.
    Matrix q;
    Matrix p;
    Matrix c;
    Matrix u;
    std::vector<int> d_active;
    std::vector<double> err_q;
    std::vector<double> err_full;

    Index size() const { return static_cast<Index>(t.size()); }
    Vector state(Index i) const;
    void write_csv(std::ostream& os) const;
};

struct SimulationOptions {
    double dt = 1e-3;
    double horizon = 5.0;
    bool unsafe = false;
    double blowup = 1e9;
};

struct InitialState {
    Vector q;
    Vector p;
    Vector c;
};

/// Integrates plant and controller as one ODE. Unless options.unsafe is set,
/// the certificate must be present and passing.
SimulationTrace simulate(const Tracker& tracker, const ReferenceTrajectory& ref,
                         const DisturbanceSchedule& schedule, const InitialState& x0,
                         const SimulationOptions& options,
                         const ContractionCertificate* certificate);

/// Initial state on the reference with the matching controller state.
InitialState reference_initial_state(const Tracker& tracker, const ReferenceTrajectory& ref,
                                     const DisturbanceSchedule& schedule);

struct ConvergenceFit {
    double rate = 0.0;
    double r2 = 0.0;
    Index points = 0;
};

/// Least-squares slope of log‖ξ_a − ξ_b‖ over t ∈ [t_begin, t_end].
ConvergenceFit convergence_fit(const SimulationTrace& a, const SimulationTrace& b,
                               double t_begin, double t_end);

/// Same fit for a sampled distance signal.
ConvergenceFit log_linear_fit(const std::vector<double>& t, const std::vector<double>& dist,
                              double t_begin, double t_end);

/// max |q_i − q⋆_i| over t ∈ [t_begin, t_end].
double max_coordinate_error(const SimulationTrace& trace, const ReferenceTrajectory& ref,
                            Index coordinate, double t_begin, double t_end);

}  // namespace phtrack
