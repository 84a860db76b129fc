#pragma once

#include "phtrack/controllers.hpp"

#include <memory>
#include <string>

namespace phtrack {

enum class ControllerKind { NoVelocity, Robust, RobustNoVelocity };

std::string to_string(ControllerKind kind);
ControllerKind parse_controller_kind(const std::string& name);

/// Closed-loop controller bound to a plant and a reference. The closed-loop
/// state is ξ = (q, p, c) with c the controller state.
class Tracker {
public:
    virtual ~Tracker() = default;

    virtual ControllerKind kind() const = 0;
    virtual const MechanicalPHd& plant() const = 0;
    virtual Index controller_dim() const = 0;
    /// True when control() never reads p.
    virtual bool velocity_free() const = 0;

    virtual Vector control(const Vector& q, const Vector& p, const Vector& c, double t) const = 0;
    virtual Vector controller_rate(const Vector& q, const Vector& p, const Vector& c,
                                   double t) const = 0;
    /// Controller state on the reference when the disturbance d acts.
    virtual Vector reference_controller_state(double t, const Vector& d) const = 0;

    virtual Matrix closed_loop_matrix() const = 0;
    /// Hessian of the closed-loop energy in ξ.
    virtual Matrix closed_loop_hessian(const Vector& xi, double t) const = 0;
    virtual MatchingReport matching(const Box& domain, const std::vector<double>& times,
                                    Index n_samples, std::uint64_t seed) const = 0;
    virtual std::vector<std::string> design_violations() const = 0;

    Index state_dim() const { return 2 * plant().dof + controller_dim(); }
    EnergyFunction closed_loop_energy() const;
};

std::unique_ptr<Tracker> make_tracker(MechanicalPHd sys, DesignNoVelocity design);
std::unique_ptr<Tracker> make_tracker(MechanicalPHd sys, DesignRobust design);
std::unique_ptr<Tracker> make_tracker(MechanicalPHd sys, DesignRobustNoVelocity design);

}  // namespace phtrack
