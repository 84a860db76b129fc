#pragma once

#include "phtrack/contraction.hpp"
#include "phtrack/sim.hpp"
#include "phtrack/trackers.hpp"

#include <memory>
#include <optional>
#include <string>

namespace phtrack {

struct BallOnWheelParams {
    // Plant.
    double I_w = 0.00171;
    double m_b = 0.042;
    double r_b = 0.011;
    double g_r = 9.8;
    double r_w = 0.075;
    // Design.
    double a1 = 4e-3;
    double a2 = -4.8e-3;
    double a3 = 0.04;
    double k1 = 1.8;
    double k2 = 3.5;
    double K_z = 0.1163;
    Vector Gamma11 = Vector::Zero(0);
    Vector Gamma12 = Vector::Zero(0);
    double Gamma33 = 26.8;
    Vector Gamma21 = Vector::Zero(0);
    Vector Gamma22 = Vector::Zero(0);
    /// Replaces the matched λ1 (used to build deliberately mismatched designs).
    std::optional<double> lambda1_override;
    // Reference a(t) = amplitude·sin(omega·t).
    double amplitude = 2.5;
    double omega = 4.0;
    double b0 = 0.0;
    double b1 = 0.0;
    // Disturbance.
    double d = 20.0;
    double onset = 0.8;

    BallOnWheelParams();

    WheelConstants constants() const;
    double lambda1() const;
    double lambda2() const;
    Matrix Md() const;
};

struct FullyActuatedParams {
    Vector inertia_diag;
    ControllerKind controller = ControllerKind::RobustNoVelocity;
    /// "decoupled" or "coupled".
    std::string potential = "decoupled";
    Vector amplitude;
    Vector omega;
    Vector d;
    double onset = 0.8;
    // Robust velocity-free gains (diagonal).
    Vector Kq;
    Vector Kc;
    Vector Kz;
    Vector Gamma11;
    Vector Gamma12;
    Vector Gamma21;
    Vector Gamma22;
    Vector Gamma33;
    // Velocity-free gains (diagonal).
    Vector s11;
    Vector s12;
    Vector sigma;
    Vector re_q;
    Vector re_p;
    // Robust gains (diagonal).
    Vector rd;
    Vector w1;
    Vector w2;
    Vector w3;

    FullyActuatedParams();
};

/// Plant, tracker, reference, disturbance, certification box and default
/// simulation settings.
struct Scenario {
    std::string id;
    MechanicalPHd plant;
    std::shared_ptr<const Tracker> tracker;
    ReferenceTrajectory reference;
    DisturbanceSchedule schedule;
    Box domain;
    SimulationOptions sim;
    /// Offset of the default initial state from the reference.
    Vector x0_offset;
    double reference_period = 1.0;
    double feasibility = 0.0;
    MatchingReport matching;

    InitialState initial_state() const;
};

struct BuildOptions {
    double dt = 1e-3;
    /// Scenario default when absent.
    std::optional<double> horizon;
    /// Abort construction when the matching or feasibility gates fail.
    bool enforce_gates = true;
    std::optional<Box> domain;
    std::optional<Vector> x0_offset;
    std::uint64_t seed = 0;
};

MechanicalPHd ball_on_wheel_plant(const BallOnWheelParams& params);
Scenario build_ball_on_wheel(const BallOnWheelParams& params, const BuildOptions& options = {});
Scenario build_fully_actuated_2dof(const FullyActuatedParams& params,
                                   const BuildOptions& options = {});

Box default_ball_on_wheel_box();

struct CertifySettings {
    Index n_samples = 10000;
    Index n_times = 32;
    std::uint64_t seed = 0;
    CertifyOptions options;
};

ContractionCertificate certify_scenario(const Scenario& scenario,
                                        const CertifySettings& settings = {});

}  // namespace phtrack
