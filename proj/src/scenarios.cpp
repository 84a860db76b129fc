#include "phtrack/scenarios.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <numbers>

namespace phtrack {

namespace {

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Index>(xs.size()));
    Index i = 0;
    for (double x : xs) {
        v(i++) = x;
    }
    return v;
}

Matrix diag(const Vector& v) { return v.asDiagonal(); }

void check_gates(const Scenario& s, bool enforce) {
    spdlog::debug("scenario {}: feasibility residual {}, matching residual {}", s.id,
                  s.feasibility, s.matching.max());
    if (!enforce) {
        return;
    }
    if (!(s.feasibility <= 1e-6)) {
        throw InvariantError("reference feasibility residual " + std::to_string(s.feasibility) +
                             " exceeds 1e-6");
    }
    for (const auto& [name, value] : s.matching.equations) {
        if (!(value <= 1e-8)) {
            throw InvariantError("matching residual '" + name + "' = " + std::to_string(value) +
                                 " exceeds 1e-8");
        }
    }
}

// Gates need a non-degenerate span even for an empty simulation.
double reference_span(double horizon) { return std::max(horizon, 1.0); }

std::vector<double> matching_times(const ReferenceTrajectory& ref) {
    return uniform_times(ref.t0, std::max(ref.tf - ref.t0, 0.0), 97);
}

void finish(Scenario& s, const BuildOptions& options) {
    const auto grid = time_grid(s.reference.t0, s.reference.tf, options.dt);
    s.feasibility = feasibility_residual(s.plant, s.reference, grid);
    s.matching = s.tracker->matching(s.domain, matching_times(s.reference), 1000, options.seed);
    if (options.x0_offset) {
        require_dim(options.x0_offset->size(), s.tracker->state_dim(), "initial offset");
        s.x0_offset = *options.x0_offset;
    }
    check_gates(s, options.enforce_gates);
}

}  // namespace

BallOnWheelParams::BallOnWheelParams()
    : Gamma11(vec({0.0, 5.0})), Gamma12(vec({0.0, 0.6})), Gamma21(vec({5.0, 0.0})),
      Gamma22(vec({-0.005, 0.0})) {}

WheelConstants BallOnWheelParams::constants() const {
    const double r = r_w + r_b;
    return {(0.4 + m_b) * r * r, -0.4 * (r_w * r_w + r_w * r_b), I_w + 0.4 * r_w * r_w,
            m_b * g_r * r};
}

double BallOnWheelParams::lambda1() const {
    if (lambda1_override) {
        return *lambda1_override;
    }
    const auto c = constants();
    const double den = a1 * c.m3 - a2 * c.m2;
    if (den == 0.0) {
        throw SingularityError("lambda denominator a1 m3 - a2 m2 vanishes");
    }
    return c.m4 * (c.m1 * c.m3 - c.m2 * c.m2) / den;
}

double BallOnWheelParams::lambda2() const {
    const auto c = constants();
    const double den = a1 * c.m3 - a2 * c.m2;
    if (den == 0.0) {
        throw SingularityError("lambda denominator a1 m3 - a2 m2 vanishes");
    }
    return (c.m2 * a1 - c.m1 * a2) / den;
}

Matrix BallOnWheelParams::Md() const {
    Matrix M(2, 2);
    M << a1, a2, a2, a3;
    return M;
}

FullyActuatedParams::FullyActuatedParams()
    : inertia_diag(vec({1.0, 0.5})), amplitude(vec({0.5, 0.3})), omega(vec({1.0, 1.5})),
      d(vec({20.0, 20.0})), Kq(vec({1.0, 1.0})), Kc(vec({1.0, 1.0})), Kz(vec({1.0, 1.0})),
      Gamma11(vec({-0.89, 1.58})), Gamma12(vec({0.13, 0.44})), Gamma21(vec({-1.22, 1.76})),
      Gamma22(vec({-0.29, -0.64})), Gamma33(vec({1.4, 2.0})), s11(vec({-1.6, 3.57})),
      s12(vec({0.09, 0.84})), sigma(vec({-0.96, 1.72})), re_q(vec({1.73, 3.46})),
      re_p(vec({0.58, 1.15})), rd(vec({3.0, 3.0})), w1(vec({3.0, 3.0})), w2(vec({-3.0, -3.0})),
      w3(vec({-1.0, -1.0})) {}

InitialState Scenario::initial_state() const {
    InitialState x = reference_initial_state(*tracker, reference, schedule);
    if (x0_offset.size() == 0) {
        return x;
    }
    const Index n = plant.dof;
    x.q += x0_offset.segment(0, n);
    x.p += x0_offset.segment(n, n);
    x.c += x0_offset.segment(2 * n, tracker->controller_dim());
    return x;
}

MechanicalPHd ball_on_wheel_plant(const BallOnWheelParams& params) {
    const auto c = params.constants();
    const double m4 = c.m4;
    Matrix G(2, 1);
    G << 0.0, 1.0;
    return MechanicalPHd::with_constant_inertia(
        c.inertia(), [m4](const Vector& q) { return m4 * std::cos(q(0)); },
        [m4](const Vector& q) { return Vector(vec({-m4 * std::sin(q(0)), 0.0})); }, G,
        vec({params.d}));
}

Box default_ball_on_wheel_box() {
    return {vec({-3, -25, -1, -1, -30, -5}), vec({3, 25, 1, 1, 30, 5})};
}

Scenario build_ball_on_wheel(const BallOnWheelParams& params, const BuildOptions& options) {
    if (!(params.a1 > 0 && params.a3 > 0 && params.a1 * params.a3 > params.a2 * params.a2)) {
        throw InvariantError("M_d not positive definite");
    }
    const double horizon = options.horizon.value_or(5.0);
    Scenario s;
    s.id = "ball_on_wheel";
    s.plant = ball_on_wheel_plant(params);
    s.plant.validate(std::vector<Vector>{Vector::Zero(2)});
    const auto c = params.constants();
    const Matrix M = c.inertia();

    const double l1 = params.lambda1();
    const double l2 = params.lambda2();
    ScalarField phi1{[l1](const Vector& q) { return l1 * std::cos(q(0)); },
                     [l1](const Vector& q) { return Vector(vec({-l1 * std::sin(q(0)), 0.0})); },
                     [l1](const Vector& q) {
                         Matrix Hm = Matrix::Zero(2, 2);
                         Hm(0, 0) = -l1 * std::cos(q(0));
                         return Hm;
                     }};
    auto Vd3 = std::make_shared<UnderactuatedPotential>(
        2, params.k1, params.k2, std::move(phi1), ScalarField::linear(vec({l2, 1.0})),
        ScalarField::linear(vec({1.0})));

    DesignRobustNoVelocity design;
    design.Md = params.Md();
    design.Jd12 = M.ldlt().solve(design.Md);
    design.Kz = Matrix::Constant(1, 1, params.K_z);
    design.Gamma11 = params.Gamma11;
    design.Gamma12 = params.Gamma12;
    design.Gamma21 = params.Gamma21.transpose();
    design.Gamma22 = params.Gamma22.transpose();
    design.Gamma33 = Matrix::Constant(1, 1, params.Gamma33);
    design.Vd3 = Vd3;

    s.reference = ball_on_wheel_reference(c, ScalarSignal::sinusoid(params.amplitude, params.omega),
                                          params.b0, params.b1, 0.0, reference_span(horizon),
                                          options.dt);
    const Vector z1_0 =
        slow_z1_start(design, s.reference, vec({Vd3->phi2().f(s.reference.q_star(0.0))}));
    bind_reference(design, s.plant, s.reference, options.dt, z1_0);
    s.tracker = make_tracker(s.plant, std::move(design));
    s.schedule = {params.onset, vec({params.d})};
    s.domain = options.domain.value_or(default_ball_on_wheel_box());
    s.sim.dt = options.dt;
    s.sim.horizon = horizon;
    s.reference_period = 2 * std::numbers::pi / params.omega;
    s.x0_offset = vec({0.1, 0.0, 0.0, 0.0, 0.0, 0.0});
    finish(s, options);
    return s;
}

Scenario build_fully_actuated_2dof(const FullyActuatedParams& params,
                                   const BuildOptions& options) {
    const Index n = 2;
    const double horizon = options.horizon.value_or(60.0);
    Scenario s;
    s.id = "fully_actuated_2dof";
    const Matrix M = diag(params.inertia_diag);
    s.plant = MechanicalPHd::with_constant_inertia(
        M, [](const Vector&) { return 0.0; }, [n](const Vector&) { return Vector::Zero(n); },
        Matrix::Identity(n, n), params.d);
    s.plant.validate(std::vector<Vector>{Vector::Zero(n)});
    const Matrix Md = Matrix::Identity(n, n);
    const Matrix Jd12 = M.inverse() * Md;

    std::vector<ScalarSignal> axes;
    for (Index i = 0; i < n; ++i) {
        axes.push_back(ScalarSignal::sinusoid(params.amplitude(i), params.omega(i)));
    }
    s.reference = fully_actuated_reference(s.plant, axes, 0.0, reference_span(horizon));
    const Index state_dim_c = params.controller == ControllerKind::Robust ? n : 2 * n;

    switch (params.controller) {
        case ControllerKind::NoVelocity: {
            DesignNoVelocity d;
            d.Jd12 = Jd12;
            d.Md = Md;
            d.Me = Matrix::Identity(n, n);
            d.s11 = diag(params.s11);
            d.s12 = diag(params.s12);
            d.S2 = Matrix::Zero(2 * n, n);
            d.S2.topRows(n) = diag(params.sigma);
            d.Je = Matrix::Zero(2 * n, 2 * n);
            d.Re = Matrix::Zero(2 * n, 2 * n);
            d.Re.topLeftCorner(n, n) = diag(params.re_q);
            d.Re.bottomRightCorner(n, n) = diag(params.re_p);
            d.Vd1.K = Matrix::Zero(2 * n, 2 * n);
            d.Vd1.K.topLeftCorner(n, n) = diag(params.Kq);
            d.Vd1.K.bottomRightCorner(n, n) = diag(params.Kc);
            bind_reference(d, s.plant, s.reference, options.dt);
            s.tracker = make_tracker(s.plant, std::move(d));
            break;
        }
        case ControllerKind::Robust: {
            DesignRobust d;
            d.Jd12 = Jd12;
            d.Md = [Md](const Vector&) { return Md; };
            d.constant_Md = true;
            d.Rd = diag(params.rd);
            d.W1 = diag(params.w1);
            d.W2 = diag(params.w2);
            d.W3 = diag(params.w3);
            d.Kzeta = diag(params.Kz);
            d.Vd2.K = diag(params.Kq);
            bind_reference(d, s.plant, s.reference, options.dt);
            s.tracker = make_tracker(s.plant, std::move(d));
            break;
        }
        case ControllerKind::RobustNoVelocity: {
            DesignRobustNoVelocity d;
            d.Jd12 = Jd12;
            d.Md = Md;
            d.Kz = diag(params.Kz);
            d.Gamma11 = diag(params.Gamma11);
            d.Gamma12 = diag(params.Gamma12);
            d.Gamma21 = diag(params.Gamma21);
            d.Gamma22 = diag(params.Gamma22);
            d.Gamma33 = diag(params.Gamma33);
            Vector z1_0;
            if (params.potential == "decoupled") {
                d.Vd3 = std::make_shared<DecoupledQuadraticPotential>(diag(params.Kq),
                                                                      diag(params.Kc));
                z1_0 = Vector::Zero(n);
            } else if (params.potential == "coupled") {
                d.Vd3 = std::make_shared<FullyActuatedPotential>(diag(params.Kq),
                                                                 diag(params.Kc));
                z1_0 = s.reference.q_star(0.0);
            } else {
                throw ConfigError("unknown potential '" + params.potential + "'");
            }
            bind_reference(d, s.plant, s.reference, options.dt, slow_z1_start(d, s.reference, z1_0));
            s.tracker = make_tracker(s.plant, std::move(d));
            break;
        }
    }
    s.schedule = {params.onset, params.d};
    Vector lo(2 * n + state_dim_c);
    lo << Vector::Constant(n, -2.0), Vector::Constant(n, -2.0), Vector::Constant(state_dim_c, -30.0);
    s.domain = options.domain.value_or(Box{lo, -lo});
    s.sim.dt = options.dt;
    s.sim.horizon = horizon;
    s.reference_period = 2 * std::numbers::pi / params.omega.minCoeff();
    s.x0_offset = Vector::Zero(2 * n + state_dim_c);
    s.x0_offset.head(n) << 0.1, -0.1;
    finish(s, options);
    return s;
}

ContractionCertificate certify_scenario(const Scenario& scenario,
                                        const CertifySettings& settings) {
    const EnergyFunction energy = scenario.tracker->closed_loop_energy();
    const double span = std::min(scenario.reference_period,
                                 scenario.reference.tf - scenario.reference.t0);
    const auto times = span > 0
                           ? uniform_times(scenario.reference.t0, span, settings.n_times)
                           : std::vector<double>{scenario.reference.t0};
    const HessianBounds bounds = estimate_hessian_bounds(energy, scenario.domain, times,
                                                         settings.n_samples, settings.seed);
    return certify(scenario.tracker->closed_loop_matrix(), bounds, settings.options,
                   scenario.tracker->design_violations());
}

}  // namespace phtrack
