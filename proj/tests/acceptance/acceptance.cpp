#include "phtrack/config.hpp"
#include "phtrack/scenarios.hpp"
#include "phtrack/sim.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace phtrack;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) {
        ++failures;
    }
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

double seconds_since(Clock::time_point t) {
    return std::chrono::duration<double>(Clock::now() - t).count();
}

Scenario load(const std::string& name, bool gates = true) {
    return build_scenario(load_config(std::string(PHTRACK_CONFIG_DIR) + "/" + name), gates);
}

CertifySettings settings_for(const std::string& name) {
    const auto c = load_config(std::string(PHTRACK_CONFIG_DIR) + "/" + name);
    CertifySettings s;
    s.n_samples = c.certify_samples;
    s.seed = c.build.seed;
    return s;
}

Vector random_direction(Index dim, double norm, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Vector v(dim);
    for (Index i = 0; i < dim; ++i) {
        v(i) = g(rng);
    }
    return norm * v / v.norm();
}

InitialState perturbed(const Scenario& s, const InitialState& x, const Vector& dx) {
    const Index n = s.plant.dof;
    InitialState y = x;
    y.q += dx.segment(0, n);
    y.p += dx.segment(n, n);
    y.c += dx.segment(2 * n, s.tracker->controller_dim());
    return y;
}

SimulationOptions unsafe(const Scenario& s) {
    SimulationOptions o = s.sim;
    o.unsafe = true;
    return o;
}

double max_in(const SimulationTrace& tr, const std::vector<double>& v, double a, double b) {
    double m = 0.0;
    for (Index i = 0; i < tr.size(); ++i) {
        const double t = tr.t[static_cast<std::size_t>(i)];
        if (t >= a - 1e-12 && t <= b + 1e-12) {
            m = std::max(m, v[static_cast<std::size_t>(i)]);
        }
    }
    return m;
}

double min_in(const SimulationTrace& tr, const std::vector<double>& v, double a, double b) {
    double m = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < tr.size(); ++i) {
        const double t = tr.t[static_cast<std::size_t>(i)];
        if (t >= a - 1e-12 && t <= b + 1e-12) {
            m = std::min(m, v[static_cast<std::size_t>(i)]);
        }
    }
    return m;
}

Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x) {
    const double h = 1e-6;
    Vector g(x.size());
    for (Index i = 0; i < x.size(); ++i) {
        Vector a = x;
        Vector b = x;
        a(i) += h;
        b(i) -= h;
        g(i) = (f(a) - f(b)) / (2 * h);
    }
    return g;
}

double rel(const Vector& a, const Vector& b) {
    return (a - b).cwiseAbs().maxCoeff() / (1.0 + b.cwiseAbs().maxCoeff());
}

void certification() {
    const auto start = Clock::now();
    const Scenario s = load("ball_on_wheel.ini");
    const auto cert = certify_scenario(s, settings_for("ball_on_wheel.ini"));
    const double runtime = seconds_since(start);
    const bool ok = cert.pass && cert.abscissa < -1e-9 && cert.bounds.alpha > 0 &&
                    cert.bounds.alpha < cert.bounds.beta && cert.epsilon_found && runtime < 30;
    report(ok, "ball-on-wheel certification",
           "abscissa " + fmt(cert.abscissa) + ", Hessian eigenvalues [" +
               fmt(cert.bounds.min_eigenvalue) + ", " + fmt(cert.bounds.max_eigenvalue) +
               "], epsilon " + (cert.epsilon_found ? fmt(*cert.epsilon_found) : "none") +
               ", runtime " + fmt(runtime) + " s; " + cert.reason);
}

void tracking() {
    const auto start = Clock::now();
    const Scenario s = load("ball_on_wheel.ini");
    const auto tr =
        simulate(*s.tracker, s.reference, s.schedule, s.initial_state(), unsafe(s), nullptr);
    const double runtime = seconds_since(start);
    const double tf = tr.t.back();
    std::vector<double> e1(static_cast<std::size_t>(tr.size()));
    for (Index i = 0; i < tr.size(); ++i) {
        const double t = tr.t[static_cast<std::size_t>(i)];
        e1[static_cast<std::size_t>(i)] = std::abs(tr.q(0, i) - 2.5 * std::sin(4 * t));
    }
    const double final_err = max_in(tr, e1, tf - 1.0, tf);
    const double pre = max_in(tr, e1, s.schedule.onset - 0.3, s.schedule.onset - 1e-9);
    const bool ok = final_err < 0.05 && std::abs(final_err - pre) < 1e-3 && runtime < 10;
    report(ok, "tracking reproduction",
           "final-second max |q1 - a| " + fmt(final_err) + " rad, pre-disturbance " + fmt(pre) +
               " rad, runtime " + fmt(runtime) + " s");
}

void contraction(const std::string& config, double t_begin) {
    const Scenario s = load(config);
    const auto c = load_config(std::string(PHTRACK_CONFIG_DIR) + "/" + config);
    const InitialState xa = s.initial_state();
    const InitialState xb =
        perturbed(s, xa, random_direction(s.tracker->state_dim(), 0.1, c.build.seed));
    const auto a = simulate(*s.tracker, s.reference, s.schedule, xa, unsafe(s), nullptr);
    const auto b = simulate(*s.tracker, s.reference, s.schedule, xb, unsafe(s), nullptr);
    const auto fit = convergence_fit(a, b, t_begin, s.sim.horizon);
    report(fit.rate < 0 && fit.r2 > 0.9, "contraction (" + s.id + ")",
           "log-distance slope " + fmt(fit.rate) + ", r2 " + fmt(fit.r2) + " on [" +
               fmt(t_begin) + ", " + fmt(s.sim.horizon) + "] s");
}

double on_reference_error(const Scenario& s) {
    const auto none = DisturbanceSchedule::none(s.plant.inputs());
    const auto tr = simulate(*s.tracker, s.reference, none,
                             reference_initial_state(*s.tracker, s.reference, none), unsafe(s),
                             nullptr);
    return *std::max_element(tr.err_full.begin(), tr.err_full.end());
}

void feedforward() {
    std::ostringstream detail;
    bool ok = true;
    for (const char* config : {"ball_on_wheel.ini", "fully_actuated_no_velocity.ini",
                               "fully_actuated_robust.ini", "fully_actuated_2dof.ini"}) {
        const Scenario s = load(config);
        const double e = on_reference_error(s);
        ok = ok && e < 1e-6;
        detail << (detail.tellp() > 0 ? ", " : "") << s.id << "/"
               << to_string(s.tracker->kind()) << " " << fmt(e);
    }
    report(ok, "feedforward exactness", "max full-state error " + detail.str());
}

void velocity_independence() {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    bool ok = true;
    std::ostringstream detail;
    for (const char* config : {"fully_actuated_no_velocity.ini", "ball_on_wheel.ini",
                               "fully_actuated_2dof.ini"}) {
        const Scenario s = load(config);
        const Tracker& tr = *s.tracker;
        const Index n = s.plant.dof;
        Vector q(n);
        Vector c(tr.controller_dim());
        for (Index i = 0; i < n; ++i) {
            q(i) = u(rng);
        }
        for (Index i = 0; i < c.size(); ++i) {
            c(i) = u(rng);
        }
        const Vector u0 = tr.control(q, Vector::Zero(n), c, 1.3);
        int identical = 0;
        for (int k = 0; k < 100; ++k) {
            Vector p(n);
            for (Index i = 0; i < n; ++i) {
                p(i) = 50 * u(rng);
            }
            const Vector uk = tr.control(q, p, c, 1.3);
            identical += std::memcmp(uk.data(), u0.data(), sizeof(double) * u0.size()) == 0;
        }
        ok = ok && identical == 100;
        detail << (detail.tellp() > 0 ? ", " : "") << s.id << "/" << to_string(tr.kind()) << " "
               << identical << "/100";
    }
    report(ok, "velocity independence", "bit-identical controls " + detail.str());
}

void gates() {
    const Scenario s = load("ball_on_wheel.ini");
    const auto m = s.tracker->matching(s.domain, uniform_times(0.0, s.sim.horizon, 97), 1000, 0);
    const double feas =
        feasibility_residual(s.plant, s.reference, time_grid(0.0, s.sim.horizon, s.sim.dt));
    report(m.max() < 1e-10 && feas < 1e-6, "matching/feasibility gates",
           "matching residual " + fmt(m.max()) + " on 1000 samples, feasibility residual " +
               fmt(feas));
}

void oracles() {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-2, 2);
    auto rnd = [&](Index n) {
        Vector v(n);
        for (Index i = 0; i < n; ++i) {
            v(i) = u(rng);
        }
        return v;
    };
    double worst = 0.0;
    for (const char* config : {"ball_on_wheel.ini", "fully_actuated_2dof.ini"}) {
        const Scenario s = load(config);
        for (int k = 0; k < 100; ++k) {
            const Vector q = rnd(s.plant.dof);
            const Vector p = rnd(s.plant.dof);
            const auto g = hamiltonian_grad(s.plant, q, p);
            worst = std::max(worst, rel(g.dq, fd_gradient([&](const Vector& x) {
                                            return s.plant.hamiltonian(x, p);
                                        }, q)));
            worst = std::max(worst, rel(g.dp, fd_gradient([&](const Vector& x) {
                                            return s.plant.hamiltonian(q, x);
                                        }, p)));
        }
    }
    const BallOnWheelParams bp;
    const double l1 = bp.lambda1();
    ScalarField phi1{[l1](const Vector& q) { return l1 * std::cos(q(0)); },
                     [l1](const Vector& q) {
                         Vector g(2);
                         g << -l1 * std::sin(q(0)), 0.0;
                         return g;
                     },
                     [l1](const Vector& q) {
                         Matrix H = Matrix::Zero(2, 2);
                         H(0, 0) = -l1 * std::cos(q(0));
                         return H;
                     }};
    Vector w(2);
    w << bp.lambda2(), 1.0;
    const UnderactuatedPotential wheel(2, bp.k1, bp.k2, phi1, ScalarField::linear(w),
                                       ScalarField::linear(Vector::Ones(1)));
    const FullyActuatedPotential prop(Matrix::Identity(2, 2), Matrix::Identity(2, 2) * 0.5);
    const DecoupledQuadraticPotential dec(Matrix::Identity(2, 2) * 2, Matrix::Identity(2, 2));
    for (const PotentialVd3* V : {static_cast<const PotentialVd3*>(&wheel),
                                  static_cast<const PotentialVd3*>(&prop),
                                  static_cast<const PotentialVd3*>(&dec)}) {
        for (int k = 0; k < 100; ++k) {
            const Vector q = rnd(V->n());
            const Vector z = rnd(V->m());
            const Vector a = rnd(V->anchor_dim());
            worst = std::max(worst, rel(V->grad_q(q, z, a), fd_gradient([&](const Vector& x) {
                                            return V->value(x, z, a);
                                        }, q)));
            worst = std::max(worst, rel(V->grad_z1(q, z, a), fd_gradient([&](const Vector& x) {
                                            return V->value(q, x, a);
                                        }, z)));
        }
    }

    Matrix A(3, 3);
    A << -0.5, 2.0, 0.0, -2.0, -0.5, 1.0, 0.3, 0.0, -1.0;
    Vector x0(3);
    x0 << 1.0, 0.5, -0.25;
    auto f = [&A](double, const Vector& x) { return Vector(A * x); };
    const double e1 = (rk4_step(f, x0, 0.0, 0.1) - (A * 0.1).exp() * x0).norm();
    const double e2 = (rk4_step(f, x0, 0.0, 0.05) - (A * 0.05).exp() * x0).norm();
    const double order = std::log2(e1 / e2);
    report(worst < 1e-5 && std::abs(order - 5.0) < 0.2, "oracle equivalence",
           "worst gradient relative error " + fmt(worst) + ", RK4 local error order " +
               fmt(order));
}

void negative_control() {
    const Scenario plain = load("fully_actuated_no_velocity.ini");
    const Scenario robust = load("fully_actuated_2dof.ini");
    const auto a = simulate(*plain.tracker, plain.reference, plain.schedule, plain.initial_state(),
                            unsafe(plain), nullptr);
    const auto b = simulate(*robust.tracker, robust.reference, robust.schedule,
                            robust.initial_state(), unsafe(robust), nullptr);
    const double tf = a.t.back();
    const double offset = min_in(a, a.err_q, tf - 1.0, tf);
    const double steady = max_in(b, b.err_q, tf - 1.0, tf);
    report(offset > 10 * steady, "negative control",
           "velocity-free offset " + fmt(offset) + " vs robust steady error " + fmt(steady) +
               " over the final second");
}

}  // namespace

int main() {
    spdlog::set_level(spdlog::level::warn);
    const std::vector<std::function<void()>> checks = {
        certification,
        tracking,
        [] { contraction("ball_on_wheel.ini", 0.5); },
        [] { contraction("fully_actuated_2dof.ini", 6.0); },
        feedforward,
        velocity_independence,
        gates,
        oracles,
        negative_control,
    };
    for (const auto& check : checks) {
        try {
            check();
        } catch (const std::exception& e) {
            report(false, "error", e.what());
        }
    }
    std::printf("%d failing\n", failures);
    return failures == 0 ? 0 : 1;
}
