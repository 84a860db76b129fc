#include "phtrack/reference.hpp"

#include "phtrack/report.hpp"

#include <cmath>
#include <ostream>

namespace phtrack {

ScalarSignal ScalarSignal::sinusoid(double amplitude, double omega) {
    return {[=](double t) { return amplitude * std::sin(omega * t); },
            [=](double t) { return amplitude * omega * std::cos(omega * t); },
            [=](double t) { return -amplitude * omega * omega * std::sin(omega * t); }};
}

ScalarSignal ScalarSignal::constant(double value) {
    return {[=](double) { return value; }, [](double) { return 0.0; },
            [](double) { return 0.0; }};
}

Vector ReferenceTrajectory::x_star(double t) const {
    Vector x(2 * n);
    x << q_star(t), p_star(t);
    return x;
}

Vector ReferenceTrajectory::q_dot(double t) const {
    if (q_star_dot) {
        return q_star_dot(t);
    }
    return differentiate(q_star, t, t0, tf);
}

Vector ReferenceTrajectory::p_dot(double t) const {
    if (p_star_dot) {
        return p_star_dot(t);
    }
    return differentiate(p_star, t, t0, tf);
}

bool ReferenceTrajectory::in_horizon(double t) const {
    const double slack = 1e-9 * (1.0 + std::abs(tf));
    return t >= t0 - slack && t <= tf + slack;
}

Matrix WheelConstants::inertia() const {
    Matrix M(2, 2);
    M << m1, m2, m2, m3;
    return M;
}

namespace {

/// Cumulative integral of grid samples f (step h), third-order per panel.
Eigen::VectorXd cumulative_simpson(const Eigen::VectorXd& f, double h) {
    const Index N = f.size();
    Eigen::VectorXd I = Eigen::VectorXd::Zero(N);
    if (N == 2) {
        I(1) = 0.5 * h * (f(0) + f(1));
        return I;
    }
    for (Index k = 0; k + 1 < N; ++k) {
        double panel = 0.0;
        if (k + 2 < N) {
            panel = h / 12.0 * (5 * f(k) + 8 * f(k + 1) - f(k + 2));
        } else {
            panel = h / 12.0 * (-f(k - 1) + 8 * f(k) + 5 * f(k + 1));
        }
        I(k + 1) = I(k) + panel;
    }
    return I;
}

}  // namespace

ReferenceTrajectory ball_on_wheel_reference(const WheelConstants& c, const ScalarSignal& a,
                                            double b0, double b1, double t0, double tf,
                                            double dt) {
    if (c.m2 == 0.0) {
        throw SingularityError("degenerate coupling: m2 = 0");
    }
    if (!(dt > 0) || tf < t0) {
        throw InvariantError("ball_on_wheel_reference: invalid horizon or step");
    }
    const double h = dt / 2;
    // Pad so that every RK4 stage and difference stencil stays inside the table.
    const double pad = 8 * h;
    const double lo = t0;
    const double hi = tf + pad;
    const auto steps = static_cast<Index>(std::ceil((hi - lo) / h - 1e-9));
    const Index N = std::max<Index>(steps + 1, 6);

    Eigen::VectorXd f(N);
    for (Index k = 0; k < N; ++k) {
        f(k) = c.m4 * std::sin(a.f(lo + h * static_cast<double>(k)));
    }
    const Eigen::VectorXd I1 = cumulative_simpson(f, h);
    const Eigen::VectorXd I2 = cumulative_simpson(I1, h);
    Matrix samples(2, N);
    samples.row(0) = I1.transpose();
    samples.row(1) = I2.transpose();
    const TimeTable integrals(lo, h, samples);

    const double det = c.m1 * c.m3 - c.m2 * c.m2;
    ReferenceTrajectory ref;
    ref.t0 = t0;
    ref.tf = tf;
    ref.n = 2;
    ref.m = 1;
    ref.b0 = b0;
    ref.b1 = b1;
    ref.q_star = [=](double t) {
        const Vector I = integrals.value(t);
        Vector q(2);
        q << a.f(t), (I(1) + b0 * (t - t0)) / c.m2 - c.m1 / c.m2 * a.f(t) + b1;
        return q;
    };
    ref.q_star_dot = [=](double t) {
        const Vector I = integrals.value(t);
        Vector qd(2);
        qd << a.df(t), (I(0) + b0) / c.m2 - c.m1 / c.m2 * a.df(t);
        return qd;
    };
    ref.p_star = [=](double t) {
        const double p1 = integrals.value(t)(0) + b0;
        Vector p(2);
        p << p1, c.m3 / c.m2 * p1 - det / c.m2 * a.df(t);
        return p;
    };
    ref.u_star = [=](double t) {
        Vector u(1);
        u << c.m3 / c.m2 * c.m4 * std::sin(a.f(t)) - det / c.m2 * a.ddf(t);
        return u;
    };
    ref.p_star_dot = [=](double t) {
        const double s = c.m4 * std::sin(a.f(t));
        Vector pd(2);
        pd << s, c.m3 / c.m2 * s - det / c.m2 * a.ddf(t);
        return pd;
    };
    ref.aux.emplace("integrals", integrals);
    return ref;
}

ReferenceTrajectory fully_actuated_reference(const MechanicalPHd& sys,
                                             const std::vector<ScalarSignal>& axes, double t0,
                                             double tf) {
    require_dim(static_cast<Index>(axes.size()), sys.dof, "fully_actuated_reference axes");
    if (sys.inputs() != sys.dof) {
        throw InvariantError("fully_actuated_reference: plant is not fully actuated");
    }
    if (!sys.constant_inertia) {
        throw InvariantError("fully_actuated_reference: requires constant inertia");
    }
    const Matrix M = sys.inertia(Vector::Zero(sys.dof));
    const Matrix Ginv = sys.input_matrix.inverse();
    const Index n = sys.dof;
    auto eval = [axes, n](double t, int order) {
        Vector v(n);
        for (Index i = 0; i < n; ++i) {
            const auto& s = axes[static_cast<std::size_t>(i)];
            v(i) = order == 0 ? s.f(t) : order == 1 ? s.df(t) : s.ddf(t);
        }
        return v;
    };
    ReferenceTrajectory ref;
    ref.t0 = t0;
    ref.tf = tf;
    ref.n = n;
    ref.m = n;
    ref.q_star = [eval](double t) { return eval(t, 0); };
    ref.q_star_dot = [eval](double t) { return eval(t, 1); };
    ref.p_star = [eval, M](double t) -> Vector { return M * eval(t, 1); };
    ref.p_star_dot = [eval, M](double t) -> Vector { return M * eval(t, 2); };
    ref.u_star = [eval, M, Ginv, gradV = sys.potential_gradient](double t) -> Vector {
        return Ginv * (M * eval(t, 2) + gradV(eval(t, 0)));
    };
    return ref;
}

ReferenceTrajectory equilibrium_reference(const MechanicalPHd& sys, const Vector& q_eq,
                                          double t0, double tf) {
    require_dim(q_eq.size(), sys.dof, "equilibrium_reference q");
    const Index n = sys.dof;
    const Index m = sys.inputs();
    const Annihilator<double> ann = annihilator_of<double>(sys.input_matrix);
    const Vector u_eq = ann.gdag * sys.potential_gradient(q_eq);
    ReferenceTrajectory ref;
    ref.t0 = t0;
    ref.tf = tf;
    ref.n = n;
    ref.m = m;
    ref.q_star = [q_eq](double) { return q_eq; };
    ref.q_star_dot = [n](double) { return Vector::Zero(n); };
    ref.p_star = [n](double) { return Vector::Zero(n); };
    ref.p_star_dot = [n](double) { return Vector::Zero(n); };
    ref.u_star = [u_eq](double) { return u_eq; };
    return ref;
}

Vector differentiate(const TimeMap& f, double t, double lo, double hi, double h) {
    if (hi - lo < 4 * h) {
        h = (hi - lo) / 4;
        if (!(h > 0)) {
            return Vector::Zero(f(t).size());
        }
    }
    if (t - 2 * h < lo) {
        const double s = std::max(t, lo);
        return (-25 * f(s) + 48 * f(s + h) - 36 * f(s + 2 * h) + 16 * f(s + 3 * h) -
                3 * f(s + 4 * h)) /
               (12 * h);
    }
    if (t + 2 * h > hi) {
        const double s = std::min(t, hi);
        return (25 * f(s) - 48 * f(s - h) + 36 * f(s - 2 * h) - 16 * f(s - 3 * h) +
                3 * f(s - 4 * h)) /
               (12 * h);
    }
    return (-f(t + 2 * h) + 8 * f(t + h) - 8 * f(t - h) + f(t - 2 * h)) / (12 * h);
}

double feasibility_residual(const MechanicalPHd& sys, const ReferenceTrajectory& ref,
                            const std::vector<double>& times) {
    require_dim(ref.n, sys.dof, "feasibility_residual reference");
    const Vector d0 = Vector::Zero(sys.inputs());
    double worst = 0.0;
    for (double t : times) {
        const Vector qd = differentiate(ref.q_star, t, ref.t0, ref.tf);
        const Vector pd = differentiate(ref.p_star, t, ref.t0, ref.tf);
        const auto rate = open_loop_vector_field(sys, ref.q_star(t), ref.p_star(t),
                                                 ref.u_star(t), d0);
        worst = std::max(worst, (qd - rate.q_dot).cwiseAbs().maxCoeff());
        worst = std::max(worst, (pd - rate.p_dot).cwiseAbs().maxCoeff());
    }
    return worst;
}

double momentum_consistency(const MechanicalPHd& sys, const ReferenceTrajectory& ref,
                            const std::vector<double>& times) {
    double worst = 0.0;
    for (double t : times) {
        const Vector q = ref.q_star(t);
        const Vector r = ref.p_star(t) - sys.inertia(q) * ref.q_dot(t);
        worst = std::max(worst, r.cwiseAbs().maxCoeff());
    }
    return worst;
}

TimeTable tabulate(const TimeMap& f, double t0, double t1, double dt) {
    return TimeTable::tabulate(f, t0, t1, dt);
}

std::vector<double> time_grid(double t0, double tf, double dt) {
    if (!(dt > 0)) {
        throw InvariantError("time_grid: step must be positive");
    }
    const auto steps = static_cast<Index>(std::llround((tf - t0) / dt));
    std::vector<double> ts;
    ts.reserve(static_cast<std::size_t>(std::max<Index>(steps + 1, 1)));
    for (Index k = 0; k <= steps; ++k) {
        ts.push_back(t0 + dt * static_cast<double>(k));
    }
    return ts;
}

void write_reference_csv(std::ostream& os, const ReferenceTrajectory& ref,
                         const std::vector<double>& times) {
    os << 't';
    for (Index i = 0; i < ref.n; ++i) {
        os << ",q*" << i + 1;
    }
    for (Index i = 0; i < ref.n; ++i) {
        os << ",p*" << i + 1;
    }
    for (Index i = 0; i < ref.m; ++i) {
        os << ",u*" << i + 1;
    }
    os << '\n';
    std::vector<double> row;
    for (double t : times) {
        row.clear();
        row.push_back(t);
        const Vector q = ref.q_star(t);
        const Vector p = ref.p_star(t);
        const Vector u = ref.u_star(t);
        row.insert(row.end(), q.data(), q.data() + q.size());
        row.insert(row.end(), p.data(), p.data() + p.size());
        row.insert(row.end(), u.data(), u.data() + u.size());
        write_csv_row(os, row);
    }
}

}  // namespace phtrack
