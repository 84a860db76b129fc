#include "phtrack/sim.hpp"

#include "phtrack/report.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <ostream>

namespace phtrack {

DisturbanceSchedule DisturbanceSchedule::none(Index m) {
    return {std::numeric_limits<double>::infinity(), Vector::Zero(m)};
}

bool DisturbanceSchedule::active(double t) const {
    return std::isfinite(onset) && t >= onset - 1e-9;
}

Vector DisturbanceSchedule::at(double t) const {
    return active(t) ? value : Vector::Zero(value.size());
}

Vector SimulationTrace::state(Index i) const {
    Vector x(2 * n + k);
    x << q.col(i), p.col(i), c.col(i);
    return x;
}

void SimulationTrace::write_csv(std::ostream& os) const {
    os << 't';
    for (Index i = 0; i < n; ++i) {
        os << ",q" << i + 1;
    }
    for (Index i = 0; i < n; ++i) {
        os << ",p" << i + 1;
    }
    for (Index i = 0; i < k; ++i) {
        os << ",c" << i + 1;
    }
    for (Index i = 0; i < m; ++i) {
        os << ",u" << i + 1;
    }
    os << ",d_active,err_q,err_full\n";
    std::vector<double> row;
    for (Index j = 0; j < size(); ++j) {
        row.clear();
        row.push_back(t[static_cast<std::size_t>(j)]);
        for (const Matrix* M : {&q, &p, &c, &u}) {
            for (Index i = 0; i < M->rows(); ++i) {
                row.push_back((*M)(i, j));
            }
        }
        row.push_back(d_active[static_cast<std::size_t>(j)]);
        row.push_back(err_q[static_cast<std::size_t>(j)]);
        row.push_back(err_full[static_cast<std::size_t>(j)]);
        write_csv_row(os, row);
    }
}

InitialState reference_initial_state(const Tracker& tracker, const ReferenceTrajectory& ref,
                                     const DisturbanceSchedule& schedule) {
    return {ref.q_star(ref.t0), ref.p_star(ref.t0),
            tracker.reference_controller_state(ref.t0, schedule.at(ref.t0))};
}

SimulationTrace simulate(const Tracker& tracker, const ReferenceTrajectory& ref,
                         const DisturbanceSchedule& schedule, const InitialState& x0,
                         const SimulationOptions& options,
                         const ContractionCertificate* certificate) {
    if (!options.unsafe && (certificate == nullptr || !certificate->pass)) {
        throw GateError("design is not certified" +
                        (certificate ? ": " + certificate->reason : std::string()));
    }
    if (!(options.dt > 0) || options.horizon < 0) {
        throw InvariantError("simulation step must be positive and horizon non-negative");
    }
    const MechanicalPHd& sys = tracker.plant();
    const Index n = sys.dof;
    const Index m = sys.inputs();
    const Index k = tracker.controller_dim();
    require_dim(x0.q.size(), n, "initial q");
    require_dim(x0.p.size(), n, "initial p");
    require_dim(x0.c.size(), k, "initial controller state");
    require_dim(schedule.value.size(), m, "disturbance");

    SimulationTrace tr;
    tr.n = n;
    tr.m = m;
    tr.k = k;
    const auto steps = static_cast<Index>(std::llround(options.horizon / options.dt));
    if (steps == 0) {
        tr.q.resize(n, 0);
        tr.p.resize(n, 0);
        tr.c.resize(k, 0);
        tr.u.resize(m, 0);
        return tr;
    }
    if (!ref.in_horizon(ref.t0 + options.dt * static_cast<double>(steps))) {
        throw InvariantError("simulation horizon exceeds the reference horizon");
    }
    const Index N = steps + 1;
    tr.t.resize(static_cast<std::size_t>(N));
    tr.q.resize(n, N);
    tr.p.resize(n, N);
    tr.c.resize(k, N);
    tr.u.resize(m, N);
    tr.d_active.resize(static_cast<std::size_t>(N));
    tr.err_q.resize(static_cast<std::size_t>(N));
    tr.err_full.resize(static_cast<std::size_t>(N));

    Vector x(2 * n + k);
    x << x0.q, x0.p, x0.c;
    Vector d = Vector::Zero(m);
    auto field = [&](double t, const Vector& xi) -> Vector {
        const Vector q = xi.segment(0, n);
        const Vector p = xi.segment(n, n);
        const Vector c = xi.segment(2 * n, k);
        const Vector u = tracker.control(q, p, c, t);
        const auto rate = open_loop_vector_field(sys, q, p, u, d);
        Vector dx(2 * n + k);
        dx << rate.q_dot, rate.p_dot, tracker.controller_rate(q, p, c, t);
        return dx;
    };

    for (Index j = 0; j < N; ++j) {
        const double t = ref.t0 + options.dt * static_cast<double>(j);
        const bool active = schedule.active(t);
        d = active ? schedule.value : Vector::Zero(m);
        const Vector q = x.segment(0, n);
        const Vector p = x.segment(n, n);
        const Vector c = x.segment(2 * n, k);
        const Vector qs = ref.q_star(t);
        Vector xs(2 * n + k);
        xs << qs, ref.p_star(t), tracker.reference_controller_state(t, d);
        const auto ju = static_cast<std::size_t>(j);
        tr.t[ju] = t;
        tr.q.col(j) = q;
        tr.p.col(j) = p;
        tr.c.col(j) = c;
        tr.u.col(j) = tracker.control(q, p, c, t);
        tr.d_active[ju] = active ? 1 : 0;
        tr.err_q[ju] = (q - qs).norm();
        tr.err_full[ju] = (x - xs).norm();
        if (j + 1 == N) {
            break;
        }
        x = rk4_step(field, x, t, options.dt);
        if (!x.allFinite() || x.norm() > options.blowup) {
            const double tb = t + options.dt;
            spdlog::warn("simulation diverged at t = {}", tb);
            throw DivergenceError("closed-loop state diverged at t = " + format_number(tb), tb);
        }
    }
    return tr;
}

ConvergenceFit log_linear_fit(const std::vector<double>& t, const std::vector<double>& dist,
                              double t_begin, double t_end) {
    std::vector<double> xs;
    std::vector<double> ys;
    bool all_zero = true;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_begin - 1e-12 || t[i] > t_end + 1e-12) {
            continue;
        }
        xs.push_back(t[i]);
        if (dist[i] > 0) {
            all_zero = false;
        }
        ys.push_back(std::log(std::max(dist[i], std::numeric_limits<double>::min())));
    }
    ConvergenceFit fit;
    fit.points = static_cast<Index>(xs.size());
    if (xs.size() < 2) {
        fit.rate = std::numeric_limits<double>::quiet_NaN();
        fit.r2 = 0.0;
        return fit;
    }
    if (all_zero) {
        fit.rate = -std::numeric_limits<double>::infinity();
        fit.r2 = 1.0;
        return fit;
    }
    const auto n = static_cast<double>(xs.size());
    double mx = 0;
    double my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0;
    double sxy = 0;
    double syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    fit.rate = sxy / sxx;
    fit.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

ConvergenceFit convergence_fit(const SimulationTrace& a, const SimulationTrace& b,
                               double t_begin, double t_end) {
    if (a.size() != b.size() || a.n != b.n || a.k != b.k) {
        throw DimensionError("convergence_fit: traces have different shapes");
    }
    std::vector<double> dist(static_cast<std::size_t>(a.size()));
    for (Index i = 0; i < a.size(); ++i) {
        dist[static_cast<std::size_t>(i)] = (a.state(i) - b.state(i)).norm();
    }
    return log_linear_fit(a.t, dist, t_begin, t_end);
}

double max_coordinate_error(const SimulationTrace& trace, const ReferenceTrajectory& ref,
                            Index coordinate, double t_begin, double t_end) {
    double worst = 0.0;
    for (Index i = 0; i < trace.size(); ++i) {
        const double t = trace.t[static_cast<std::size_t>(i)];
        if (t < t_begin - 1e-12 || t > t_end + 1e-12) {
            continue;
        }
        worst = std::max(worst, std::abs(trace.q(coordinate, i) - ref.q_star(t)(coordinate)));
    }
    return worst;
}

}  // namespace phtrack
