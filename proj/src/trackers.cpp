#include "phtrack/trackers.hpp"

namespace phtrack {

std::string to_string(ControllerKind kind) {
    switch (kind) {
        case ControllerKind::NoVelocity:
            return "no_velocity";
        case ControllerKind::Robust:
            return "robust";
        case ControllerKind::RobustNoVelocity:
            return "robust_no_velocity";
    }
    return "unknown";
}

ControllerKind parse_controller_kind(const std::string& name) {
    if (name == "no_velocity") {
        return ControllerKind::NoVelocity;
    }
    if (name == "robust") {
        return ControllerKind::Robust;
    }
    if (name == "robust_no_velocity") {
        return ControllerKind::RobustNoVelocity;
    }
    throw ConfigError("unknown controller kind '" + name + "'");
}

EnergyFunction Tracker::closed_loop_energy() const {
    EnergyFunction e;
    e.dim = state_dim();
    e.hessian = [this](const Vector& xi, double t) { return closed_loop_hessian(xi, t); };
    return e;
}

namespace {

class NoVelocityTracker final : public Tracker {
public:
    NoVelocityTracker(MechanicalPHd sys, DesignNoVelocity d)
        : sys_(std::move(sys)), d_(std::move(d)) {
        d_.validate();
    }

    ControllerKind kind() const override { return ControllerKind::NoVelocity; }
    const MechanicalPHd& plant() const override { return sys_; }
    Index controller_dim() const override { return 2 * d_.m(); }
    bool velocity_free() const override { return true; }

    Vector control(const Vector& q, const Vector&, const Vector& c, double t) const override {
        return control_no_velocity(d_, sys_, q, c, t);
    }
    Vector controller_rate(const Vector& q, const Vector&, const Vector& c,
                           double t) const override {
        return extension_no_velocity(d_, sys_, q, c, t);
    }
    Vector reference_controller_state(double, const Vector&) const override {
        return Vector::Zero(controller_dim());
    }
    Matrix closed_loop_matrix() const override { return assemble_P1(d_); }
    Matrix closed_loop_hessian(const Vector&, double) const override {
        const Index n = d_.n();
        const Index m = d_.m();
        Matrix Hm = Matrix::Zero(2 * n + 2 * m, 2 * n + 2 * m);
        const Matrix& K = d_.Vd1.K;
        Hm.block(0, 0, n, n) = K.topLeftCorner(n, n);
        Hm.block(0, 2 * n, n, m) = K.topRightCorner(n, m);
        Hm.block(2 * n, 0, m, n) = K.bottomLeftCorner(m, n);
        Hm.block(2 * n, 2 * n, m, m) = K.bottomRightCorner(m, m);
        Hm.block(n, n, n, n) = d_.Md.inverse();
        Hm.block(2 * n + m, 2 * n + m, m, m) = d_.Me.inverse();
        return Hm;
    }
    MatchingReport matching(const Box& domain, const std::vector<double>& times, Index n_samples,
                            std::uint64_t seed) const override {
        return matching_residual(d_, sys_, domain, times, n_samples, seed);
    }
    std::vector<std::string> design_violations() const override { return {}; }

private:
    MechanicalPHd sys_;
    DesignNoVelocity d_;
};

class RobustTracker final : public Tracker {
public:
    RobustTracker(MechanicalPHd sys, DesignRobust d) : sys_(std::move(sys)), d_(std::move(d)) {
        d_.validate();
    }

    ControllerKind kind() const override { return ControllerKind::Robust; }
    const MechanicalPHd& plant() const override { return sys_; }
    Index controller_dim() const override { return d_.m(); }
    bool velocity_free() const override { return false; }

    Vector control(const Vector& q, const Vector& p, const Vector& c, double t) const override {
        return control_robust(d_, sys_, q, p, c, t);
    }
    Vector controller_rate(const Vector& q, const Vector& p, const Vector&,
                           double t) const override {
        return zeta_dot(d_, q, p, t);
    }
    Vector reference_controller_state(double, const Vector& d) const override {
        return -mu1(d_, sys_, d);
    }
    Matrix closed_loop_matrix() const override { return assemble_P2(d_); }
    Matrix closed_loop_hessian(const Vector& xi, double t) const override {
        const Index n = d_.n();
        const Index m = d_.m();
        Matrix Hm = Matrix::Zero(2 * n + m, 2 * n + m);
        const Vector q = xi.head(n);
        Hm.block(0, 0, n, n) = d_.Vd2.K;
        if (!d_.constant_Md) {
            const Vector p = xi.segment(n, n);
            EnergyFunction kin;
            kin.dim = n;
            kin.value = [this, &p](const Vector& x, double) {
                return 0.5 * p.dot(d_.Md(x).ldlt().solve(p));
            };
            Hm.block(0, 0, n, n) += kin.hessian_at(q, t);
        }
        Hm.block(n, n, n, n) = d_.Md(q).inverse();
        Hm.block(2 * n, 2 * n, m, m) = d_.Kzeta;
        return Hm;
    }
    MatchingReport matching(const Box& domain, const std::vector<double>& times, Index n_samples,
                            std::uint64_t seed) const override {
        return matching_residual(d_, sys_, domain, times, n_samples, seed);
    }
    std::vector<std::string> design_violations() const override { return {}; }

private:
    MechanicalPHd sys_;
    DesignRobust d_;
};

class RobustNoVelocityTracker final : public Tracker {
public:
    RobustNoVelocityTracker(MechanicalPHd sys, DesignRobustNoVelocity d)
        : sys_(std::move(sys)), d_(std::move(d)) {
        d_.validate();
    }

    ControllerKind kind() const override { return ControllerKind::RobustNoVelocity; }
    const MechanicalPHd& plant() const override { return sys_; }
    Index controller_dim() const override { return 2 * d_.m(); }
    bool velocity_free() const override { return true; }

    Vector control(const Vector& q, const Vector&, const Vector& c, double t) const override {
        return control_robust_no_velocity(d_, sys_, q, c, t);
    }
    Vector controller_rate(const Vector& q, const Vector&, const Vector& c,
                           double t) const override {
        return z_dot(d_, q, c, t);
    }
    Vector reference_controller_state(double t, const Vector& d) const override {
        const Index m = d_.m();
        Vector c(2 * m);
        c << (d_.z1_star ? d_.z1_star(t) : Vector::Zero(m)), -mu2(d_, sys_, d);
        return c;
    }
    Matrix closed_loop_matrix() const override { return assemble_P3(d_); }
    Matrix closed_loop_hessian(const Vector& xi, double t) const override {
        const Index n = d_.n();
        const Index m = d_.m();
        const Vector q = xi.head(n);
        const Vector z1 = xi.segment(2 * n, m);
        const Vector a = d_.anchor ? d_.anchor(t) : Vector::Zero(d_.Vd3->anchor_dim());
        const Matrix V = d_.Vd3->hessian(q, z1, a);
        Matrix Hm = Matrix::Zero(2 * n + 2 * m, 2 * n + 2 * m);
        Hm.block(0, 0, n, n) = V.topLeftCorner(n, n);
        Hm.block(0, 2 * n, n, m) = V.topRightCorner(n, m);
        Hm.block(2 * n, 0, m, n) = V.bottomLeftCorner(m, n);
        Hm.block(2 * n, 2 * n, m, m) = V.bottomRightCorner(m, m);
        Hm.block(n, n, n, n) = d_.Md.inverse();
        Hm.block(2 * n + m, 2 * n + m, m, m) = d_.Kz;
        return Hm;
    }
    MatchingReport matching(const Box& domain, const std::vector<double>& times, Index n_samples,
                            std::uint64_t seed) const override {
        return matching_residual(d_, sys_, domain, times, n_samples, seed);
    }
    std::vector<std::string> design_violations() const override {
        return d_.structural_violations();
    }

private:
    MechanicalPHd sys_;
    DesignRobustNoVelocity d_;
};

}  // namespace

std::unique_ptr<Tracker> make_tracker(MechanicalPHd sys, DesignNoVelocity design) {
    return std::make_unique<NoVelocityTracker>(std::move(sys), std::move(design));
}

std::unique_ptr<Tracker> make_tracker(MechanicalPHd sys, DesignRobust design) {
    return std::make_unique<RobustTracker>(std::move(sys), std::move(design));
}

std::unique_ptr<Tracker> make_tracker(MechanicalPHd sys, DesignRobustNoVelocity design) {
    return std::make_unique<RobustNoVelocityTracker>(std::move(sys), std::move(design));
}

}  // namespace phtrack
