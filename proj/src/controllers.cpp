#include "phtrack/controllers.hpp"

#include <algorithm>
#include <cmath>

namespace phtrack {

namespace {

Matrix left_inverse(const Matrix& G) {
    return (G.transpose() * G).ldlt().solve(G.transpose());
}

bool is_spd(const Matrix& A, double tol = 0.0) {
    if (A.rows() != A.cols() || A.rows() == 0) {
        return false;
    }
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1 + A.cwiseAbs().maxCoeff())) {
        return false;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(A, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() > tol;
}

Index rank_of(const Matrix& A) {
    Eigen::FullPivLU<Matrix> lu(A);
    return lu.rank();
}

void require_shape(const Matrix& A, Index rows, Index cols, const char* what) {
    if (A.rows() != rows || A.cols() != cols) {
        throw DimensionError(std::string(what) + ": expected " + std::to_string(rows) + "x" +
                             std::to_string(cols) + ", got " + std::to_string(A.rows()) + "x" +
                             std::to_string(A.cols()));
    }
}

Matrix gperp_of(const MechanicalPHd& sys) {
    return annihilator_of<double>(sys.input_matrix).gperp;
}

double sample_time(const std::vector<double>& times, Index s) {
    return times.empty() ? 0.0 : times[static_cast<std::size_t>(s) % times.size()];
}

Vector solve_square(const Matrix& A, const Vector& b, const char* what) {
    Eigen::FullPivLU<Matrix> lu(A);
    if (!lu.isInvertible()) {
        throw SingularityError(std::string(what) + " is singular");
    }
    return lu.solve(b);
}

double max_abs(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

TimeTable table_on_half_grid(const std::function<Vector(double)>& f,
                             const ReferenceTrajectory& ref, double dt) {
    return TimeTable::tabulate(f, ref.t0, ref.tf, dt / 2);
}

}  // namespace

Matrix pseudo_inverse(const Matrix& A) {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(A);
    return cod.pseudoInverse();
}

double MatchingReport::max() const {
    double m = 0.0;
    for (const auto& [name, value] : equations) {
        m = std::max(m, value);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Velocity-free tracker

Matrix DesignNoVelocity::S1() const {
    Matrix S(s11.rows(), s11.cols() + s12.cols());
    S << s11, s12;
    return S;
}

Matrix DesignNoVelocity::Fe() const { return Je - Re; }

void DesignNoVelocity::validate() const {
    const Index nn = n();
    const Index mm = m();
    require_shape(Jd12, nn, nn, "Jd12");
    require_shape(Md, nn, nn, "Md");
    require_shape(Me, mm, mm, "Me");
    require_shape(s11, nn, mm, "s11");
    require_shape(s12, nn, mm, "s12");
    require_shape(S2, 2 * mm, nn, "S2");
    require_shape(Je, 2 * mm, 2 * mm, "Je");
    require_shape(Re, 2 * mm, 2 * mm, "Re");
    require_shape(Vd1.K, nn + mm, nn + mm, "Vd1 Hessian");
    if (!is_spd(Md)) {
        throw InvariantError("M_d not positive definite");
    }
    if (!is_spd(Me)) {
        throw InvariantError("M_e not positive definite");
    }
    if (!is_spd(Re)) {
        throw InvariantError("R_e not positive definite");
    }
    if ((Je + Je.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw InvariantError("J_e not skew-symmetric");
    }
    if (!Vd1.center) {
        throw InvariantError("V_d1 centre is not set");
    }
}

namespace {

struct NoVelocityGradients {
    Vector gq;
    Vector gxe;
};

NoVelocityGradients no_velocity_gradients(const DesignNoVelocity& d, const Vector& q,
                                          const Vector& xe, double t) {
    const Index n = d.n();
    const Index m = d.m();
    require_dim(q.size(), n, "q");
    require_dim(xe.size(), 2 * m, "x_e");
    Vector y(n + m);
    y << q, xe.head(m);
    const Vector g = d.Vd1.grad(y, t);
    NoVelocityGradients out;
    out.gq = g.head(n);
    out.gxe.resize(2 * m);
    out.gxe << g.tail(m), d.Me.ldlt().solve(Vector(xe.tail(m)));
    return out;
}

}  // namespace

Vector control_no_velocity(const DesignNoVelocity& design, const MechanicalPHd& sys,
                           const Vector& q, const Vector& xe, double t) {
    const auto g = no_velocity_gradients(design, q, xe, t);
    return left_inverse(sys.input_matrix) *
           (-design.Jd12.transpose() * g.gq + design.S1() * g.gxe + sys.potential_gradient(q));
}

Vector extension_no_velocity(const DesignNoVelocity& design, const MechanicalPHd&,
                             const Vector& q, const Vector& xe, double t) {
    const auto g = no_velocity_gradients(design, q, xe, t);
    return design.S2 * g.gq + design.Fe() * g.gxe;
}

Matrix assemble_P1(const DesignNoVelocity& d) {
    const Index n = d.n();
    const Index m = d.m();
    Matrix P = Matrix::Zero(2 * n + 2 * m, 2 * n + 2 * m);
    P.block(0, n, n, n) = d.Jd12;
    P.block(n, 0, n, n) = -d.Jd12.transpose();
    P.block(n, 2 * n, n, 2 * m) = d.S1();
    P.block(2 * n, 0, 2 * m, n) = d.S2;
    P.block(2 * n, 2 * n, 2 * m, 2 * m) = d.Fe();
    return P;
}

// ---------------------------------------------------------------------------
// Robust tracker

void DesignRobust::validate() const {
    const Index nn = n();
    const Index mm = m();
    require_shape(Jd12, nn, nn, "Jd12");
    require_shape(Rd, nn, nn, "Rd");
    require_shape(W1, nn, mm, "W1");
    require_shape(W2, mm, nn, "W2");
    require_shape(W3, mm, nn, "W3");
    require_shape(Kzeta, mm, mm, "Kzeta");
    require_shape(Vd2.K, nn, nn, "Vd2 Hessian");
    if (!Md) {
        throw InvariantError("M_d is not set");
    }
    if (!is_spd(Md(Vector::Zero(nn)))) {
        throw InvariantError("M_d not positive definite");
    }
    if (!is_spd(Kzeta)) {
        throw InvariantError("K_zeta not positive definite");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (Rd + Rd.transpose()), Eigen::EigenvaluesOnly);
    if ((Rd - Rd.transpose()).cwiseAbs().maxCoeff() > 1e-12 || es.eigenvalues().minCoeff() < -1e-12) {
        throw InvariantError("R_d not symmetric positive semi-definite");
    }
    if (rank_of(W1) != mm || rank_of(W2) != mm || rank_of(W3) != mm) {
        throw InvariantError("W1, W2, W3 must have rank m");
    }
    if (!Vd2.center) {
        throw InvariantError("V_d2 centre is not set");
    }
}

Vector theta(const DesignRobust& design, const Vector& q, const Vector& p, double t) {
    Vector out = design.Vd2.grad(q, t);
    if (!design.constant_Md) {
        out += kinetic_gradient<double>(design.Md, design.dMd, q, p);
    }
    return out;
}

Vector gamma1(const DesignRobust& design, const MechanicalPHd& sys,
              const ReferenceTrajectory& ref, double t) {
    const Matrix& G = sys.input_matrix;
    const Vector q = ref.q_star(t);
    const Vector p = ref.p_star(t);
    const Vector th = theta(design, q, p, t);
    const Vector rhs = G.transpose() * (-design.Jd12.transpose() * th -
                                        design.Rd * design.Md(q).ldlt().solve(p)) -
                       G.transpose() * ref.p_dot(t);
    return solve_square(G.transpose() * design.W1 * design.Kzeta, rhs, "G^T W1 K_zeta");
}

Vector control_robust(const DesignRobust& design, const MechanicalPHd& sys, const Vector& q,
                      const Vector& p, const Vector& zeta, double t) {
    require_dim(zeta.size(), design.m(), "zeta");
    if (!design.gamma1_map) {
        throw InvariantError("gamma1 is not bound to a reference");
    }
    const Vector th = theta(design, q, p, t);
    const Vector v = design.Md(q).ldlt().solve(p);
    const auto gradH = hamiltonian_grad(sys, q, p);
    return left_inverse(sys.input_matrix) *
           (-design.Jd12.transpose() * th - design.Rd * v +
            design.W1 * design.Kzeta * (zeta - design.gamma1_map(t)) + gradH.dq);
}

Vector zeta_dot(const DesignRobust& design, const Vector& q, const Vector& p, double t) {
    return design.W2 * theta(design, q, p, t) + design.W3 * design.Md(q).ldlt().solve(p);
}

Vector mu1(const DesignRobust& design, const MechanicalPHd& sys, const Vector& d) {
    return pseudo_inverse(design.W1 * design.Kzeta) * (sys.input_matrix * d);
}

Matrix assemble_P2(const DesignRobust& d) {
    const Index n = d.n();
    const Index m = d.m();
    Matrix P = Matrix::Zero(2 * n + m, 2 * n + m);
    P.block(0, n, n, n) = d.Jd12;
    P.block(n, 0, n, n) = -d.Jd12.transpose();
    P.block(n, n, n, n) = -d.Rd;
    P.block(n, 2 * n, n, m) = d.W1;
    P.block(2 * n, 0, m, n) = d.W2;
    P.block(2 * n, n, m, n) = d.W3;
    return P;
}

// ---------------------------------------------------------------------------
// Robust velocity-free tracker

void DesignRobustNoVelocity::validate() const {
    const Index nn = n();
    const Index mm = m();
    require_shape(Jd12, nn, nn, "Jd12");
    require_shape(Md, nn, nn, "Md");
    require_shape(Kz, mm, mm, "Kz");
    require_shape(Gamma11, nn, mm, "Gamma11");
    require_shape(Gamma12, nn, mm, "Gamma12");
    require_shape(Gamma21, mm, nn, "Gamma21");
    require_shape(Gamma22, mm, nn, "Gamma22");
    require_shape(Gamma33, mm, mm, "Gamma33");
    if (!Vd3) {
        throw InvariantError("V_d3 is not set");
    }
    require_dim(Vd3->n(), nn, "V_d3 configuration dimension");
    require_dim(Vd3->m(), mm, "V_d3 extension dimension");
    if (!is_spd(Md)) {
        throw InvariantError("M_d not positive definite");
    }
}

std::vector<std::string> DesignRobustNoVelocity::structural_violations() const {
    std::vector<std::string> out;
    const Index mm = m();
    if (!is_spd(Gamma33)) {
        out.emplace_back("Gamma33 not positive definite");
    }
    if (!is_spd(Kz)) {
        out.emplace_back("K_z not positive definite");
    }
    if (!is_spd(Md)) {
        out.emplace_back("M_d not positive definite");
    }
    if (rank_of(Gamma11) != mm || rank_of(Gamma12) != mm) {
        out.emplace_back("Gamma11, Gamma12 not full rank");
    }
    if (rank_of(Gamma21) != mm || rank_of(Gamma22) != mm) {
        out.emplace_back("Gamma21, Gamma22 not full rank");
    }
    return out;
}

namespace {

Vector anchor_at(const DesignRobustNoVelocity& d, double t) {
    return d.anchor ? d.anchor(t) : Vector::Zero(d.Vd3->anchor_dim());
}

}  // namespace

Vector phi(const DesignRobustNoVelocity& design, const Vector& q, const Vector& z1, double t) {
    return design.Vd3->grad_q(q, z1, anchor_at(design, t));
}

Vector gamma2(const DesignRobustNoVelocity& design, const MechanicalPHd& sys,
              const ReferenceTrajectory& ref, const Vector& z1_star, double t) {
    const Matrix& G = sys.input_matrix;
    const Vector q = ref.q_star(t);
    const Vector a = design.Vd3->solve_anchor(q, z1_star, design.Gamma22);
    const Vector Phi = design.Vd3->grad_q(q, z1_star, a);
    const Vector gz = design.Vd3->grad_z1(q, z1_star, a);
    const Vector rhs =
        G.transpose() * (-design.Jd12.transpose() * Phi + design.Gamma11 * gz - ref.p_dot(t));
    return solve_square(G.transpose() * design.Gamma12 * design.Kz, rhs, "G^T Gamma12 K_z");
}

Vector control_robust_no_velocity(const DesignRobustNoVelocity& design,
                                  const MechanicalPHd& sys, const Vector& q, const Vector& Z,
                                  double t) {
    const Index m = design.m();
    require_dim(Z.size(), 2 * m, "Z");
    if (!design.gamma2_map) {
        throw InvariantError("gamma2 is not bound to a reference");
    }
    const Vector z1 = Z.head(m);
    const Vector z2 = Z.tail(m);
    const Vector a = anchor_at(design, t);
    const Vector Phi = design.Vd3->grad_q(q, z1, a);
    const Vector gz = design.Vd3->grad_z1(q, z1, a);
    return left_inverse(sys.input_matrix) *
           (-design.Jd12.transpose() * Phi + design.Gamma11 * gz +
            design.Gamma12 * design.Kz * (z2 - design.gamma2_map(t)) + sys.potential_gradient(q));
}

Vector z_dot(const DesignRobustNoVelocity& design, const Vector& q, const Vector& Z, double t) {
    const Index m = design.m();
    require_dim(Z.size(), 2 * m, "Z");
    const Vector z1 = Z.head(m);
    const Vector a = anchor_at(design, t);
    const Vector Phi = design.Vd3->grad_q(q, z1, a);
    const Vector gz = design.Vd3->grad_z1(q, z1, a);
    Vector out(2 * m);
    out << design.Gamma21 * Phi - design.Gamma33 * gz, design.Gamma22 * Phi;
    return out;
}

Vector mu2(const DesignRobustNoVelocity& design, const MechanicalPHd& sys, const Vector& d) {
    return pseudo_inverse(design.Gamma12 * design.Kz) * (sys.input_matrix * d);
}

Matrix assemble_P3(const DesignRobustNoVelocity& d) {
    const Index n = d.n();
    const Index m = d.m();
    Matrix P = Matrix::Zero(2 * n + 2 * m, 2 * n + 2 * m);
    P.block(0, n, n, n) = d.Jd12;
    P.block(n, 0, n, n) = -d.Jd12.transpose();
    P.block(n, 2 * n, n, m) = d.Gamma11;
    P.block(n, 2 * n + m, n, m) = d.Gamma12;
    P.block(2 * n, 0, m, n) = d.Gamma21;
    P.block(2 * n, 2 * n, m, m) = -d.Gamma33;
    P.block(2 * n + m, 0, m, n) = d.Gamma22;
    return P;
}

// ---------------------------------------------------------------------------
// Reductions

std::pair<Matrix, Matrix> design_reduction_S1(const Matrix& G, const Matrix& k11,
                                              const Matrix& k12) {
    return {G * k11, G * k12};
}

std::pair<Matrix, Matrix> design_reduction_W(const Matrix& G, const Matrix& K2,
                                             const Matrix& Kv) {
    return {G * K2, G * Kv * G.transpose()};
}

std::pair<Matrix, Matrix> design_reduction_F1(const Matrix& G, const Matrix& Kf) {
    const Index m = G.cols();
    require_shape(Kf, m, 2 * m, "K_f");
    const Matrix F = G * Kf;
    return {F.leftCols(m), F.rightCols(m)};
}

double conventional_matching_residual(const MechanicalPHd& sys, const Matrix& Jd12,
                                      const std::function<Vector(const Vector&)>& gradVd,
                                      const Vector& q) {
    const Matrix Gp = gperp_of(sys);
    return max_abs(Gp * (sys.potential_gradient(q) - Jd12.transpose() * gradVd(q)));
}

// ---------------------------------------------------------------------------
// Matching residuals

MatchingReport matching_residual(const DesignNoVelocity& d, const MechanicalPHd& sys,
                                 const Box& domain, const std::vector<double>& times,
                                 Index n_samples, std::uint64_t seed) {
    const Index n = d.n();
    const Index m = d.m();
    require_dim(domain.dim(), 2 * n + 2 * m, "matching domain");
    const Matrix Gp = gperp_of(sys);
    const Matrix X = latin_hypercube(domain, n_samples, seed);
    const Matrix Me_inv = d.Me.inverse();
    double r_inertia = 0.0;
    double r_potential = 0.0;
    for (Index s = 0; s < n_samples; ++s) {
        const double t = sample_time(times, s);
        const Vector q = X.col(s).segment(0, n);
        const Vector p = X.col(s).segment(n, n);
        const Vector qe = X.col(s).segment(2 * n, m);
        const Vector pe = X.col(s).segment(2 * n + m, m);
        r_inertia = std::max(r_inertia, max_abs(sys.inertia(q).ldlt().solve(p) -
                                                d.Jd12 * d.Md.ldlt().solve(p)));
        Vector y(n + m);
        y << q, qe;
        const Vector g = d.Vd1.grad(y, t);
        const Vector e = sys.potential_gradient(q) - d.Jd12.transpose() * g.head(n) +
                         d.s11 * g.tail(m) + d.s12 * Me_inv * pe;
        r_potential = std::max(r_potential, max_abs(Gp * e));
    }
    return {{{"inertia", r_inertia}, {"potential", r_potential}}};
}

MatchingReport matching_residual(const DesignRobust& d, const MechanicalPHd& sys,
                                 const Box& domain, const std::vector<double>& times,
                                 Index n_samples, std::uint64_t seed) {
    const Index n = d.n();
    const Index m = d.m();
    require_dim(domain.dim(), 2 * n + m, "matching domain");
    const Matrix Gp = gperp_of(sys);
    const Matrix X = latin_hypercube(domain, n_samples, seed);
    double r_inertia = 0.0;
    double r_kinetic = 0.0;
    double r_potential = 0.0;
    for (Index s = 0; s < n_samples; ++s) {
        const double t = sample_time(times, s);
        const Vector q = X.col(s).segment(0, n);
        const Vector p = X.col(s).segment(n, n);
        const Vector zeta = X.col(s).segment(2 * n, m);
        const Matrix Md = d.Md(q);
        const Vector v = Md.ldlt().solve(p);
        r_inertia = std::max(r_inertia, max_abs(sys.inertia(q).ldlt().solve(p) - d.Jd12 * v));
        if (!sys.constant_inertia || !d.constant_Md) {
            const Vector kin = 2 * kinetic_gradient<double>(sys.inertia, sys.inertia_derivative, q, p);
            const Vector kin_d =
                d.constant_Md ? Vector::Zero(n)
                              : Vector(2 * kinetic_gradient<double>(d.Md, d.dMd, q, p));
            r_kinetic = std::max(
                r_kinetic, max_abs(Gp * (kin - d.Jd12.transpose() * kin_d - 2 * d.Rd * v)));
        } else {
            r_kinetic = std::max(r_kinetic, max_abs(Gp * (-2 * d.Rd * v)));
        }
        const Vector g1 = d.gamma1_map ? d.gamma1_map(t) : Vector::Zero(m);
        const Vector e = sys.potential_gradient(q) - d.Jd12.transpose() * d.Vd2.grad(q, t) +
                         d.W1 * d.Kzeta * (zeta - g1);
        r_potential = std::max(r_potential, max_abs(Gp * e));
    }
    return {{{"inertia", r_inertia}, {"kinetic", r_kinetic}, {"potential", r_potential}}};
}

MatchingReport matching_residual(const DesignRobustNoVelocity& d, const MechanicalPHd& sys,
                                 const Box& domain, const std::vector<double>& times,
                                 Index n_samples, std::uint64_t seed) {
    const Index n = d.n();
    const Index m = d.m();
    require_dim(domain.dim(), 2 * n + 2 * m, "matching domain");
    const Matrix Gp = gperp_of(sys);
    const Matrix X = latin_hypercube(domain, n_samples, seed);
    const Matrix Md_inv = d.Md.inverse();
    double r_inertia = 0.0;
    double r_potential = 0.0;
    for (Index s = 0; s < n_samples; ++s) {
        const double t = sample_time(times, s);
        const Vector q = X.col(s).segment(0, n);
        const Vector p = X.col(s).segment(n, n);
        const Vector z1 = X.col(s).segment(2 * n, m);
        const Vector z2 = X.col(s).segment(2 * n + m, m);
        r_inertia = std::max(r_inertia,
                             max_abs(sys.inertia(q).ldlt().solve(p) - d.Jd12 * Md_inv * p));
        const Vector a = anchor_at(d, t);
        const Vector g2 = d.gamma2_map ? d.gamma2_map(t) : Vector::Zero(m);
        const Vector e = sys.potential_gradient(q) - d.Jd12.transpose() * d.Vd3->grad_q(q, z1, a) +
                         d.Gamma11 * d.Vd3->grad_z1(q, z1, a) + d.Gamma12 * d.Kz * (z2 - g2);
        r_potential = std::max(r_potential, max_abs(Gp * e));
    }
    return {{{"inertia", r_inertia}, {"potential", r_potential}}};
}

// ---------------------------------------------------------------------------
// Reference binding

void bind_reference(DesignNoVelocity& design, const MechanicalPHd& sys,
                    ReferenceTrajectory& ref, double dt) {
    const Index n = design.n();
    const Index m = design.m();
    Matrix A = Matrix::Zero(n + 2 * m, n + m);
    A.topLeftCorner(n, n) = -design.Jd12.transpose();
    A.topRightCorner(n, m) = design.s11;
    A.bottomLeftCorner(2 * m, n) = design.S2;
    A.bottomRightCorner(2 * m, m) = design.Fe().leftCols(m);
    const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(A);
    const Matrix K = design.Vd1.K;
    auto centre = [&](double t) -> Vector {
        Vector b = Vector::Zero(n + 2 * m);
        b.head(n) = ref.p_dot(t);
        const Vector g = cod.solve(b);
        const double res = max_abs(A * g - b);
        if (res > 1e-8 * (1.0 + max_abs(b))) {
            throw InvariantError("reference is not reachable by the velocity-free design (residual " +
                                 std::to_string(res) + ")");
        }
        Vector y = Vector::Zero(n + m);
        y.head(n) = ref.q_star(t);
        return y - K.ldlt().solve(g);
    };
    const TimeTable table = table_on_half_grid(centre, ref, dt);
    design.Vd1.center = [table](double t) { return table.value(t); };
    ref.aux.insert_or_assign("vd1_center", table);
    (void)sys;
}

void bind_reference(DesignRobust& design, const MechanicalPHd& sys, ReferenceTrajectory& ref,
                    double dt) {
    const Matrix W2p = pseudo_inverse(design.W2);
    const Matrix Kp = design.Vd2.K;
    auto anchor = [&](double t) -> Vector {
        const Vector q = ref.q_star(t);
        const Vector p = ref.p_star(t);
        Vector s = W2p * design.W3 * design.Md(q).ldlt().solve(p);
        if (!design.constant_Md) {
            s += kinetic_gradient<double>(design.Md, design.dMd, q, p);
        }
        return q + Kp.ldlt().solve(s);
    };
    const TimeTable L2 = table_on_half_grid(anchor, ref, dt);
    design.Vd2.center = [L2](double t) { return L2.value(t); };
    ref.aux.insert_or_assign("L", L2);
    const TimeTable g1 =
        table_on_half_grid([&](double t) { return gamma1(design, sys, ref, t); }, ref, dt);
    design.gamma1_map = [g1](double t) { return g1.value(t); };
    ref.aux.insert_or_assign("gamma1", g1);
}

namespace {

Vector z1_star_rate(const DesignRobustNoVelocity& d, const ReferenceTrajectory& ref, double t,
                    const Vector& z) {
    const auto& V = *d.Vd3;
    const Vector q = ref.q_star(t);
    const Vector a = V.solve_anchor(q, z, d.Gamma22);
    return d.Gamma21 * V.grad_q(q, z, a) - d.Gamma33 * V.grad_z1(q, z, a);
}

}  // namespace

Vector slow_z1_start(const DesignRobustNoVelocity& design, const ReferenceTrajectory& ref,
                     const Vector& guess) {
    const Index m = design.m();
    require_dim(guess.size(), m, "z1*(0) guess");
    const double t0 = ref.t0;
    const double ht = 1e-4;
    // z̈1(t0) = ∂f/∂t + (∂f/∂z) f, one-sided in t.
    auto accel = [&](const Vector& z) -> Vector {
        const Vector f0 = z1_star_rate(design, ref, t0, z);
        const Vector f1 = z1_star_rate(design, ref, t0 + ht, z);
        const Vector f2 = z1_star_rate(design, ref, t0 + 2 * ht, z);
        const Vector ft = (-3 * f0 + 4 * f1 - f2) / (2 * ht);
        const double hz = 1e-6 * (1.0 + max_abs(z));
        Matrix Jz(m, m);
        for (Index i = 0; i < m; ++i) {
            Vector zp = z;
            Vector zm = z;
            zp(i) += hz;
            zm(i) -= hz;
            Jz.col(i) = (z1_star_rate(design, ref, t0, zp) - z1_star_rate(design, ref, t0, zm)) /
                        (2 * hz);
        }
        return Vector(ft + Jz * f0);
    };
    Vector z = guess;
    Vector g = accel(z);
    for (int it = 0; it < 20 && max_abs(g) > 1e-10; ++it) {
        const double hz = 1e-5 * (1.0 + max_abs(z));
        Matrix J(m, m);
        for (Index i = 0; i < m; ++i) {
            Vector zp = z;
            Vector zm = z;
            zp(i) += hz;
            zm(i) -= hz;
            J.col(i) = (accel(zp) - accel(zm)) / (2 * hz);
        }
        Eigen::FullPivLU<Matrix> lu(J);
        if (!lu.isInvertible()) {
            return guess;
        }
        const Vector step = lu.solve(g);
        z -= step;
        g = accel(z);
    }
    return g.allFinite() && max_abs(g) <= 1e-6 * (1.0 + max_abs(accel(guess))) ? z : guess;
}

void bind_reference(DesignRobustNoVelocity& design, const MechanicalPHd& sys,
                    ReferenceTrajectory& ref, double dt, const Vector& z1_0) {
    const Index m = design.m();
    require_dim(z1_0.size(), m, "z1*(0)");
    const auto& V = *design.Vd3;
    auto rate = [&](double t, const Vector& z) -> Vector {
        return z1_star_rate(design, ref, t, z);
    };
    const double h = dt / 2;
    const auto steps = static_cast<Index>(std::ceil((ref.tf - ref.t0) / h - 1e-9));
    Matrix z(m, steps + 1);
    z.col(0) = z1_0;
    for (Index k = 0; k < steps; ++k) {
        const double t = ref.t0 + h * static_cast<double>(k);
        const Vector zk = z.col(k);
        const Vector k1 = rate(t, zk);
        const Vector k2 = rate(t + h / 2, zk + h / 2 * k1);
        const Vector k3 = rate(t + h / 2, zk + h / 2 * k2);
        const Vector k4 = rate(t + h, zk + h * k3);
        z.col(k + 1) = zk + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    Matrix anchors(V.anchor_dim(), steps + 1);
    Matrix g2(m, steps + 1);
    for (Index k = 0; k <= steps; ++k) {
        const double t = ref.t0 + h * static_cast<double>(k);
        anchors.col(k) = V.solve_anchor(ref.q_star(t), z.col(k), design.Gamma22);
        g2.col(k) = gamma2(design, sys, ref, z.col(k), t);
    }
    const TimeTable z_table(ref.t0, h, z);
    const TimeTable a_table(ref.t0, h, anchors);
    const TimeTable g_table(ref.t0, h, g2);
    design.z1_star = [z_table](double t) { return z_table.value(t); };
    design.anchor = [a_table](double t) { return a_table.value(t); };
    design.gamma2_map = [g_table](double t) { return g_table.value(t); };
    ref.aux.insert_or_assign("z1_star", z_table);
    ref.aux.insert_or_assign("anchor", a_table);
    ref.aux.insert_or_assign("gamma2", g_table);
}

}  // namespace phtrack
