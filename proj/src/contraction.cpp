#include "phtrack/contraction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace phtrack {

void Box::validate() const {
    if (lower.size() != upper.size()) {
        throw DimensionError("box bounds have different dimensions");
    }
    if (lower.size() == 0) {
        throw InvariantError("box is empty");
    }
    for (Index i = 0; i < lower.size(); ++i) {
        if (!(lower(i) <= upper(i))) {
            throw InvariantError("box lower bound exceeds upper bound in coordinate " +
                                 std::to_string(i));
        }
    }
}

bool Box::contains(const Vector& x) const {
    return x.size() == dim() && (x.array() >= lower.array()).all() &&
           (x.array() <= upper.array()).all();
}

Matrix EnergyFunction::hessian_at(const Vector& x, double t) const {
    if (hessian) {
        return hessian(x, t);
    }
    const Index n = x.size();
    const double h = 1e-4;
    Matrix Hm(n, n);
    Vector y = x;
    const double f0 = value(x, t);
    for (Index i = 0; i < n; ++i) {
        y(i) = x(i) + h;
        const double fp = value(y, t);
        y(i) = x(i) - h;
        const double fm = value(y, t);
        y(i) = x(i);
        Hm(i, i) = (fp - 2 * f0 + fm) / (h * h);
        for (Index j = 0; j < i; ++j) {
            y(i) = x(i) + h;
            y(j) = x(j) + h;
            const double fpp = value(y, t);
            y(j) = x(j) - h;
            const double fpm = value(y, t);
            y(i) = x(i) - h;
            const double fmm = value(y, t);
            y(j) = x(j) + h;
            const double fmp = value(y, t);
            y(i) = x(i);
            y(j) = x(j);
            Hm(i, j) = Hm(j, i) = (fpp - fpm - fmp + fmm) / (4 * h * h);
        }
    }
    return Hm;
}

Matrix latin_hypercube(const Box& domain, Index n_samples, std::uint64_t seed) {
    domain.validate();
    const Index d = domain.dim();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Matrix out(d, n_samples);
    std::vector<Index> perm(static_cast<std::size_t>(n_samples));
    for (Index i = 0; i < d; ++i) {
        std::iota(perm.begin(), perm.end(), Index{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        const double width = domain.upper(i) - domain.lower(i);
        for (Index s = 0; s < n_samples; ++s) {
            const double u = (static_cast<double>(perm[static_cast<std::size_t>(s)]) + unit(rng)) /
                             static_cast<double>(n_samples);
            out(i, s) = domain.lower(i) + u * width;
        }
    }
    return out;
}

HessianBounds estimate_hessian_bounds(const EnergyFunction& Hd, const Box& domain,
                                      const std::vector<double>& times, Index n_samples,
                                      std::uint64_t seed, double guard) {
    domain.validate();
    require_dim(domain.dim(), Hd.dim, "estimate_hessian_bounds domain");
    if (n_samples <= 0) {
        throw InvariantError("estimate_hessian_bounds: n_samples must be positive");
    }
    const std::vector<double> ts = times.empty() ? std::vector<double>{0.0} : times;
    const Matrix X = latin_hypercube(domain, n_samples, seed);

    HessianBounds b;
    b.domain = domain;
    b.sample_count = n_samples;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (Index s = 0; s < n_samples; ++s) {
        const double t = ts[static_cast<std::size_t>(s) % ts.size()];
        const Vector x = X.col(s);
        Matrix Hm = Hd.hessian_at(x, t);
        Hm = 0.5 * (Hm + Hm.transpose());
        Eigen::SelfAdjointEigenSolver<Matrix> es(Hm, Eigen::EigenvaluesOnly);
        const double emin = es.eigenvalues().minCoeff();
        const double emax = es.eigenvalues().maxCoeff();
        if (emin < lo) {
            lo = emin;
            b.witness = x;
            b.witness_time = t;
        }
        hi = std::max(hi, emax);
    }
    b.min_eigenvalue = lo;
    b.max_eigenvalue = hi;
    if (lo <= 0) {
        b.valid = false;
        b.alpha = 0.0;
        b.beta = (1 + guard) * hi;
        b.margin = lo;
        return b;
    }
    b.alpha = (1 - guard) * lo;
    b.beta = (1 + guard) * hi;
    b.margin = std::min(lo - b.alpha, b.beta - hi);
    b.valid = b.alpha < b.beta;
    return b;
}

double n_axis_distance(const Matrix& N) {
    Eigen::EigenSolver<Matrix> es(N, false);
    if (es.info() != Eigen::Success) {
        throw Error("n_axis_distance: eigenvalue solver did not converge");
    }
    double d = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < N.rows(); ++i) {
        const auto lambda = es.eigenvalues()(i);
        d = std::min(d, std::abs(lambda.real()) / (1.0 + std::abs(lambda)));
    }
    return d;
}

ContractionCertificate certify(const Matrix& P, const HessianBounds& bounds,
                               const CertifyOptions& options,
                               std::vector<std::string> design_violations) {
    if (options.eps_grid.empty()) {
        throw InvariantError("certify: epsilon grid is empty");
    }
    for (double e : options.eps_grid) {
        if (!(e > 0)) {
            throw InvariantError("certify: epsilon grid entries must be positive");
        }
    }
    ContractionCertificate c;
    c.bounds = bounds;
    c.violations = std::move(design_violations);
    const auto hw = hurwitz_check(P, options.margin_tol);
    c.hurwitz_ok = hw.ok;
    c.abscissa = hw.abscissa;

    c.n_spectrum_min_redistance = std::numeric_limits<double>::infinity();
    if (bounds.valid) {
        for (double eps : options.eps_grid) {
            const double dist = n_axis_distance(n_matrix(P, bounds.alpha, bounds.beta, eps));
            c.n_spectrum_min_redistance = std::min(c.n_spectrum_min_redistance, dist);
            if (!c.epsilon_found && dist > options.im_axis_tol) {
                c.epsilon_found = eps;
            }
        }
    } else {
        c.n_spectrum_min_redistance = 0.0;
    }

    std::vector<std::string> reasons = c.violations;
    if (!c.hurwitz_ok) {
        reasons.emplace_back("not Hurwitz");
    }
    if (!bounds.valid) {
        std::ostringstream os;
        os << "Hessian not positive definite on the box (min eigenvalue "
           << bounds.min_eigenvalue << ")";
        reasons.push_back(os.str());
    } else if (!c.epsilon_found) {
        reasons.emplace_back("N has eigenvalues on the imaginary axis for every epsilon");
    }
    c.pass = reasons.empty();
    if (c.pass) {
        c.reason = "all conditions hold";
    } else {
        for (std::size_t i = 0; i < reasons.size(); ++i) {
            c.reason += (i ? "; " : "") + reasons[i];
        }
    }
    return c;
}

std::vector<double> uniform_times(double t0, double period, Index count) {
    std::vector<double> ts;
    ts.reserve(static_cast<std::size_t>(count));
    for (Index i = 0; i < count; ++i) {
        ts.push_back(t0 + period * static_cast<double>(i) / static_cast<double>(count));
    }
    return ts;
}

}  // namespace phtrack
