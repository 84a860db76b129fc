#pragma once

#include "phtrack/types.hpp"

#include <functional>
#include <random>

namespace phtrack::testing {

inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                          double h = 1e-6) {
    Vector g(x.size());
    Vector xp = x;
    Vector xm = x;
    for (Index i = 0; i < x.size(); ++i) {
        xp(i) = x(i) + h;
        xm(i) = x(i) - h;
        g(i) = (f(xp) - f(xm)) / (2 * h);
        xp(i) = x(i);
        xm(i) = x(i);
    }
    return g;
}

inline Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x,
                          double h = 1e-6) {
    const Index k = f(x).size();
    Matrix J(k, x.size());
    Vector xp = x;
    Vector xm = x;
    for (Index i = 0; i < x.size(); ++i) {
        xp(i) = x(i) + h;
        xm(i) = x(i) - h;
        J.col(i) = (f(xp) - f(xm)) / (2 * h);
        xp(i) = x(i);
        xm(i) = x(i);
    }
    return J;
}

inline double rel_err(const Vector& a, const Vector& b) {
    return (a - b).cwiseAbs().maxCoeff() / (1.0 + b.cwiseAbs().maxCoeff());
}

inline Vector uniform(std::mt19937_64& rng, Index n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    Vector v(n);
    for (Index i = 0; i < n; ++i) {
        v(i) = u(rng);
    }
    return v;
}

inline Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Index>(xs.size()));
    Index i = 0;
    for (double x : xs) {
        v(i++) = x;
    }
    return v;
}

}  // namespace phtrack::testing
