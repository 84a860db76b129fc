#include "phtrack/time_table.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include <algorithm>
#include <cmath>

namespace phtrack {

struct TimeTable::Splines {
    std::vector<boost::math::interpolators::cardinal_cubic_b_spline<double>> per_component;
};

namespace {
constexpr Index kMinSplinePoints = 5;
}

TimeTable::TimeTable(double t0, double dt, Matrix samples)
    : t0_(t0), dt_(dt), samples_(std::move(samples)) {
    if (!(dt_ > 0)) {
        throw InvariantError("time table step must be positive");
    }
    if (count() < kMinSplinePoints) {
        return;
    }
    auto s = std::make_shared<Splines>();
    s->per_component.reserve(static_cast<std::size_t>(dim()));
    std::vector<double> row(static_cast<std::size_t>(count()));
    for (Index i = 0; i < dim(); ++i) {
        for (Index k = 0; k < count(); ++k) {
            row[static_cast<std::size_t>(k)] = samples_(i, k);
        }
        s->per_component.emplace_back(row.begin(), row.end(), t0_, dt_);
    }
    splines_ = std::move(s);
}

TimeTable TimeTable::tabulate(const std::function<Vector(double)>& f, double t0, double t1,
                              double dt) {
    if (!(dt > 0)) {
        throw InvariantError("tabulate: step must be positive");
    }
    if (t1 < t0) {
        throw InvariantError("tabulate: horizon end precedes start");
    }
    const auto steps = static_cast<Index>(std::ceil((t1 - t0) / dt - 1e-9));
    const Index n = steps + 1;
    const Vector first = f(t0);
    Matrix samples(first.size(), n);
    samples.col(0) = first;
    for (Index k = 1; k < n; ++k) {
        samples.col(k) = f(t0 + dt * static_cast<double>(k));
    }
    return TimeTable(t0, dt, std::move(samples));
}

double TimeTable::check_range(double t) const {
    if (empty()) {
        throw InvariantError("time table is empty");
    }
    const double slack = 1e-9 * (1.0 + std::abs(t1()));
    if (t < t0_ - slack || t > t1() + slack) {
        throw InvariantError("time " + std::to_string(t) + " outside table range [" +
                             std::to_string(t0_) + ", " + std::to_string(t1()) + "]");
    }
    return std::clamp(t, t0_, t1());
}

Vector TimeTable::value(double t) const {
    t = check_range(t);
    if (splines_) {
        Vector out(dim());
        for (Index i = 0; i < dim(); ++i) {
            out(i) = splines_->per_component[static_cast<std::size_t>(i)](t);
        }
        return out;
    }
    if (count() == 1) {
        return samples_.col(0);
    }
    const double s = (t - t0_) / dt_;
    const Index k = std::min<Index>(static_cast<Index>(s), count() - 2);
    const double w = s - static_cast<double>(k);
    return (1 - w) * samples_.col(k) + w * samples_.col(k + 1);
}

Vector TimeTable::derivative(double t) const {
    t = check_range(t);
    if (splines_) {
        Vector out(dim());
        for (Index i = 0; i < dim(); ++i) {
            out(i) = splines_->per_component[static_cast<std::size_t>(i)].prime(t);
        }
        return out;
    }
    if (count() == 1) {
        return Vector::Zero(dim());
    }
    const double s = (t - t0_) / dt_;
    const Index k = std::min<Index>(static_cast<Index>(s), count() - 2);
    return (samples_.col(k + 1) - samples_.col(k)) / dt_;
}

}  // namespace phtrack
