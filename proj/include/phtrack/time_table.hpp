#pragma once

#include "phtrack/types.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace phtrack {

/// Vector-valued function of time sampled on a uniform grid and interpolated
/// by cubic B-splines, one per component. Immutable; copies share storage.
class TimeTable {
public:
    TimeTable() = default;
    /// samples: dim × count, column k at t0 + k·dt.
    TimeTable(double t0, double dt, Matrix samples);

    static TimeTable tabulate(const std::function<Vector(double)>& f, double t0, double t1,
                              double dt);

    Vector value(double t) const;
    Vector derivative(double t) const;

    double t0() const { return t0_; }
    double t1() const { return t0_ + dt_ * static_cast<double>(count() - 1); }
    double dt() const { return dt_; }
    Index dim() const { return samples_.rows(); }
    Index count() const { return samples_.cols(); }
    const Matrix& samples() const { return samples_; }
    bool empty() const { return samples_.cols() == 0; }

private:
    struct Splines;
    double check_range(double t) const;

    double t0_ = 0.0;
    double dt_ = 1.0;
    Matrix samples_;
    std::shared_ptr<const Splines> splines_;
};

}  // namespace phtrack
