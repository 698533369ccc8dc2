#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <span>

namespace firenet {

// Pairwise (cascade) summation. Used for every sum that feeds a reported
// metric so that results are reproducible and independent of how callers
// batch their work: the grouping depends only on the element count.
double pairwise_sum(std::span<const double> x);

inline double pairwise_sum(const Eigen::VectorXd& v) {
    return pairwise_sum(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

// R-7 quantile (linear interpolation of order statistics) on an ascending
// sorted range. p in [0,1].
double quantile_r7_sorted(std::span<const double> sorted, double p);

inline double rel_diff(double a, double b) {
    double scale = std::max(std::abs(a), std::abs(b));
    if (scale == 0.0) return 0.0;
    return std::abs(a - b) / scale;
}

// Relative residual against a reference value; falls back to absolute when
// the reference is zero.
inline double rel_residual(double value, double target) {
    double d = std::abs(value - target);
    return target != 0.0 ? d / std::abs(target) : d;
}

}  // namespace firenet
