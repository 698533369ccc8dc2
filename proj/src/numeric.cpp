#include "firenet/numeric.hpp"

#include <algorithm>
#include <stdexcept>

namespace firenet {

namespace {

constexpr std::size_t kPairwiseBlock = 16;

double pairwise_rec(const double* x, std::size_t n) {
    if (n <= kPairwiseBlock) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    std::size_t half = n / 2;
    return pairwise_rec(x, half) + pairwise_rec(x + half, n - half);
}

}  // namespace

double pairwise_sum(std::span<const double> x) {
    return pairwise_rec(x.data(), x.size());
}

double quantile_r7_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile of empty range");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile prob outside [0,1]");
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    double h = static_cast<double>(n - 1) * p;
    double fl = std::floor(h);
    auto lo = static_cast<std::size_t>(fl);
    if (lo >= n - 1) return sorted[n - 1];
    double frac = h - fl;
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace firenet
