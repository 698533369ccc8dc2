#pragma once

// Brute-force oracles for cross-checking the library. Plain loops, naive
// accumulation, no shared code with the implementation under test.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <random>

namespace oracle {

inline Eigen::VectorXd row_sums(const Eigen::MatrixXd& x) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(x.rows());
    for (Eigen::Index n = 0; n < x.rows(); ++n)
        for (Eigen::Index k = 0; k < x.cols(); ++k) a[n] += x(n, k);
    return a;
}

inline Eigen::VectorXd col_sums(const Eigen::MatrixXd& x) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(x.cols());
    for (Eigen::Index k = 0; k < x.cols(); ++k)
        for (Eigen::Index n = 0; n < x.rows(); ++n) c[k] += x(n, k);
    return c;
}

inline Eigen::VectorXi row_degrees(const Eigen::MatrixXd& x, double threshold = 0.0) {
    Eigen::VectorXi d = Eigen::VectorXi::Zero(x.rows());
    for (Eigen::Index n = 0; n < x.rows(); ++n)
        for (Eigen::Index k = 0; k < x.cols(); ++k)
            if (x(n, k) > threshold) ++d[n];
    return d;
}

inline Eigen::VectorXi col_degrees(const Eigen::MatrixXd& x, double threshold = 0.0) {
    Eigen::VectorXi d = Eigen::VectorXi::Zero(x.cols());
    for (Eigen::Index k = 0; k < x.cols(); ++k)
        for (Eigen::Index n = 0; n < x.rows(); ++n)
            if (x(n, k) > threshold) ++d[k];
    return d;
}

inline Eigen::MatrixXd weights(const Eigen::MatrixXd& x) {
    Eigen::MatrixXd w(x.rows(), x.cols());
    Eigen::VectorXd a = row_sums(x);
    for (Eigen::Index n = 0; n < x.rows(); ++n)
        for (Eigen::Index k = 0; k < x.cols(); ++k) w(n, k) = x(n, k) / a[n];
    return w;
}

// Gamma_n = sum_k (sum_m A_m W_{m,k}) l_k W_{n,k}, the literal double loop.
inline Eigen::VectorXd gamma(const Eigen::MatrixXd& x, const Eigen::VectorXd& ell) {
    Eigen::MatrixXd w = weights(x);
    Eigen::VectorXd a = row_sums(x);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(x.rows());
    for (Eigen::Index n = 0; n < x.rows(); ++n)
        for (Eigen::Index k = 0; k < x.cols(); ++k) {
            double col = 0.0;
            for (Eigen::Index m = 0; m < x.rows(); ++m) col += a[m] * w(m, k);
            g[n] += col * ell[k] * w(n, k);
        }
    return g;
}

inline Eigen::VectorXd portfolio_returns(const Eigen::MatrixXd& x, const Eigen::VectorXd& eps) {
    Eigen::MatrixXd w = weights(x);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(x.rows());
    for (Eigen::Index n = 0; n < x.rows(); ++n)
        for (Eigen::Index k = 0; k < x.cols(); ++k) r[n] += w(n, k) * eps[k];
    return r;
}

// S_n = Gamma_n (A_n / E) B_n r_n with sheet sizes/equities as given.
inline Eigen::VectorXd systemicness(const Eigen::MatrixXd& x, const Eigen::VectorXd& sizes,
                                    const Eigen::VectorXd& equities, const Eigen::VectorXd& ell,
                                    const Eigen::VectorXd& eps) {
    Eigen::VectorXd g = gamma(x, ell);
    Eigen::VectorXd r = portfolio_returns(x, eps);
    double e = 0.0;
    for (Eigen::Index n = 0; n < equities.size(); ++n) e += equities[n];
    Eigen::VectorXd s(x.rows());
    for (Eigen::Index n = 0; n < x.rows(); ++n) {
        double b = (sizes[n] - equities[n]) / equities[n];
        s[n] = g[n] * (sizes[n] / e) * b * r[n];
    }
    return s;
}

// IV_n = (1 + B_n) sum_k l_k W_{n,k} sum_m W_{m,k} A_m B_m r_m, triple loop.
inline Eigen::VectorXd indirect_vulnerability(const Eigen::MatrixXd& x,
                                              const Eigen::VectorXd& sizes,
                                              const Eigen::VectorXd& equities,
                                              const Eigen::VectorXd& ell,
                                              const Eigen::VectorXd& eps) {
    Eigen::MatrixXd w = weights(x);
    Eigen::VectorXd r = portfolio_returns(x, eps);
    Eigen::VectorXd iv = Eigen::VectorXd::Zero(x.rows());
    for (Eigen::Index n = 0; n < x.rows(); ++n) {
        double bn = (sizes[n] - equities[n]) / equities[n];
        double outer = 0.0;
        for (Eigen::Index k = 0; k < x.cols(); ++k) {
            double inner = 0.0;
            for (Eigen::Index m = 0; m < x.rows(); ++m) {
                double bm = (sizes[m] - equities[m]) / equities[m];
                inner += w(m, k) * sizes[m] * bm * r[m];
            }
            outer += ell[k] * w(n, k) * inner;
        }
        iv[n] = (1.0 + bn) * outer;
    }
    return iv;
}

// Truncated-summation moments of a pmf over 0..x_max.
struct PmfMoments {
    double total = 0.0;
    double mean = 0.0;
    double variance = 0.0;
};

inline PmfMoments pmf_moments(const std::function<double(long long)>& pmf, long long x_max) {
    PmfMoments m;
    double second = 0.0;
    for (long long x = 0; x <= x_max; ++x) {
        double p = pmf(x);
        m.total += p;
        m.mean += static_cast<double>(x) * p;
        second += static_cast<double>(x) * static_cast<double>(x) * p;
    }
    m.variance = second - m.mean * m.mean;
    return m;
}

// Random non-negative matrix helpers for property tests (test-local RNG,
// fixed seeds at call sites).
inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                                     double max_value = 100.0, double zero_prob = 0.0) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Eigen::MatrixXd x(rows, cols);
    for (Eigen::Index n = 0; n < rows; ++n)
        for (Eigen::Index k = 0; k < cols; ++k) {
            if (zero_prob > 0.0 && uni(rng) < zero_prob) {
                x(n, k) = 0.0;
            } else {
                x(n, k) = std::floor(uni(rng) * max_value) + 1.0;
            }
        }
    return x;
}

}  // namespace oracle
