#include "firenet/core.hpp"

#include "firenet/numeric.hpp"

namespace firenet {

Vector row_sums(const Matrix& entries) {
    Vector a(entries.rows());
    std::vector<double> buf(static_cast<std::size_t>(entries.cols()));
    for (Eigen::Index n = 0; n < entries.rows(); ++n) {
        for (Eigen::Index k = 0; k < entries.cols(); ++k)
            buf[static_cast<std::size_t>(k)] = entries(n, k);
        a[n] = pairwise_sum(buf);
    }
    return a;
}

Vector col_sums(const Matrix& entries) {
    Vector c(entries.cols());
    std::vector<double> buf(static_cast<std::size_t>(entries.rows()));
    for (Eigen::Index k = 0; k < entries.cols(); ++k) {
        for (Eigen::Index n = 0; n < entries.rows(); ++n)
            buf[static_cast<std::size_t>(n)] = entries(n, k);
        c[k] = pairwise_sum(buf);
    }
    return c;
}

StrengthSequences marginals(const HoldingsMatrix& x) {
    return StrengthSequences(row_sums(x.entries()), col_sums(x.entries()));
}

DegreeSequences degrees(const HoldingsMatrix& x, double threshold) {
    if (!(threshold >= 0.0))
        throw ValidationError("degree threshold must be non-negative");
    const Matrix& m = x.entries();
    IntVector row(m.rows()), col(m.cols());
    row.setZero();
    col.setZero();
    for (Eigen::Index n = 0; n < m.rows(); ++n)
        for (Eigen::Index k = 0; k < m.cols(); ++k)
            if (m(n, k) > threshold) {
                ++row[n];
                ++col[k];
            }
    return DegreeSequences(std::move(row), std::move(col));
}

std::vector<std::size_t> zero_rows(const HoldingsMatrix& x) {
    std::vector<std::size_t> out;
    Vector a = row_sums(x.entries());
    for (Eigen::Index n = 0; n < a.size(); ++n)
        if (a[n] == 0.0) out.push_back(static_cast<std::size_t>(n));
    return out;
}

Matrix weights(const HoldingsMatrix& x) {
    auto zeros = zero_rows(x);
    if (!zeros.empty()) throw ZeroRowError(zeros);
    const Matrix& m = x.entries();
    Vector a = row_sums(m);
    Matrix w(m.rows(), m.cols());
    for (Eigen::Index n = 0; n < m.rows(); ++n)
        w.row(n) = m.row(n) / a[n];
    return w;
}

}  // namespace firenet
