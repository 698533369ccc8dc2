#pragma once

#include "firenet/types.hpp"

namespace firenet {

// Row and column sums of X. Throws ValidationError (via StrengthSequences)
// when the matrix total is zero.
StrengthSequences marginals(const HoldingsMatrix& x);

// Degree sequences of the binary projection; entries strictly greater than
// `threshold` count as edges.
DegreeSequences degrees(const HoldingsMatrix& x, double threshold = 0.0);

// Portfolio weights W_{n,k} = X_{n,k} / A_n. Throws ZeroRowError listing
// every bank with zero total holdings.
Matrix weights(const HoldingsMatrix& x);

// Indices of banks whose entire row is zero.
std::vector<std::size_t> zero_rows(const HoldingsMatrix& x);

// Row sums computed with the same summation scheme as marginals(), usable
// when the matrix total may be zero.
Vector row_sums(const Matrix& entries);
Vector col_sums(const Matrix& entries);

}  // namespace firenet
