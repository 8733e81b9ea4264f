#pragma once

#include <array>
#include <vector>

#include "rrmar/tensor.hpp"

namespace rrmar {

// Tucker factorization in HOSVD form: orthonormal factor columns, core with
// diagonal per-mode Gram matrices when the ranks are exact.
struct TuckerFactorization {
    DenseTensor core;             // shape (r_0, ..., r_{K-1})
    std::vector<Matrix> factors;  // factor k has shape N_k x r_k
};

// Tucker rank feasibility: r_i <= min(N_i, prod_{j != i} r_j) for all i.
bool validate_ranks(const std::vector<Index>& ranks, const std::vector<Index>& dims);

// Truncated HOSVD: factor k holds the top r_k left singular vectors of the
// mode-k unfolding (sign-fixed so each vector's largest-magnitude entry is
// positive); the core is the input projected onto the factors.
TuckerFactorization hosvd(const DenseTensor& x, const std::vector<Index>& ranks);

// core x_0 U_0 x_1 U_1 ... x_{K-1} U_{K-1}.
DenseTensor reconstruct(const TuckerFactorization& f);

// Free-parameter count of an RR-MAR coefficient with the given Tucker ranks:
// core entries over p lags plus the Grassmannian dimension of each factor.
Index param_count(const std::array<Index, 4>& ranks, const std::array<Index, 2>& dims, Index p);

// Top-r left singular vectors of m, sign-fixed (first occurrence of the
// largest-magnitude entry made positive).
Matrix leading_left_singular_vectors(const Matrix& m, Index r);

}  // namespace rrmar
