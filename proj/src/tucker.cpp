#include "rrmar/tucker.hpp"

#include <Eigen/SVD>
#include <stdexcept>
#include <string>

namespace rrmar {

bool validate_ranks(const std::vector<Index>& ranks, const std::vector<Index>& dims) {
    if (ranks.size() != dims.size()) {
        throw std::invalid_argument("validate_ranks: ranks and dims must have equal length");
    }
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        if (ranks[i] < 1 || dims[i] < 1) {
            throw std::invalid_argument("validate_ranks: entries must be positive");
        }
    }
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        Index other = 1;
        for (std::size_t j = 0; j < ranks.size(); ++j) {
            if (j != i) other *= ranks[j];
        }
        if (ranks[i] > dims[i] || ranks[i] > other) return false;
    }
    return true;
}

Matrix leading_left_singular_vectors(const Matrix& m, Index r) {
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
    if (r > svd.matrixU().cols()) {
        throw std::invalid_argument("requested more singular vectors than available");
    }
    Matrix u = svd.matrixU().leftCols(r);
    for (Index j = 0; j < u.cols(); ++j) {
        Index imax = 0;
        u.col(j).cwiseAbs().maxCoeff(&imax);
        if (u(imax, j) < 0.0) u.col(j) = -u.col(j);
    }
    return u;
}

TuckerFactorization hosvd(const DenseTensor& x, const std::vector<Index>& ranks) {
    if (static_cast<Index>(ranks.size()) != x.order()) {
        throw std::invalid_argument("hosvd: rank list length must equal tensor order");
    }
    if (!validate_ranks(ranks, x.shape())) {
        throw std::invalid_argument("hosvd: infeasible Tucker ranks");
    }

    TuckerFactorization f;
    f.factors.reserve(ranks.size());
    for (Index k = 0; k < x.order(); ++k) {
        f.factors.push_back(leading_left_singular_vectors(unfold(x, k), ranks[static_cast<std::size_t>(k)]));
    }
    f.core = x;
    for (Index k = 0; k < x.order(); ++k) {
        f.core = mode_product(f.core, f.factors[static_cast<std::size_t>(k)].transpose(), k);
    }
    return f;
}

DenseTensor reconstruct(const TuckerFactorization& f) {
    if (static_cast<Index>(f.factors.size()) != f.core.order()) {
        throw std::invalid_argument("reconstruct: factor count must equal core order");
    }
    DenseTensor out = f.core;
    for (Index k = 0; k < out.order(); ++k) {
        const Matrix& u = f.factors[static_cast<std::size_t>(k)];
        if (u.cols() != out.dim(k)) {
            throw std::invalid_argument("reconstruct: factor " + std::to_string(k) +
                                        " does not match core dimension");
        }
        out = mode_product(out, u, k);
    }
    return out;
}

Index param_count(const std::array<Index, 4>& ranks, const std::array<Index, 2>& dims, Index p) {
    if (p < 1) throw std::invalid_argument("param_count: lag order must be >= 1");
    const std::vector<Index> r(ranks.begin(), ranks.end());
    const std::vector<Index> d = {dims[0], dims[1], dims[0], dims[1]};
    if (!validate_ranks(r, d)) throw std::invalid_argument("param_count: infeasible ranks");

    Index core = p;
    for (Index ri : ranks) core *= ri;
    Index factors = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        const Index n = d[i];
        factors += ranks[i] * (n - ranks[i]);
    }
    return core + factors;
}

}  // namespace rrmar
