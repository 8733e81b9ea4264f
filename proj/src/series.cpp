#include "rrmar/series.hpp"

#include <cmath>
#include <stdexcept>

namespace rrmar {

namespace {

std::vector<std::string> default_labels(const std::string& prefix, Index n) {
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i + 1));
    return out;
}

}  // namespace

MatrixSeries::MatrixSeries(DenseTensor values, std::vector<std::string> row_labels,
                           std::vector<std::string> col_labels)
    : values_(std::move(values)), row_labels_(std::move(row_labels)),
      col_labels_(std::move(col_labels)) {
    if (values_.order() != 3) {
        throw std::invalid_argument("MatrixSeries values must be an N1 x N2 x T tensor");
    }
    if (!values_.data().allFinite()) {
        throw std::invalid_argument("MatrixSeries values contain NaN or infinite entries");
    }
    if (row_labels_.empty()) row_labels_ = default_labels("row", n1());
    if (col_labels_.empty()) col_labels_ = default_labels("col", n2());
    if (static_cast<Index>(row_labels_.size()) != n1() ||
        static_cast<Index>(col_labels_.size()) != n2()) {
        throw std::invalid_argument("MatrixSeries label lengths do not match dimensions");
    }
}

Matrix MatrixSeries::observation(Index t) const {
    if (t < 0 || t >= length()) throw std::invalid_argument("observation index out of range");
    Matrix out(n1(), n2());
    for (Index j = 0; j < n2(); ++j) {
        for (Index i = 0; i < n1(); ++i) out(i, j) = values_({i, j, t});
    }
    return out;
}

Vector MatrixSeries::vec_observation(Index t) const {
    if (t < 0 || t >= length()) throw std::invalid_argument("observation index out of range");
    // Entries of slice t are contiguous: linear offset t * n1 * n2.
    return values_.data().segment(t * n1() * n2(), n1() * n2());
}

void MatrixSeries::demean() {
    const Index t_len = length();
    for (Index j = 0; j < n2(); ++j) {
        for (Index i = 0; i < n1(); ++i) {
            double mean = 0.0;
            for (Index t = 0; t < t_len; ++t) mean += values_({i, j, t});
            mean /= static_cast<double>(t_len);
            for (Index t = 0; t < t_len; ++t) values_({i, j, t}) -= mean;
        }
    }
    demeaned_ = true;
}

MatrixSeries MatrixSeries::permuted(const std::vector<Index>& row_perm,
                                    const std::vector<Index>& col_perm) const {
    if (static_cast<Index>(row_perm.size()) != n1() ||
        static_cast<Index>(col_perm.size()) != n2()) {
        throw std::invalid_argument("permutation lengths do not match dimensions");
    }
    DenseTensor values({n1(), n2(), length()});
    std::vector<std::string> rl(static_cast<std::size_t>(n1()));
    std::vector<std::string> cl(static_cast<std::size_t>(n2()));
    for (Index i = 0; i < n1(); ++i) rl[static_cast<std::size_t>(i)] = row_labels_[static_cast<std::size_t>(row_perm[static_cast<std::size_t>(i)])];
    for (Index j = 0; j < n2(); ++j) cl[static_cast<std::size_t>(j)] = col_labels_[static_cast<std::size_t>(col_perm[static_cast<std::size_t>(j)])];
    for (Index t = 0; t < length(); ++t) {
        for (Index j = 0; j < n2(); ++j) {
            for (Index i = 0; i < n1(); ++i) {
                values({i, j, t}) = values_({row_perm[static_cast<std::size_t>(i)],
                                             col_perm[static_cast<std::size_t>(j)], t});
            }
        }
    }
    MatrixSeries out(std::move(values), std::move(rl), std::move(cl));
    out.demeaned_ = demeaned_;
    return out;
}

}  // namespace rrmar
