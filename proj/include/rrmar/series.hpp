#pragma once

#include <string>
#include <vector>

#include "rrmar/tensor.hpp"

namespace rrmar {

// A T-length sequence of N1 x N2 observation matrices with axis labels.
class MatrixSeries {
public:
    MatrixSeries() = default;

    // values has shape N1 x N2 x T; labels default to row1.., col1.. when empty.
    MatrixSeries(DenseTensor values, std::vector<std::string> row_labels = {},
                 std::vector<std::string> col_labels = {});

    Index n1() const { return values_.dim(0); }
    Index n2() const { return values_.dim(1); }
    Index length() const { return values_.dim(2); }

    const DenseTensor& values() const { return values_; }
    const std::vector<std::string>& row_labels() const { return row_labels_; }
    const std::vector<std::string>& col_labels() const { return col_labels_; }
    bool demeaned() const { return demeaned_; }

    double at(Index i, Index j, Index t) const { return values_({i, j, t}); }
    double& at(Index i, Index j, Index t) { return values_({i, j, t}); }

    // Observation matrix Y_t (0-based t).
    Matrix observation(Index t) const;

    // vec(Y_t), column-major.
    Vector vec_observation(Index t) const;

    // Subtracts the sample mean of every (i, j) series in place.
    void demean();

    // Applies row/column permutations (new[i] = old[perm[i]]), relabeling accordingly.
    MatrixSeries permuted(const std::vector<Index>& row_perm,
                          const std::vector<Index>& col_perm) const;

private:
    DenseTensor values_;
    std::vector<std::string> row_labels_;
    std::vector<std::string> col_labels_;
    bool demeaned_ = false;
};

}  // namespace rrmar
