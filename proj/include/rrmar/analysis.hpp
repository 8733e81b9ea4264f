#pragma once

#include <array>
#include <optional>
#include <vector>

#include "rrmar/model.hpp"
#include "rrmar/series.hpp"
#include "rrmar/tensor.hpp"

namespace rrmar {

// Orthonormal basis of the orthogonal complement of span(u); zero-width when
// u is square (full rank means no co-movement relation).
Matrix null_complement(const Matrix& u);

// Column-reduces a null basis against a reference (pivot) row. A single
// column is scaled so its pivot entry is one; a multi-column basis is
// post-multiplied so the non-pivot rows carry an identity block and the pivot
// row the co-movement scales.
Matrix normalize_null(const Matrix& basis, Index pivot);

enum class Side { Rows, Cols };

// White-noise combinations delta^T Y_t (rows side) or Y_t gamma (cols side);
// nullopt when the requested side is full rank.
std::optional<DenseTensor> sccf_series(const RRMARModel& m, const MatrixSeries& y, Side side);

// U1^T Y_t U2 for every t, shape r1 x r2 x T.
DenseTensor response_factors(const RRMARModel& m, const MatrixSeries& y);

// U3^T Y_{t-1-l} U4 over the usable window, shape r3 x r4 x p x (T-p).
DenseTensor predictor_factors(const RRMARModel& m, const MatrixSeries& y);

// The p factor-VAR coefficient matrices G_[2],j of shape r1 r2 x r3 r4.
std::vector<Matrix> factor_var(const RRMARModel& m);

// U U^T for orthonormal-column U: the rotation-invariant subspace summary.
Matrix projection(const Matrix& u);

// Sample autocorrelations of a univariate series at lags 1..max_lag.
std::vector<double> autocorrelations(const Vector& series, Index max_lag);

struct ComovementReport {
    Matrix delta;        // N1 x (N1 - r1), zero-width at full rank
    Matrix gamma;        // N2 x (N2 - r2)
    Matrix delta_star;   // normalized variant (empty when delta is)
    Matrix gamma_star;
    Index delta_pivot = -1;
    Index gamma_pivot = -1;
    DenseTensor response_factor_series;   // r1 x r2 x T
    DenseTensor predictor_factor_series;  // r3 x r4 x p x (T-p)
    std::array<Matrix, 4> projections;
    std::vector<Matrix> factor_var_cores;
};

// Full post-estimation report. Negative pivots select the row with the
// largest-magnitude entry of the corresponding basis.
ComovementReport comovement_report(const RRMARModel& m, const MatrixSeries& y,
                                   Index pivot_row = -1, Index pivot_col = -1);

}  // namespace rrmar
