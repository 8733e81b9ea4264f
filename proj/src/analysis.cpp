#include "rrmar/analysis.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rrmar/errors.hpp"

namespace rrmar {

namespace {

void check_orthonormal(const Matrix& u, const char* who) {
    const Matrix gram = u.transpose() * u;
    const double err = (gram - Matrix::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
    if (err > 1e-8) {
        throw std::invalid_argument(std::string(who) + ": matrix does not have orthonormal columns");
    }
}

}  // namespace

Matrix null_complement(const Matrix& u) {
    if (u.rows() < u.cols()) throw std::invalid_argument("null_complement: more columns than rows");
    check_orthonormal(u, "null_complement");
    const Index n = u.rows(), r = u.cols();
    if (r == n) return Matrix(n, 0);

    Eigen::JacobiSVD<Matrix> svd(u, Eigen::ComputeFullU);
    Matrix comp = svd.matrixU().rightCols(n - r);
    for (Index j = 0; j < comp.cols(); ++j) {
        Index imax = 0;
        comp.col(j).cwiseAbs().maxCoeff(&imax);
        if (comp(imax, j) < 0.0) comp.col(j) = -comp.col(j);
    }
    return comp;
}

namespace {

// Greedy ascending choice of q non-pivot rows forming an invertible block.
std::vector<Index> pivot_block_rows(const Matrix& basis, Index pivot) {
    const Index n = basis.rows(), q = basis.cols();
    std::vector<Index> rows;
    Matrix block(q, q);
    Index filled = 0;
    for (Index i = 0; i < n && filled < q; ++i) {
        if (i == pivot) continue;
        block.row(filled) = basis.row(i);
        Eigen::ColPivHouseholderQR<Matrix> qr(block.topRows(filled + 1));
        if (qr.rank() == filled + 1) {
            rows.push_back(i);
            ++filled;
        }
    }
    if (filled < q) rows.clear();
    return rows;
}

bool pivot_usable(const Matrix& basis, Index pivot) {
    if (basis.cols() == 1) {
        return std::abs(basis(pivot, 0)) > 1e-12 * basis.col(0).cwiseAbs().maxCoeff();
    }
    return !pivot_block_rows(basis, pivot).empty();
}

std::string usable_pivots_message(const Matrix& basis) {
    std::string msg = "usable pivot rows:";
    bool any = false;
    for (Index i = 0; i < basis.rows(); ++i) {
        if (pivot_usable(basis, i)) {
            msg += " " + std::to_string(i);
            any = true;
        }
    }
    if (!any) msg += " none";
    return msg;
}

}  // namespace

Matrix normalize_null(const Matrix& basis, Index pivot) {
    const Index n = basis.rows(), q = basis.cols();
    if (q == 0) return basis;
    if (pivot < 0 || pivot >= n) throw std::invalid_argument("normalize_null: pivot out of range");

    if (q == 1) {
        const double v = basis(pivot, 0);
        if (std::abs(v) <= 1e-12 * basis.col(0).cwiseAbs().maxCoeff()) {
            throw PivotError("normalize_null: pivot entry is zero; " + usable_pivots_message(basis));
        }
        return basis / v;
    }

    const std::vector<Index> rows = pivot_block_rows(basis, pivot);
    if (rows.empty()) {
        throw PivotError("normalize_null: singular pivot block; " + usable_pivots_message(basis));
    }
    Matrix block(q, q);
    for (Index k = 0; k < q; ++k) block.row(k) = basis.row(rows[static_cast<std::size_t>(k)]);
    return basis * block.inverse();
}

std::optional<DenseTensor> sccf_series(const RRMARModel& m, const MatrixSeries& y, Side side) {
    if (y.n1() != m.n1() || y.n2() != m.n2()) {
        throw std::invalid_argument("sccf_series: series does not match model dimensions");
    }
    const Index t_len = y.length();
    if (side == Side::Rows) {
        const Matrix delta = null_complement(m.u1);
        if (delta.cols() == 0) return std::nullopt;
        DenseTensor out({delta.cols(), y.n2(), t_len});
        for (Index t = 0; t < t_len; ++t) {
            const Matrix v = delta.transpose() * y.observation(t);
            for (Index j = 0; j < v.cols(); ++j) {
                for (Index i = 0; i < v.rows(); ++i) out({i, j, t}) = v(i, j);
            }
        }
        return out;
    }
    const Matrix gamma = null_complement(m.u2);
    if (gamma.cols() == 0) return std::nullopt;
    DenseTensor out({y.n1(), gamma.cols(), t_len});
    for (Index t = 0; t < t_len; ++t) {
        const Matrix v = y.observation(t) * gamma;
        for (Index j = 0; j < v.cols(); ++j) {
            for (Index i = 0; i < v.rows(); ++i) out({i, j, t}) = v(i, j);
        }
    }
    return out;
}

DenseTensor response_factors(const RRMARModel& m, const MatrixSeries& y) {
    if (y.n1() != m.n1() || y.n2() != m.n2()) {
        throw std::invalid_argument("response_factors: series does not match model dimensions");
    }
    const Index t_len = y.length();
    DenseTensor out({m.ranks[0], m.ranks[1], t_len});
    for (Index t = 0; t < t_len; ++t) {
        const Matrix f = m.u1.transpose() * y.observation(t) * m.u2;
        for (Index j = 0; j < f.cols(); ++j) {
            for (Index i = 0; i < f.rows(); ++i) out({i, j, t}) = f(i, j);
        }
    }
    return out;
}

DenseTensor predictor_factors(const RRMARModel& m, const MatrixSeries& y) {
    if (y.n1() != m.n1() || y.n2() != m.n2()) {
        throw std::invalid_argument("predictor_factors: series does not match model dimensions");
    }
    StackedLags lags = stack_lags(y, m.p);
    const Index s_len = lags.predictors.dim(3);
    DenseTensor out({m.ranks[2], m.ranks[3], m.p, s_len});
    Matrix slice(m.n1(), m.n2());
    for (Index s = 0; s < s_len; ++s) {
        for (Index l = 0; l < m.p; ++l) {
            for (Index j = 0; j < m.n2(); ++j) {
                for (Index i = 0; i < m.n1(); ++i) slice(i, j) = lags.predictors({i, j, l, s});
            }
            const Matrix f = m.u3.transpose() * slice * m.u4;
            for (Index j = 0; j < f.cols(); ++j) {
                for (Index i = 0; i < f.rows(); ++i) out({i, j, l, s}) = f(i, j);
            }
        }
    }
    return out;
}

std::vector<Matrix> factor_var(const RRMARModel& m) {
    const Matrix g = m.wide_core();
    const Index r34 = m.ranks[2] * m.ranks[3];
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(m.p));
    for (Index i = 0; i < m.p; ++i) out.push_back(g.middleCols(i * r34, r34));
    return out;
}

Matrix projection(const Matrix& u) {
    check_orthonormal(u, "projection");
    return u * u.transpose();
}

std::vector<double> autocorrelations(const Vector& series, Index max_lag) {
    const Index n = series.size();
    if (n < 2 || max_lag < 1 || max_lag >= n) {
        throw std::invalid_argument("autocorrelations: invalid series length or lag");
    }
    const double mean = series.mean();
    const Vector centered = series.array() - mean;
    const double denom = centered.squaredNorm();
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(max_lag));
    for (Index lag = 1; lag <= max_lag; ++lag) {
        double acc = 0.0;
        for (Index t = lag; t < n; ++t) acc += centered[t] * centered[t - lag];
        out.push_back(denom > 0.0 ? acc / denom : 0.0);
    }
    return out;
}

namespace {

Index default_pivot(const Matrix& basis) {
    Index row = 0, col = 0;
    basis.cwiseAbs().maxCoeff(&row, &col);
    return row;
}

}  // namespace

ComovementReport comovement_report(const RRMARModel& m, const MatrixSeries& y, Index pivot_row,
                                   Index pivot_col) {
    ComovementReport rep;
    rep.delta = null_complement(m.u1);
    rep.gamma = null_complement(m.u2);
    if (rep.delta.cols() > 0) {
        rep.delta_pivot = pivot_row >= 0 ? pivot_row : default_pivot(rep.delta);
        rep.delta_star = normalize_null(rep.delta, rep.delta_pivot);
    }
    if (rep.gamma.cols() > 0) {
        rep.gamma_pivot = pivot_col >= 0 ? pivot_col : default_pivot(rep.gamma);
        rep.gamma_star = normalize_null(rep.gamma, rep.gamma_pivot);
    }
    rep.response_factor_series = response_factors(m, y);
    rep.predictor_factor_series = predictor_factors(m, y);
    rep.projections = {projection(m.u1), projection(m.u2), projection(m.u3), projection(m.u4)};
    rep.factor_var_cores = factor_var(m);
    return rep;
}

}  // namespace rrmar
