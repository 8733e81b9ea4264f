#pragma once

#include <array>
#include <vector>

#include "rrmar/model.hpp"
#include "rrmar/series.hpp"
#include "rrmar/tensor.hpp"

namespace rrmar {

struct FitConfig {
    double step_size = 1e-3;
    double tolerance = 1e-3;   // relative loss-change convergence threshold
    int max_iterations = 500;
};

struct FitResult {
    RRMARModel model;
    std::vector<double> loss_trace;  // loss at the initial point, then one entry per sweep
    Index iterations = 0;
    bool converged = false;
};

// Gradient blocks of the least-squares objective.
struct Gradients {
    Matrix u1, u2, u3, u4;
    DenseTensor core;  // shape (r1, r2, r3, r4, p)
};

// Moment form of the objective for one (series, lag order) pair. Loss and
// gradient evaluations cost O((N1 N2 p)^2) independent of T once built.
class FitProblem {
public:
    FitProblem(const MatrixSeries& y, Index p);
    FitProblem(const DenseTensor& responses, const DenseTensor& predictors);

    Index n1() const { return n1_; }
    Index n2() const { return n2_; }
    Index p() const { return p_; }
    Index effective_samples() const { return t_eff_; }

    // (1/2T') sum_t ||vec(Y_t) - A vec(X_t)||^2, clamped at zero.
    double loss_of(const Matrix& a) const;

    // (1/T') sum_t (A vec(X_t) - vec(Y_t)) vec(X_t)^T  =  A Sxx - Syx.
    Matrix moment_of(const Matrix& a) const;

    // Residual matrix A X - Y (columns are vec residuals per usable t).
    Matrix residual_matrix(const Matrix& a) const;

    // Unrestricted stacked VAR(p) least-squares coefficient (N1N2 x N1N2p).
    // Throws IllConditionedError on a rank-deficient Gram matrix and
    // std::invalid_argument when T - p <= N1 N2 p.
    Matrix ols_coefficient() const;

    const Matrix& sxx() const { return sxx_; }
    const Matrix& syx() const { return syx_; }

private:
    void finish_setup();

    Index n1_ = 0, n2_ = 0, p_ = 0, t_eff_ = 0;
    Matrix x_, y_;    // (N1N2p) x T', (N1N2) x T'
    Matrix sxx_, syx_;
    double syy_ = 0.0;
};

// Least-squares loss (1/2T') over the usable window t = p..T-1.
double loss(const RRMARModel& m, const MatrixSeries& y);
double loss(const RRMARModel& m, const DenseTensor& responses, const DenseTensor& predictors);

// Residual-by-predictor moment tensor (fitted minus observed, averaged),
// shape N1 x N2 x N1 x N2 x p.
DenseTensor residual_moment(const RRMARModel& m, const MatrixSeries& y);
DenseTensor residual_moment(const RRMARModel& m, const DenseTensor& responses,
                            const DenseTensor& predictors);

// Analytic gradients of the loss at m.
Gradients gradients(const RRMARModel& m, const MatrixSeries& y);
Gradients gradients(const RRMARModel& m, const DenseTensor& responses,
                    const DenseTensor& predictors);

// Gradients as a function of the moment tensor alone (linear in it).
Gradients gradients_from_moment(const RRMARModel& m, const DenseTensor& moment);

// HOSVD of the unrestricted least-squares coefficient at the requested ranks
// (identity on the lag mode).
RRMARModel ols_init(const MatrixSeries& y, const std::array<Index, 4>& ranks, Index p);

// Mode bases of an OLS coefficient, reusable across rank candidates.
struct CoefficientBases {
    DenseTensor coeff;             // order-5 (N1, N2, N1, N2, p)
    std::array<Matrix, 4> bases;   // full sign-fixed left singular bases per mode
};
CoefficientBases coefficient_bases(const Matrix& ols_coeff, Index n1, Index n2, Index p);

// Truncates precomputed bases to the given ranks and projects the core.
RRMARModel init_from_bases(const CoefficientBases& cb, const std::array<Index, 4>& ranks);

// Sequential gradient descent (U1 -> U2 -> U3 -> U4 -> core, each with the
// freshest previous blocks), followed by per-mode re-orthonormalization of the
// converged coefficient and a core re-projection.
FitResult fit(const MatrixSeries& y, const std::array<Index, 4>& ranks, Index p,
              const FitConfig& config = {});

// Same loop on a prebuilt problem and starting point.
FitResult fit_problem(const FitProblem& d, RRMARModel init, const FitConfig& config);

}  // namespace rrmar
