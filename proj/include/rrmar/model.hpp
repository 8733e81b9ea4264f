#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "rrmar/series.hpp"
#include "rrmar/tensor.hpp"

namespace rrmar {

// Reduced-rank matrix autoregression: per lag i the coefficient tensor is
// core_i x_0 U1 x_1 U2 x_2 U3 x_3 U4, with the factor matrices shared across lags.
struct RRMARModel {
    std::array<Index, 4> ranks{};     // (r1, r2, r3, r4)
    Index p = 1;                      // lag order
    Matrix u1, u2, u3, u4;            // N1 x r1, N2 x r2, N1 x r3, N2 x r4
    std::vector<DenseTensor> cores;   // p cores, each r1 x r2 x r3 x r4
    Matrix sigma_e;                   // N1*N2 x N1*N2 innovation covariance

    Index n1() const { return u1.rows(); }
    Index n2() const { return u2.rows(); }

    // Wide matricized core G*_[2] of shape r1*r2 x r3*r4*p (lag blocks side by side).
    Matrix wide_core() const;

    // The p lag cores as one order-5 tensor (r1, r2, r3, r4, p).
    DenseTensor stacked_core() const;

    // Coefficient of lag i as an N1 x N2 x N1 x N2 tensor.
    DenseTensor lag_coefficient(Index i) const;

    // Zero-coefficient model at the given ranks with identity-padded factors.
    static RRMARModel zero(Index n1, Index n2, const std::array<Index, 4>& ranks, Index p);

    // Unrestricted model wrapping a stacked VAR coefficient (full ranks,
    // identity factors); coeff is N1*N2 x N1*N2*p.
    static RRMARModel from_var_coefficient(Index n1, Index n2, Index p, const Matrix& coeff);
};

// Validates model ranks against the matrix dimensions (Tucker feasibility of
// the per-lag coefficient tensors).
bool model_ranks_feasible(Index n1, Index n2, const std::array<Index, 4>& ranks);

// Lag-stacked views of a series: responses N1 x N2 x (T-p) and predictors
// N1 x N2 x p x (T-p); predictor slice (.,.,i,t) equals Y_{t+p-1-i} (lag i+1).
struct StackedLags {
    DenseTensor responses;
    DenseTensor predictors;
};
StackedLags stack_lags(const MatrixSeries& y, Index p);

// Stacked VAR coefficient (U2 kron U1) G*_[2] (I_p kron U4 kron U3)^T,
// shape N1*N2 x N1*N2*p.
Matrix coefficient_matrix(const RRMARModel& m);

// Fitted values for lag-stacked predictors (N1 x N2 x p x S) -> N1 x N2 x S.
DenseTensor predict(const RRMARModel& m, const DenseTensor& predictors);

// Residuals Y_t - fitted over the usable window t = p..T-1, shape N1 x N2 x (T-p).
DenseTensor residuals(const RRMARModel& m, const MatrixSeries& y);

// Companion-form stationarity check: spectral radius < 1 - 1e-10.
bool is_stationary(const RRMARModel& m);

// Largest singular value of the stacked coefficient over the largest
// eigenvalue of sigma_e.
double snr(const RRMARModel& m);

// Simulation recipe for the Monte Carlo experiments: standard-normal cores and
// factors, factors orthogonalized via leading singular vectors, cores scaled
// to Frobenius norm 4 and then by one scalar so the signal-to-noise ratio hits
// snr_target; non-stationary draws are rejected and redrawn.
struct SimulationSpec {
    Index n1 = 0;
    Index n2 = 0;
    std::array<Index, 4> ranks{};
    Index p = 1;
    Index T = 0;
    Index burn_in = 50;
    double snr_target = 0.7;
    double noise_scale = 1.0;  // innovation std dev; 0 gives a noiseless path
    std::uint64_t seed = 0;
};

struct SimulationResult {
    MatrixSeries series;  // post burn-in observations, length T
    RRMARModel truth;
};

SimulationResult simulate(const SimulationSpec& spec);

}  // namespace rrmar
