#pragma once

#include <array>
#include <string>
#include <vector>

#include "rrmar/estimator.hpp"
#include "rrmar/model.hpp"
#include "rrmar/series.hpp"

namespace rrmar {

enum class Criterion { AIC, BIC };

// ln|Sigma_hat| + penalty, with T' = T - p as the sample size in both the
// covariance divisor and the penalty weight. A singular residual covariance
// falls back to the pseudo-determinant.
double info_criterion(const RRMARModel& m, const MatrixSeries& y, Criterion kind);

struct SelectionEntry {
    std::array<Index, 4> ranks{};
    Index p = 1;
    double aic = 0.0;
    double bic = 0.0;
    double loglik_proxy = 0.0;  // ln|Sigma_hat|
    Index params = 0;
    bool converged = false;
    std::string note;  // failure reason when a fit could not be completed
};

struct SelectionResult {
    std::vector<SelectionEntry> entries;  // grid-enumeration order
    Index best_aic = -1;                  // index into entries
    Index best_bic = -1;

    const SelectionEntry& best(Criterion kind) const {
        return entries.at(static_cast<std::size_t>(kind == Criterion::AIC ? best_aic : best_bic));
    }
};

// All feasible (ranks, p) candidates in lexicographic (p, r1, r2, r3, r4) order.
struct Candidate {
    std::array<Index, 4> ranks{};
    Index p = 1;
};
std::vector<Candidate> selection_grid(Index n1, Index n2, Index max_lag);

// Fits every feasible candidate (full-rank tuples use the unrestricted VAR
// solution directly) and records both criteria. Entries are evaluated
// concurrently on `threads` workers; results are merged in grid order.
SelectionResult select_rank_lag(const MatrixSeries& y, Index max_lag,
                                const FitConfig& config = {}, int threads = 1);

}  // namespace rrmar
