#include "rrmar/selection.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "rrmar/errors.hpp"
#include "rrmar/parallel.hpp"
#include "rrmar/tucker.hpp"

namespace rrmar {

namespace {

struct LogDet {
    double value = 0.0;
    bool singular = false;
};

// ln|S| with a pseudo-determinant fallback (eigenvalues below 1e-12 of the
// largest are dropped and the result flagged).
LogDet log_det(const Matrix& s) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
    const Vector& lambda = eig.eigenvalues();
    const double cutoff = 1e-12 * std::max(lambda.maxCoeff(), std::numeric_limits<double>::min());
    LogDet out;
    for (Index i = 0; i < lambda.size(); ++i) {
        if (lambda[i] > cutoff) {
            out.value += std::log(lambda[i]);
        } else {
            out.singular = true;
        }
    }
    return out;
}

struct CriterionValues {
    double aic = 0.0;
    double bic = 0.0;
    double logdet = 0.0;
    bool singular = false;
};

CriterionValues criterion_values(const Matrix& sigma, Index params, Index t_eff) {
    const double t = static_cast<double>(t_eff);
    const double phi = static_cast<double>(params);
    const LogDet ld = log_det(sigma);
    CriterionValues out;
    out.logdet = ld.value;
    out.singular = ld.singular;
    out.aic = ld.value + (2.0 / t) * phi;
    out.bic = ld.value + (std::log(t) / t) * phi;
    return out;
}

}  // namespace

double info_criterion(const RRMARModel& m, const MatrixSeries& y, Criterion kind) {
    const Index d = m.n1() * m.n2();
    const Index t_eff = y.length() - m.p;
    if (t_eff < d + 1) {
        throw std::invalid_argument("info_criterion: need at least N1*N2 + 1 residual vectors");
    }
    DenseTensor res = residuals(m, y);
    Eigen::Map<const Matrix> r(res.data().data(), d, t_eff);
    const Matrix sigma = (r * r.transpose()) / static_cast<double>(t_eff);
    const Index phi = param_count(m.ranks, {m.n1(), m.n2()}, m.p);
    const CriterionValues v = criterion_values(sigma, phi, t_eff);
    return kind == Criterion::AIC ? v.aic : v.bic;
}

std::vector<Candidate> selection_grid(Index n1, Index n2, Index max_lag) {
    if (max_lag < 1) throw std::invalid_argument("selection_grid: max_lag must be >= 1");
    std::vector<Candidate> grid;
    for (Index p = 1; p <= max_lag; ++p) {
        for (Index r1 = 1; r1 <= n1; ++r1) {
            for (Index r2 = 1; r2 <= n2; ++r2) {
                for (Index r3 = 1; r3 <= n1; ++r3) {
                    for (Index r4 = 1; r4 <= n2; ++r4) {
                        const std::array<Index, 4> ranks = {r1, r2, r3, r4};
                        if (model_ranks_feasible(n1, n2, ranks)) {
                            grid.push_back(Candidate{ranks, p});
                        }
                    }
                }
            }
        }
    }
    return grid;
}

SelectionResult select_rank_lag(const MatrixSeries& y, Index max_lag, const FitConfig& config,
                                int threads) {
    const Index n1 = y.n1(), n2 = y.n2();
    const std::vector<Candidate> grid = selection_grid(n1, n2, max_lag);

    // One design, OLS solution and set of mode bases per lag order, shared by
    // all rank candidates at that p.
    struct PerLag {
        std::unique_ptr<FitProblem> problem;
        std::unique_ptr<CoefficientBases> bases;
        std::string error;
    };
    std::vector<PerLag> per_lag(static_cast<std::size_t>(max_lag));
    for (Index p = 1; p <= max_lag; ++p) {
        PerLag& pl = per_lag[static_cast<std::size_t>(p - 1)];
        try {
            pl.problem = std::make_unique<FitProblem>(y, p);
            pl.bases = std::make_unique<CoefficientBases>(
                coefficient_bases(pl.problem->ols_coefficient(), n1, n2, p));
        } catch (const std::exception& e) {
            pl.problem.reset();
            pl.bases.reset();
            pl.error = e.what();
        }
    }

    SelectionResult result;
    result.entries.resize(grid.size());

    parallel_for(grid.size(), threads, [&](std::size_t i) {
        const Candidate& c = grid[i];
        SelectionEntry& entry = result.entries[i];
        entry.ranks = c.ranks;
        entry.p = c.p;
        entry.params = param_count(c.ranks, {n1, n2}, c.p);
        entry.aic = entry.bic = entry.loglik_proxy = std::numeric_limits<double>::quiet_NaN();

        const PerLag& pl = per_lag[static_cast<std::size_t>(c.p - 1)];
        if (!pl.problem) {
            entry.converged = false;
            entry.note = pl.error;
            return;
        }
        try {
            RRMARModel model;
            bool fit_converged = true;
            const bool full_rank = c.ranks[0] == n1 && c.ranks[1] == n2 && c.ranks[2] == n1 &&
                                   c.ranks[3] == n2;
            if (full_rank) {
                // The unrestricted VAR solves the full-rank problem exactly.
                model = RRMARModel::from_var_coefficient(
                    n1, n2, c.p, Eigen::Map<const Matrix>(pl.bases->coeff.data().data(),
                                                          n1 * n2, n1 * n2 * c.p));
                const Matrix r = pl.problem->residual_matrix(coefficient_matrix(model));
                model.sigma_e = (r * r.transpose()) /
                                static_cast<double>(pl.problem->effective_samples());
            } else {
                FitResult fr = fit_problem(*pl.problem, init_from_bases(*pl.bases, c.ranks), config);
                fit_converged = fr.converged;
                model = std::move(fr.model);
            }
            const CriterionValues v =
                criterion_values(model.sigma_e, entry.params, pl.problem->effective_samples());
            entry.aic = v.aic;
            entry.bic = v.bic;
            entry.loglik_proxy = v.logdet;
            entry.converged = fit_converged && !v.singular;
            if (v.singular) entry.note = "singular residual covariance (pseudo-determinant)";
            else if (!fit_converged) entry.note = "iteration budget exhausted";
        } catch (const std::exception& e) {
            entry.converged = false;
            entry.note = e.what();
        }
    });

    auto better = [&](Index lhs, Index rhs, Criterion kind) {
        const SelectionEntry& a = result.entries[static_cast<std::size_t>(lhs)];
        const SelectionEntry& b = result.entries[static_cast<std::size_t>(rhs)];
        const double va = kind == Criterion::AIC ? a.aic : a.bic;
        const double vb = kind == Criterion::AIC ? b.aic : b.bic;
        if (va != vb) return va < vb;
        if (a.params != b.params) return a.params < b.params;
        const auto key = [](const SelectionEntry& e) {
            return std::array<Index, 5>{e.p, e.ranks[0], e.ranks[1], e.ranks[2], e.ranks[3]};
        };
        return key(a) < key(b);
    };
    for (Criterion kind : {Criterion::AIC, Criterion::BIC}) {
        Index best = -1;
        for (std::size_t i = 0; i < result.entries.size(); ++i) {
            const SelectionEntry& e = result.entries[i];
            if (!e.converged || std::isnan(kind == Criterion::AIC ? e.aic : e.bic)) continue;
            if (best < 0 || better(static_cast<Index>(i), best, kind)) best = static_cast<Index>(i);
        }
        if (best < 0) {
            // No converged entry; fall back to any finite value.
            for (std::size_t i = 0; i < result.entries.size(); ++i) {
                const SelectionEntry& e = result.entries[i];
                if (std::isnan(kind == Criterion::AIC ? e.aic : e.bic)) continue;
                if (best < 0 || better(static_cast<Index>(i), best, kind)) best = static_cast<Index>(i);
            }
        }
        (kind == Criterion::AIC ? result.best_aic : result.best_bic) = best;
    }
    return result;
}

}  // namespace rrmar
