#include "rrmar/estimator.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rrmar/errors.hpp"
#include "rrmar/tucker.hpp"

namespace rrmar {

FitProblem::FitProblem(const MatrixSeries& y, Index p) {
    StackedLags lags = stack_lags(y, p);
    n1_ = y.n1();
    n2_ = y.n2();
    p_ = p;
    t_eff_ = lags.responses.dim(2);
    x_ = Eigen::Map<const Matrix>(lags.predictors.data().data(), n1_ * n2_ * p_, t_eff_);
    y_ = Eigen::Map<const Matrix>(lags.responses.data().data(), n1_ * n2_, t_eff_);
    finish_setup();
}

FitProblem::FitProblem(const DenseTensor& responses, const DenseTensor& predictors) {
    if (responses.order() != 3 || predictors.order() != 4) {
        throw std::invalid_argument("FitProblem: responses must be order 3, predictors order 4");
    }
    if (predictors.dim(0) != responses.dim(0) || predictors.dim(1) != responses.dim(1) ||
        predictors.dim(3) != responses.dim(2)) {
        throw std::invalid_argument("FitProblem: response/predictor shapes do not match");
    }
    n1_ = responses.dim(0);
    n2_ = responses.dim(1);
    p_ = predictors.dim(2);
    t_eff_ = responses.dim(2);
    x_ = Eigen::Map<const Matrix>(predictors.data().data(), n1_ * n2_ * p_, t_eff_);
    y_ = Eigen::Map<const Matrix>(responses.data().data(), n1_ * n2_, t_eff_);
    finish_setup();
}

void FitProblem::finish_setup() {
    const double t = static_cast<double>(t_eff_);
    sxx_ = (x_ * x_.transpose()) / t;
    syx_ = (y_ * x_.transpose()) / t;
    syy_ = y_.squaredNorm() / (2.0 * t);
}

double FitProblem::loss_of(const Matrix& a) const {
    const double value = syy_ - (a.cwiseProduct(syx_)).sum() + 0.5 * (a * sxx_).cwiseProduct(a).sum();
    return std::max(value, 0.0);
}

Matrix FitProblem::moment_of(const Matrix& a) const { return a * sxx_ - syx_; }

Matrix FitProblem::residual_matrix(const Matrix& a) const { return a * x_ - y_; }

Matrix FitProblem::ols_coefficient() const {
    const Index k = n1_ * n2_ * p_;
    if (t_eff_ <= k) {
        throw std::invalid_argument("ols: need T - p > N1*N2*p observations");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sxx_);
    const double lambda_max = eig.eigenvalues().maxCoeff();
    if (lambda_max <= 0.0 || eig.eigenvalues().minCoeff() <= 1e-12 * lambda_max) {
        throw IllConditionedError("ols: regressor Gram matrix is numerically rank deficient");
    }
    Eigen::LDLT<Matrix> ldlt(sxx_);
    return ldlt.solve(syx_.transpose()).transpose();
}

namespace {

DenseTensor moment_to_tensor(const Matrix& m_mat, Index n1, Index n2, Index p) {
    return DenseTensor({n1, n2, n1, n2, p},
                       Eigen::Map<const Vector>(m_mat.data(), m_mat.size()));
}

StackedLags stacked_or_throw(const RRMARModel& m, const MatrixSeries& y) {
    if (y.n1() != m.n1() || y.n2() != m.n2()) {
        throw std::invalid_argument("series does not match model dimensions");
    }
    return stack_lags(y, m.p);
}

}  // namespace

double loss(const RRMARModel& m, const DenseTensor& responses, const DenseTensor& predictors) {
    DenseTensor fitted = predict(m, predictors);
    const double t = static_cast<double>(responses.dim(2));
    if (!fitted.same_shape(responses)) {
        throw std::invalid_argument("loss: response shape mismatch");
    }
    return (fitted - responses).data().squaredNorm() / (2.0 * t);
}

double loss(const RRMARModel& m, const MatrixSeries& y) {
    StackedLags lags = stacked_or_throw(m, y);
    return loss(m, lags.responses, lags.predictors);
}

DenseTensor residual_moment(const RRMARModel& m, const DenseTensor& responses,
                            const DenseTensor& predictors) {
    FitProblem d(responses, predictors);
    if (d.n1() != m.n1() || d.n2() != m.n2() || d.p() != m.p) {
        throw std::invalid_argument("residual_moment: data does not match model dimensions");
    }
    return moment_to_tensor(d.moment_of(coefficient_matrix(m)), d.n1(), d.n2(), d.p());
}

DenseTensor residual_moment(const RRMARModel& m, const MatrixSeries& y) {
    StackedLags lags = stacked_or_throw(m, y);
    return residual_moment(m, lags.responses, lags.predictors);
}

namespace {

// Gradient for factor block `which` (0..3): the moment tensor projected onto
// the other three factor spaces, unfolded at `which`, times the matching core
// unfolding.
Matrix factor_gradient(const RRMARModel& m, const DenseTensor& moment,
                       const DenseTensor& core, int which) {
    DenseTensor h = moment;
    if (which != 0) h = mode_product(h, m.u1.transpose(), 0);
    if (which != 1) h = mode_product(h, m.u2.transpose(), 1);
    if (which != 2) h = mode_product(h, m.u3.transpose(), 2);
    if (which != 3) h = mode_product(h, m.u4.transpose(), 3);
    return unfold(h, which) * unfold(core, which).transpose();
}

DenseTensor core_gradient(const RRMARModel& m, const DenseTensor& moment) {
    DenseTensor h = mode_product(moment, m.u1.transpose(), 0);
    h = mode_product(h, m.u2.transpose(), 1);
    h = mode_product(h, m.u3.transpose(), 2);
    return mode_product(h, m.u4.transpose(), 3);
}

void check_moment_shape(const RRMARModel& m, const DenseTensor& moment) {
    if (moment.order() != 5 || moment.dim(0) != m.n1() || moment.dim(1) != m.n2() ||
        moment.dim(2) != m.n1() || moment.dim(3) != m.n2() || moment.dim(4) != m.p) {
        throw std::invalid_argument("gradients: moment tensor has wrong shape");
    }
}

}  // namespace

Gradients gradients_from_moment(const RRMARModel& m, const DenseTensor& moment) {
    check_moment_shape(m, moment);
    const DenseTensor core = m.stacked_core();
    Gradients g;
    g.u1 = factor_gradient(m, moment, core, 0);
    g.u2 = factor_gradient(m, moment, core, 1);
    g.u3 = factor_gradient(m, moment, core, 2);
    g.u4 = factor_gradient(m, moment, core, 3);
    g.core = core_gradient(m, moment);
    return g;
}

Gradients gradients(const RRMARModel& m, const DenseTensor& responses,
                    const DenseTensor& predictors) {
    return gradients_from_moment(m, residual_moment(m, responses, predictors));
}

Gradients gradients(const RRMARModel& m, const MatrixSeries& y) {
    StackedLags lags = stacked_or_throw(m, y);
    return gradients(m, lags.responses, lags.predictors);
}

CoefficientBases coefficient_bases(const Matrix& ols_coeff, Index n1, Index n2, Index p) {
    CoefficientBases cb;
    cb.coeff = DenseTensor({n1, n2, n1, n2, p},
                           Eigen::Map<const Vector>(ols_coeff.data(), ols_coeff.size()));
    const std::array<Index, 4> dims = {n1, n2, n1, n2};
    for (Index k = 0; k < 4; ++k) {
        cb.bases[static_cast<std::size_t>(k)] =
            leading_left_singular_vectors(unfold(cb.coeff, k), dims[static_cast<std::size_t>(k)]);
    }
    return cb;
}

RRMARModel init_from_bases(const CoefficientBases& cb, const std::array<Index, 4>& ranks) {
    const Index n1 = cb.coeff.dim(0), n2 = cb.coeff.dim(1), p = cb.coeff.dim(4);
    if (!model_ranks_feasible(n1, n2, ranks)) {
        throw std::invalid_argument("init_from_bases: infeasible ranks");
    }
    RRMARModel m;
    m.ranks = ranks;
    m.p = p;
    m.u1 = cb.bases[0].leftCols(ranks[0]);
    m.u2 = cb.bases[1].leftCols(ranks[1]);
    m.u3 = cb.bases[2].leftCols(ranks[2]);
    m.u4 = cb.bases[3].leftCols(ranks[3]);

    DenseTensor core5 = cb.coeff;
    core5 = mode_product(core5, m.u1.transpose(), 0);
    core5 = mode_product(core5, m.u2.transpose(), 1);
    core5 = mode_product(core5, m.u3.transpose(), 2);
    core5 = mode_product(core5, m.u4.transpose(), 3);

    const Index per_lag = ranks[0] * ranks[1] * ranks[2] * ranks[3];
    m.cores.clear();
    for (Index i = 0; i < p; ++i) {
        m.cores.emplace_back(std::vector<Index>{ranks[0], ranks[1], ranks[2], ranks[3]},
                             core5.data().segment(i * per_lag, per_lag));
    }
    m.sigma_e = Matrix::Identity(n1 * n2, n1 * n2);
    return m;
}

RRMARModel ols_init(const MatrixSeries& y, const std::array<Index, 4>& ranks, Index p) {
    FitProblem d(y, p);
    CoefficientBases cb = coefficient_bases(d.ols_coefficient(), d.n1(), d.n2(), p);
    RRMARModel m = init_from_bases(cb, ranks);
    const Matrix r = d.residual_matrix(coefficient_matrix(m));
    m.sigma_e = (r * r.transpose()) / static_cast<double>(d.effective_samples());
    return m;
}

FitResult fit_problem(const FitProblem& d, RRMARModel init, const FitConfig& config) {
    if (config.step_size <= 0.0 || config.tolerance <= 0.0 || config.max_iterations < 1) {
        throw std::invalid_argument("fit: invalid configuration");
    }
    const Index n1 = d.n1(), n2 = d.n2(), p = d.p();
    RRMARModel m = std::move(init);
    const double eta = config.step_size;

    FitResult result;
    Matrix a = coefficient_matrix(m);
    double prev = d.loss_of(a);
    result.loss_trace.push_back(prev);
    const double divergence_cap = 1e6 * std::max(prev, 1e-12);

    const Index per_lag = m.ranks[0] * m.ranks[1] * m.ranks[2] * m.ranks[3];
    for (int s = 1; s <= config.max_iterations; ++s) {
        result.iterations = s;
        const RRMARModel snapshot = m;
        // Block updates, each against the freshest parameters.
        for (int block = 0; block < 5; ++block) {
            const DenseTensor mt = moment_to_tensor(d.moment_of(a), n1, n2, p);
            if (block < 4) {
                const Matrix g = factor_gradient(m, mt, m.stacked_core(), block);
                switch (block) {
                    case 0: m.u1 -= eta * g; break;
                    case 1: m.u2 -= eta * g; break;
                    case 2: m.u3 -= eta * g; break;
                    case 3: m.u4 -= eta * g; break;
                }
            } else {
                const DenseTensor g = core_gradient(m, mt);
                for (Index i = 0; i < p; ++i) {
                    m.cores[static_cast<std::size_t>(i)].data() -=
                        eta * g.data().segment(i * per_lag, per_lag);
                }
            }
            a = coefficient_matrix(m);
        }
        const double current = d.loss_of(a);
        if (current > divergence_cap) {
            result.loss_trace.push_back(current);
            throw DivergenceError("fit: loss exceeded 1e6x the initial value; retry with a smaller step size");
        }
        if (current > prev) {
            // Descent exhausted at this step size; keep the previous iterate.
            m = snapshot;
            a = coefficient_matrix(m);
            result.converged = true;
            break;
        }
        result.loss_trace.push_back(current);
        if (std::abs(current - prev) / std::max(prev, 1e-12) < config.tolerance) {
            result.converged = true;
            prev = current;
            break;
        }
        prev = current;
    }

    // Finalize: re-extract orthonormal factors from the converged coefficient
    // and re-project the core. The coefficient itself is unchanged because its
    // mode unfoldings already have rank at most r_i.
    DenseTensor coeff5({n1, n2, n1, n2, p}, Eigen::Map<const Vector>(a.data(), a.size()));
    m.u1 = leading_left_singular_vectors(unfold(coeff5, 0), m.ranks[0]);
    m.u2 = leading_left_singular_vectors(unfold(coeff5, 1), m.ranks[1]);
    m.u3 = leading_left_singular_vectors(unfold(coeff5, 2), m.ranks[2]);
    m.u4 = leading_left_singular_vectors(unfold(coeff5, 3), m.ranks[3]);
    DenseTensor core5 = coeff5;
    core5 = mode_product(core5, m.u1.transpose(), 0);
    core5 = mode_product(core5, m.u2.transpose(), 1);
    core5 = mode_product(core5, m.u3.transpose(), 2);
    core5 = mode_product(core5, m.u4.transpose(), 3);
    m.cores.clear();
    for (Index i = 0; i < p; ++i) {
        m.cores.emplace_back(std::vector<Index>{m.ranks[0], m.ranks[1], m.ranks[2], m.ranks[3]},
                             core5.data().segment(i * per_lag, per_lag));
    }

    const Matrix r = d.residual_matrix(coefficient_matrix(m));
    m.sigma_e = (r * r.transpose()) / static_cast<double>(d.effective_samples());

    result.model = std::move(m);
    return result;
}

FitResult fit(const MatrixSeries& y, const std::array<Index, 4>& ranks, Index p,
              const FitConfig& config) {
    FitProblem d(y, p);
    CoefficientBases cb = coefficient_bases(d.ols_coefficient(), d.n1(), d.n2(), p);
    return fit_problem(d, init_from_bases(cb, ranks), config);
}

}  // namespace rrmar
