#include "rrmar/model.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <stdexcept>

#include "rrmar/errors.hpp"
#include "rrmar/rng.hpp"
#include "rrmar/tucker.hpp"

namespace rrmar {

Matrix RRMARModel::wide_core() const {
    const Index r12 = ranks[0] * ranks[1];
    const Index r34 = ranks[2] * ranks[3];
    Matrix g(r12, r34 * p);
    for (Index i = 0; i < p; ++i) {
        const DenseTensor& core = cores[static_cast<std::size_t>(i)];
        // G_[2],i is the {0,1}-matricization, a plain reshape of the core data.
        g.middleCols(i * r34, r34) =
            Eigen::Map<const Matrix>(core.data().data(), r12, r34);
    }
    return g;
}

DenseTensor RRMARModel::stacked_core() const {
    const Index per_lag = ranks[0] * ranks[1] * ranks[2] * ranks[3];
    Vector data(per_lag * p);
    for (Index i = 0; i < p; ++i) {
        data.segment(i * per_lag, per_lag) = cores[static_cast<std::size_t>(i)].data();
    }
    return DenseTensor({ranks[0], ranks[1], ranks[2], ranks[3], p}, std::move(data));
}

DenseTensor RRMARModel::lag_coefficient(Index i) const {
    if (i < 0 || i >= p) throw std::invalid_argument("lag index out of range");
    TuckerFactorization f{cores[static_cast<std::size_t>(i)], {u1, u2, u3, u4}};
    return reconstruct(f);
}

RRMARModel RRMARModel::zero(Index n1, Index n2, const std::array<Index, 4>& ranks, Index p) {
    if (!model_ranks_feasible(n1, n2, ranks)) {
        throw std::invalid_argument("zero model: infeasible ranks");
    }
    RRMARModel m;
    m.ranks = ranks;
    m.p = p;
    m.u1 = Matrix::Identity(n1, ranks[0]);
    m.u2 = Matrix::Identity(n2, ranks[1]);
    m.u3 = Matrix::Identity(n1, ranks[2]);
    m.u4 = Matrix::Identity(n2, ranks[3]);
    m.cores.assign(static_cast<std::size_t>(p),
                   DenseTensor({ranks[0], ranks[1], ranks[2], ranks[3]}));
    m.sigma_e = Matrix::Identity(n1 * n2, n1 * n2);
    return m;
}

RRMARModel RRMARModel::from_var_coefficient(Index n1, Index n2, Index p, const Matrix& coeff) {
    const Index d = n1 * n2;
    if (coeff.rows() != d || coeff.cols() != d * p) {
        throw std::invalid_argument("VAR coefficient has wrong dimensions");
    }
    RRMARModel m = zero(n1, n2, {n1, n2, n1, n2}, p);
    for (Index i = 0; i < p; ++i) {
        Matrix block = coeff.middleCols(i * d, d);
        m.cores[static_cast<std::size_t>(i)] =
            DenseTensor({n1, n2, n1, n2}, Eigen::Map<Vector>(block.data(), block.size()));
    }
    return m;
}

bool model_ranks_feasible(Index n1, Index n2, const std::array<Index, 4>& ranks) {
    return validate_ranks({ranks[0], ranks[1], ranks[2], ranks[3]}, {n1, n2, n1, n2});
}

StackedLags stack_lags(const MatrixSeries& y, Index p) {
    if (p < 1) throw std::invalid_argument("stack_lags: lag order must be >= 1");
    if (y.length() <= p) throw std::invalid_argument("stack_lags: series is too short for p lags");
    const Index s_len = y.length() - p;
    const Index n1 = y.n1(), n2 = y.n2();

    StackedLags out{DenseTensor({n1, n2, s_len}), DenseTensor({n1, n2, p, s_len})};
    for (Index s = 0; s < s_len; ++s) {
        const Index t = p + s;
        for (Index j = 0; j < n2; ++j) {
            for (Index i = 0; i < n1; ++i) {
                out.responses({i, j, s}) = y.at(i, j, t);
                for (Index l = 0; l < p; ++l) {
                    out.predictors({i, j, l, s}) = y.at(i, j, t - 1 - l);
                }
            }
        }
    }
    return out;
}

Matrix coefficient_matrix(const RRMARModel& m) {
    const Matrix left = kron(m.u2, m.u1);        // N1N2 x r1r2
    const Matrix right = kron(m.u4, m.u3);       // N1N2 x r3r4
    const Matrix g = m.wide_core();
    const Index d = m.n1() * m.n2();
    const Index r34 = m.ranks[2] * m.ranks[3];
    Matrix a(d, d * m.p);
    for (Index i = 0; i < m.p; ++i) {
        a.middleCols(i * d, d) = left * g.middleCols(i * r34, r34) * right.transpose();
    }
    return a;
}

DenseTensor predict(const RRMARModel& m, const DenseTensor& predictors) {
    const Index n1 = m.n1(), n2 = m.n2();
    if (predictors.order() != 4 || predictors.dim(0) != n1 || predictors.dim(1) != n2 ||
        predictors.dim(2) != m.p) {
        throw std::invalid_argument("predict: predictor tensor does not match model dimensions");
    }
    const Index s_len = predictors.dim(3);
    const Matrix a = coefficient_matrix(m);
    // Each time slice of the predictors is already the stacked vec(X_t).
    Eigen::Map<const Matrix> x(predictors.data().data(), n1 * n2 * m.p, s_len);
    Matrix fitted = a * x;
    return DenseTensor({n1, n2, s_len}, Eigen::Map<Vector>(fitted.data(), fitted.size()));
}

DenseTensor residuals(const RRMARModel& m, const MatrixSeries& y) {
    if (y.n1() != m.n1() || y.n2() != m.n2()) {
        throw std::invalid_argument("residuals: series does not match model dimensions");
    }
    StackedLags lags = stack_lags(y, m.p);
    DenseTensor fitted = predict(m, lags.predictors);
    return lags.responses - fitted;
}

bool is_stationary(const RRMARModel& m) {
    const Index d = m.n1() * m.n2();
    const Matrix a = coefficient_matrix(m);
    Matrix companion = Matrix::Zero(d * m.p, d * m.p);
    companion.topRows(d) = a;
    if (m.p > 1) {
        companion.block(d, 0, d * (m.p - 1), d * (m.p - 1)) =
            Matrix::Identity(d * (m.p - 1), d * (m.p - 1));
    }
    Eigen::EigenSolver<Matrix> eig(companion, /*computeEigenvectors=*/false);
    const double radius = eig.eigenvalues().cwiseAbs().maxCoeff();
    return radius < 1.0 - 1e-10;
}

double snr(const RRMARModel& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m.sigma_e);
    const double lambda_max = eig.eigenvalues().maxCoeff();
    const double lambda_min = eig.eigenvalues().minCoeff();
    if (lambda_max <= 0.0 || lambda_min <= 1e-12 * lambda_max) {
        throw std::invalid_argument("snr: innovation covariance is singular");
    }
    Eigen::JacobiSVD<Matrix> svd(coefficient_matrix(m));
    return svd.singularValues()(0) / lambda_max;
}

namespace {

Matrix draw_matrix(Rng& rng, Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
    }
    return m;
}

DenseTensor draw_tensor(Rng& rng, const std::vector<Index>& shape) {
    DenseTensor t(shape);
    for (Index i = 0; i < t.size(); ++i) t[i] = rng.normal();
    return t;
}

}  // namespace

SimulationResult simulate(const SimulationSpec& spec) {
    if (spec.n1 < 1 || spec.n2 < 1 || spec.T < 1 || spec.p < 1 || spec.burn_in < 0) {
        throw std::invalid_argument("simulate: invalid dimensions");
    }
    if (!model_ranks_feasible(spec.n1, spec.n2, spec.ranks)) {
        throw std::invalid_argument("simulate: infeasible ranks");
    }
    if (spec.snr_target <= 0.0 || spec.noise_scale < 0.0) {
        throw std::invalid_argument("simulate: snr_target must be positive and noise_scale nonnegative");
    }

    Rng rng(spec.seed);
    const Index d = spec.n1 * spec.n2;
    const double lambda_max = spec.noise_scale > 0.0 ? spec.noise_scale * spec.noise_scale : 1.0;

    RRMARModel truth;
    bool accepted = false;
    for (int attempt = 0; attempt < 100 && !accepted; ++attempt) {
        truth = RRMARModel();
        truth.ranks = spec.ranks;
        truth.p = spec.p;
        truth.cores.clear();
        for (Index i = 0; i < spec.p; ++i) {
            truth.cores.push_back(
                draw_tensor(rng, {spec.ranks[0], spec.ranks[1], spec.ranks[2], spec.ranks[3]}));
        }
        truth.u1 = leading_left_singular_vectors(draw_matrix(rng, spec.n1, spec.ranks[0]), spec.ranks[0]);
        truth.u2 = leading_left_singular_vectors(draw_matrix(rng, spec.n2, spec.ranks[1]), spec.ranks[1]);
        truth.u3 = leading_left_singular_vectors(draw_matrix(rng, spec.n1, spec.ranks[2]), spec.ranks[2]);
        truth.u4 = leading_left_singular_vectors(draw_matrix(rng, spec.n2, spec.ranks[3]), spec.ranks[3]);
        truth.sigma_e = spec.noise_scale * spec.noise_scale * Matrix::Identity(d, d);

        double fro = 0.0;
        for (const auto& core : truth.cores) fro += core.data().squaredNorm();
        fro = std::sqrt(fro);
        if (fro == 0.0) continue;
        for (auto& core : truth.cores) core *= 4.0 / fro;

        // One multiplier pins the signal-to-noise ratio exactly; singular
        // values of the coefficient scale linearly with the cores.
        Eigen::JacobiSVD<Matrix> svd(coefficient_matrix(truth));
        const double sigma_max = svd.singularValues()(0);
        if (sigma_max == 0.0) continue;
        const double scale = spec.snr_target * lambda_max / sigma_max;
        for (auto& core : truth.cores) core *= scale;

        accepted = is_stationary(truth);
    }
    if (!accepted) {
        throw GenerationError("simulate: no stationary draw in 100 attempts");
    }

    const Matrix a = coefficient_matrix(truth);
    // Pre-sample lag states, most recent first.
    std::vector<Vector> state;
    for (Index l = 0; l < spec.p; ++l) {
        Matrix y0 = draw_matrix(rng, spec.n1, spec.n2);
        state.push_back(Eigen::Map<Vector>(y0.data(), d));
    }

    DenseTensor values({spec.n1, spec.n2, spec.T});
    for (Index t = 0; t < spec.burn_in + spec.T; ++t) {
        Vector x(d * spec.p);
        for (Index l = 0; l < spec.p; ++l) x.segment(l * d, d) = state[static_cast<std::size_t>(l)];
        Vector next = a * x;
        if (spec.noise_scale > 0.0) {
            for (Index i = 0; i < d; ++i) next[i] += spec.noise_scale * rng.normal();
        }
        for (Index l = spec.p - 1; l > 0; --l) state[static_cast<std::size_t>(l)] = state[static_cast<std::size_t>(l - 1)];
        state[0] = next;
        if (t >= spec.burn_in) {
            values.data().segment((t - spec.burn_in) * d, d) = next;
        }
    }

    return SimulationResult{MatrixSeries(std::move(values)), std::move(truth)};
}

}  // namespace rrmar
