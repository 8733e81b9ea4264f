#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/SVD>
#include <cmath>

#include "rrmar/errors.hpp"
#include "rrmar/model.hpp"
#include "rrmar/rng.hpp"
#include "rrmar/tensor.hpp"
#include "rrmar/tucker.hpp"

using namespace rrmar;

namespace {

DenseTensor random_tensor(Rng& rng, const std::vector<Index>& shape) {
    DenseTensor t(shape);
    for (Index i = 0; i < t.size(); ++i) t[i] = rng.normal();
    return t;
}

Matrix random_orthonormal(Rng& rng, Index n, Index r) {
    Matrix raw(n, r);
    for (Index j = 0; j < r; ++j) {
        for (Index i = 0; i < n; ++i) raw(i, j) = rng.normal();
    }
    return leading_left_singular_vectors(raw, r);
}

RRMARModel random_model(Rng& rng, Index n1, Index n2, const std::array<Index, 4>& ranks,
                        Index p, double scale = 0.3) {
    RRMARModel m;
    m.ranks = ranks;
    m.p = p;
    m.u1 = random_orthonormal(rng, n1, ranks[0]);
    m.u2 = random_orthonormal(rng, n2, ranks[1]);
    m.u3 = random_orthonormal(rng, n1, ranks[2]);
    m.u4 = random_orthonormal(rng, n2, ranks[3]);
    for (Index i = 0; i < p; ++i) {
        DenseTensor core = random_tensor(rng, {ranks[0], ranks[1], ranks[2], ranks[3]});
        core *= scale;
        m.cores.push_back(core);
    }
    m.sigma_e = Matrix::Identity(n1 * n2, n1 * n2);
    return m;
}

MatrixSeries random_series(Rng& rng, Index n1, Index n2, Index t_len) {
    return MatrixSeries(random_tensor(rng, {n1, n2, t_len}));
}

// Scaled-identity VAR(1) model: coefficient = c * I.
RRMARModel scaled_identity_model(Index n1, Index n2, double c) {
    const Index d = n1 * n2;
    return RRMARModel::from_var_coefficient(n1, n2, 1, c * Matrix::Identity(d, d));
}

}  // namespace

TEST_CASE("stack_lags single lag shifts by one") {
    Rng rng(201);
    MatrixSeries y = random_series(rng, 3, 2, 6);
    StackedLags lags = stack_lags(y, 1);
    CHECK(lags.responses.shape() == std::vector<Index>{3, 2, 5});
    CHECK(lags.predictors.shape() == std::vector<Index>{3, 2, 1, 5});
    for (Index s = 0; s < 5; ++s) {
        for (Index j = 0; j < 2; ++j) {
            for (Index i = 0; i < 3; ++i) {
                CHECK(lags.responses({i, j, s}) == y.at(i, j, s + 1));
                CHECK(lags.predictors({i, j, 0, s}) == y.at(i, j, s));
            }
        }
    }
}

TEST_CASE("stack_lags constant series repeats the constant") {
    DenseTensor values({2, 2, 5});
    for (Index i = 0; i < values.size(); ++i) values[i] = 3.5;
    MatrixSeries y(values);
    StackedLags lags = stack_lags(y, 2);
    for (Index i = 0; i < lags.predictors.size(); ++i) CHECK(lags.predictors[i] == 3.5);
}

TEST_CASE("stack_lags hand-enumerated T=5, p=2 ordering") {
    // One distinct value per time point so lag slots are identifiable.
    DenseTensor values({1, 1, 5});
    for (Index t = 0; t < 5; ++t) values({0, 0, t}) = static_cast<double>(t + 1);
    MatrixSeries y(values);
    StackedLags lags = stack_lags(y, 2);
    CHECK(lags.responses.dim(2) == 3);
    // Responses are Y_3, Y_4, Y_5; lag slot 0 holds t-1, slot 1 holds t-2.
    for (Index s = 0; s < 3; ++s) {
        CHECK(lags.responses({0, 0, s}) == static_cast<double>(s + 3));
        CHECK(lags.predictors({0, 0, 0, s}) == static_cast<double>(s + 2));
        CHECK(lags.predictors({0, 0, 1, s}) == static_cast<double>(s + 1));
    }
    CHECK_THROWS_AS(stack_lags(y, 5), std::invalid_argument);
}

TEST_CASE("coefficient_matrix is zero for zero cores") {
    RRMARModel m = RRMARModel::zero(3, 2, {2, 1, 2, 1}, 1);
    CHECK(coefficient_matrix(m).norm() == 0.0);
}

TEST_CASE("coefficient_matrix with identity factors returns the wide core") {
    Rng rng(203);
    RRMARModel m = RRMARModel::zero(2, 2, {2, 2, 2, 2}, 1);
    m.cores[0] = random_tensor(rng, {2, 2, 2, 2});
    CHECK((coefficient_matrix(m) - m.wide_core()).norm() == 0.0);
}

TEST_CASE("coefficient rank equals min(r1 r2, r3 r4)") {
    Rng rng(207);
    for (const auto& ranks : std::vector<std::array<Index, 4>>{
             {2, 1, 2, 2}, {1, 1, 2, 1}, {2, 2, 1, 1}, {2, 3, 3, 2}}) {
        if (!model_ranks_feasible(4, 3, ranks)) continue;
        RRMARModel m = random_model(rng, 4, 3, ranks, 1);
        Eigen::JacobiSVD<Matrix> svd(coefficient_matrix(m));
        const double tol = 1e-10 * svd.singularValues()(0);
        Index rank = 0;
        for (Index i = 0; i < svd.singularValues().size(); ++i) {
            if (svd.singularValues()(i) > tol) ++rank;
        }
        CHECK(rank == std::min(ranks[0] * ranks[1], ranks[2] * ranks[3]));
    }
}

TEST_CASE("predict: zero model gives zero fit, residuals equal the data") {
    Rng rng(211);
    MatrixSeries y = random_series(rng, 3, 2, 10);
    RRMARModel m = RRMARModel::zero(3, 2, {1, 1, 1, 1}, 1);
    StackedLags lags = stack_lags(y, 1);
    CHECK(predict(m, lags.predictors).norm() == 0.0);
    DenseTensor res = residuals(m, y);
    CHECK((res.data() - lags.responses.data()).norm() == 0.0);
}

TEST_CASE("predict agrees with the per-lag tensor contraction route") {
    Rng rng(213);
    const Index p = 2;
    RRMARModel m = random_model(rng, 3, 2, {2, 2, 2, 2}, p);
    MatrixSeries y = random_series(rng, 3, 2, 9);
    StackedLags lags = stack_lags(y, p);
    DenseTensor fast = predict(m, lags.predictors);

    for (Index s = 0; s < lags.responses.dim(2); ++s) {
        Matrix acc = Matrix::Zero(3, 2);
        for (Index l = 0; l < p; ++l) {
            DenseTensor y_slice({3, 2});
            for (Index j = 0; j < 2; ++j) {
                for (Index i = 0; i < 3; ++i) y_slice({i, j}) = lags.predictors({i, j, l, s});
            }
            DenseTensor contrib = contract(m.lag_coefficient(l), y_slice, 2);
            acc += Eigen::Map<const Matrix>(contrib.data().data(), 3, 2);
        }
        for (Index j = 0; j < 2; ++j) {
            for (Index i = 0; i < 3; ++i) {
                CHECK(fast({i, j, s}) == doctest::Approx(acc(i, j)).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("noiseless simulated data has zero residuals at the truth") {
    SimulationSpec spec;
    spec.n1 = 3;
    spec.n2 = 2;
    spec.ranks = {2, 1, 2, 1};
    spec.p = 1;
    spec.T = 30;
    spec.burn_in = 0;
    spec.snr_target = 0.9;
    spec.noise_scale = 0.0;
    spec.seed = 99;
    SimulationResult sim = simulate(spec);
    DenseTensor res = residuals(sim.truth, sim.series);
    CHECK(res.data().cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("is_stationary worked cases") {
    RRMARModel zero = RRMARModel::zero(2, 2, {1, 1, 1, 1}, 1);
    CHECK(is_stationary(zero));
    CHECK_FALSE(is_stationary(scaled_identity_model(2, 2, 1.0)));
    CHECK(is_stationary(scaled_identity_model(2, 2, 0.5)));
}

TEST_CASE("snr worked cases and spectral oracle") {
    RRMARModel m = scaled_identity_model(2, 2, 0.7);
    CHECK(snr(m) == doctest::Approx(0.7).epsilon(1e-12));
    m.sigma_e *= 2.0;
    CHECK(snr(m) == doctest::Approx(0.35).epsilon(1e-12));

    Rng rng(217);
    RRMARModel r = random_model(rng, 3, 2, {2, 2, 2, 2}, 1);
    Matrix cov = random_orthonormal(rng, 6, 6);
    Vector evals(6);
    for (Index i = 0; i < 6; ++i) evals[i] = 0.5 + rng.uniform();
    r.sigma_e = cov * evals.asDiagonal() * cov.transpose();
    // Brute-force spectral oracle: power-iteration-free exact eigenvalues of
    // A^T A and of sigma_e.
    const Matrix a = coefficient_matrix(r);
    Eigen::SelfAdjointEigenSolver<Matrix> ata(a.transpose() * a);
    Eigen::SelfAdjointEigenSolver<Matrix> sig(r.sigma_e);
    const double expected = std::sqrt(ata.eigenvalues().maxCoeff()) / sig.eigenvalues().maxCoeff();
    CHECK(snr(r) == doctest::Approx(expected).epsilon(1e-10));

    r.sigma_e = Matrix::Zero(6, 6);
    CHECK_THROWS_AS(snr(r), std::invalid_argument);
}

TEST_CASE("simulate shape, snr calibration and determinism") {
    SimulationSpec spec;
    spec.n1 = 4;
    spec.n2 = 3;
    spec.ranks = {1, 1, 1, 1};
    spec.p = 1;
    spec.T = 100;
    spec.burn_in = 50;
    spec.snr_target = 0.7;
    spec.seed = 7;

    SimulationResult a = simulate(spec);
    CHECK(a.series.n1() == 4);
    CHECK(a.series.n2() == 3);
    CHECK(a.series.length() == 100);
    CHECK(snr(a.truth) == doctest::Approx(0.7).epsilon(1e-8));
    CHECK(is_stationary(a.truth));

    SimulationResult b = simulate(spec);
    CHECK((a.series.values().data() - b.series.values().data()).norm() == 0.0);
    for (Index i = 0; i < a.truth.cores[0].size(); ++i) {
        CHECK(a.truth.cores[0][i] == b.truth.cores[0][i]);
    }

    spec.seed = 8;
    SimulationResult c = simulate(spec);
    CHECK((a.series.values().data() - c.series.values().data()).norm() > 0.0);
}

TEST_CASE("simulated innovations are white at positive lags (seed-fixed)") {
    SimulationSpec spec;
    spec.n1 = 4;
    spec.n2 = 3;
    spec.ranks = {2, 2, 2, 2};
    spec.p = 1;
    spec.T = 500;
    spec.seed = 37;
    SimulationResult sim = simulate(spec);

    // Exact innovations recovered through the true model.
    DenseTensor res = residuals(sim.truth, sim.series);
    const Index d = 12, s_len = res.dim(2);
    Eigen::Map<const Matrix> e(res.data().data(), d, s_len);
    const double bound = 3.0 / std::sqrt(static_cast<double>(s_len));
    for (Index lag = 1; lag <= 2; ++lag) {
        Matrix cov = Matrix::Zero(d, d);
        for (Index t = lag; t < s_len; ++t) cov += e.col(t) * e.col(t - lag).transpose();
        cov /= static_cast<double>(s_len - lag);
        CHECK(cov.cwiseAbs().maxCoeff() < bound);
    }
}

TEST_CASE("full-rank identity-factor model reproduces a plain VAR") {
    Rng rng(223);
    const Index n1 = 2, n2 = 2, d = 4;
    Matrix coeff(d, d);
    for (Index j = 0; j < d; ++j) {
        for (Index i = 0; i < d; ++i) coeff(i, j) = 0.2 * rng.normal();
    }
    RRMARModel m = RRMARModel::from_var_coefficient(n1, n2, 1, coeff);
    CHECK((coefficient_matrix(m) - coeff).norm() < 1e-14);

    MatrixSeries y = random_series(rng, n1, n2, 8);
    StackedLags lags = stack_lags(y, 1);
    DenseTensor fitted = predict(m, lags.predictors);
    for (Index s = 0; s < lags.responses.dim(2); ++s) {
        Vector expected = coeff * y.vec_observation(s);
        Vector got = fitted.data().segment(s * d, d);
        CHECK((got - expected).norm() < 1e-12);
    }
}

TEST_CASE("generation failure surfaces as an error") {
    SimulationSpec spec;
    spec.n1 = 2;
    spec.n2 = 2;
    spec.ranks = {2, 2, 2, 2};
    spec.T = 10;
    spec.seed = 5;
    // sigma_max(A) = 50 puts every eigenvalue of a generic draw far outside
    // the unit circle, so all 100 attempts are rejected.
    spec.snr_target = 50.0;
    CHECK_THROWS_AS(simulate(spec), GenerationError);
}
