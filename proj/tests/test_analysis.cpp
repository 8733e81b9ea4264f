#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rrmar/analysis.hpp"
#include "rrmar/errors.hpp"
#include "rrmar/estimator.hpp"
#include "rrmar/model.hpp"
#include "rrmar/rng.hpp"
#include "rrmar/tensor.hpp"
#include "rrmar/tucker.hpp"

using namespace rrmar;

namespace {

Matrix random_orthonormal(Rng& rng, Index n, Index r) {
    Matrix raw(n, r);
    for (Index j = 0; j < r; ++j) {
        for (Index i = 0; i < n; ++i) raw(i, j) = rng.normal();
    }
    return leading_left_singular_vectors(raw, r);
}

}  // namespace

TEST_CASE("null_complement of a coordinate subspace spans the remaining coordinates") {
    Matrix u = Matrix::Identity(4, 2);
    Matrix comp = null_complement(u);
    CHECK(comp.rows() == 4);
    CHECK(comp.cols() == 2);
    // Same projector as the remaining coordinate columns.
    Matrix expected = Matrix::Zero(4, 4);
    expected(2, 2) = expected(3, 3) = 1.0;
    CHECK((comp * comp.transpose() - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("null_complement: defining properties on random factors") {
    Rng rng(501);
    for (int rep = 0; rep < 5; ++rep) {
        Matrix u = random_orthonormal(rng, 5, 2);
        Matrix comp = null_complement(u);
        CHECK(comp.cols() == 3);
        CHECK((comp.transpose() * comp - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((comp.transpose() * u).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("null_complement of a square factor is zero width, N=4 r=3 gives one vector") {
    Rng rng(503);
    Matrix full = random_orthonormal(rng, 3, 3);
    CHECK(null_complement(full).cols() == 0);

    Matrix u = random_orthonormal(rng, 4, 3);
    Matrix comp = null_complement(u);
    CHECK(comp.cols() == 1);  // a single co-movement relation between four series

    Matrix skewed = u;
    skewed(0, 0) += 0.5;
    CHECK_THROWS_AS(null_complement(skewed), std::invalid_argument);
}

TEST_CASE("normalize_null scales a single vector by its pivot entry") {
    Matrix v(3, 1);
    v << 2, 4, -1;
    Matrix n = normalize_null(v, 1);
    CHECK(n(0, 0) == doctest::Approx(0.5));
    CHECK(n(1, 0) == doctest::Approx(1.0));
    CHECK(n(2, 0) == doctest::Approx(-0.25));
}

TEST_CASE("normalize_null places an identity block on the non-pivot rows") {
    Rng rng(509);
    // N = 5, r = 1 setup as in the five-country example.
    Matrix u = random_orthonormal(rng, 5, 1);
    Matrix gamma = null_complement(u);
    REQUIRE(gamma.cols() == 4);
    Matrix star = normalize_null(gamma, 0);
    // Rows 1..4 form the identity, row 0 carries the scales.
    CHECK((star.bottomRows(4) - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);
    // Still spans the null space of u.
    CHECK((star.transpose() * u).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("normalize_null is idempotent") {
    Matrix v(4, 1);
    v << 1.0, 0.25, -0.5, 2.0;
    Matrix once = normalize_null(v, 0);
    Matrix twice = normalize_null(once, 0);
    CHECK((once - twice).cwiseAbs().maxCoeff() < 1e-14);

    Rng rng(511);
    Matrix gamma = null_complement(random_orthonormal(rng, 5, 1));
    Matrix star = normalize_null(gamma, 2);
    CHECK((normalize_null(star, 2) - star).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("normalize_null rejects a zero pivot and names usable rows") {
    Matrix v(3, 1);
    v << 0.0, 1.0, 2.0;
    try {
        normalize_null(v, 0);
        FAIL("expected PivotError");
    } catch (const PivotError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("1") != std::string::npos);
        CHECK(msg.find("2") != std::string::npos);
    }
    CHECK_THROWS_AS(normalize_null(v, 7), std::invalid_argument);
}

TEST_CASE("sccf series equal the white-noise combination on simulated data") {
    SimulationSpec spec;
    spec.n1 = 4;
    spec.n2 = 5;
    spec.ranks = {3, 1, 4, 3};
    spec.T = 200;
    spec.seed = 521;
    SimulationResult sim = simulate(spec);

    auto rows = sccf_series(sim.truth, sim.series, Side::Rows);
    REQUIRE(rows.has_value());
    CHECK(rows->shape() == std::vector<Index>{1, 5, 200});

    // delta^T Y_t = delta^T E_t: compare against the innovations recovered
    // from the true model on the usable window.
    const Matrix delta = null_complement(sim.truth.u1);
    DenseTensor res = residuals(sim.truth, sim.series);
    for (Index s = 0; s < res.dim(2); ++s) {
        Matrix e(4, 5);
        for (Index j = 0; j < 5; ++j) {
            for (Index i = 0; i < 4; ++i) e(i, j) = res({i, j, s});
        }
        const Matrix expect = delta.transpose() * e;
        for (Index j = 0; j < 5; ++j) {
            CHECK((*rows)({0, j, s + 1}) == doctest::Approx(expect(0, j)).epsilon(1e-9));
        }
    }

    auto cols = sccf_series(sim.truth, sim.series, Side::Cols);
    REQUIRE(cols.has_value());
    CHECK(cols->shape() == std::vector<Index>{4, 4, 200});
}

TEST_CASE("sccf series is empty on a full-rank side") {
    SimulationSpec spec;
    spec.n1 = 3;
    spec.n2 = 2;
    spec.ranks = {3, 2, 3, 2};
    spec.T = 60;
    spec.seed = 523;
    SimulationResult sim = simulate(spec);
    CHECK_FALSE(sccf_series(sim.truth, sim.series, Side::Rows).has_value());
    CHECK_FALSE(sccf_series(sim.truth, sim.series, Side::Cols).has_value());
}

TEST_CASE("sccf whiteness: autocorrelations stay inside the band") {
    SimulationSpec spec;
    spec.n1 = 4;
    spec.n2 = 5;
    spec.ranks = {3, 1, 4, 3};
    spec.T = 500;
    Index within = 0, total = 0;
    for (std::uint64_t seed = 600; seed < 605; ++seed) {
        spec.seed = seed;
        SimulationResult sim = simulate(spec);
        auto rows = sccf_series(sim.truth, sim.series, Side::Rows);
        REQUIRE(rows.has_value());
        const double band = 2.0 / std::sqrt(500.0);
        for (Index j = 0; j < rows->dim(1); ++j) {
            Vector series(rows->dim(2));
            for (Index t = 0; t < rows->dim(2); ++t) series[t] = (*rows)({0, j, t});
            for (double ac : autocorrelations(series, 10)) {
                ++total;
                if (std::abs(ac) <= band) ++within;
            }
        }
    }
    CHECK(static_cast<double>(within) / static_cast<double>(total) >= 0.9);
}

TEST_CASE("factors: identity factors reproduce the raw data") {
    Rng rng(531);
    DenseTensor values({3, 2, 8});
    for (Index i = 0; i < values.size(); ++i) values[i] = rng.normal();
    MatrixSeries y(values);
    RRMARModel m = RRMARModel::from_var_coefficient(3, 2, 1, 0.5 * Matrix::Identity(6, 6));

    DenseTensor resp = response_factors(m, y);
    CHECK((resp.data() - values.data()).norm() == 0.0);

    DenseTensor pred = predictor_factors(m, y);
    CHECK(pred.shape() == std::vector<Index>{3, 2, 1, 7});
    StackedLags lags = stack_lags(y, 1);
    CHECK((pred.data() - lags.predictors.data()).norm() == 0.0);
}

TEST_CASE("predictor factor shape follows the ranks") {
    SimulationSpec spec;
    spec.n1 = 4;
    spec.n2 = 5;
    spec.ranks = {3, 1, 4, 3};
    spec.T = 50;
    spec.seed = 533;
    SimulationResult sim = simulate(spec);
    DenseTensor pred = predictor_factors(sim.truth, sim.series);
    CHECK(pred.shape() == std::vector<Index>{4, 3, 1, 49});
    DenseTensor resp = response_factors(sim.truth, sim.series);
    CHECK(resp.shape() == std::vector<Index>{3, 1, 50});
}

TEST_CASE("factor VAR reproduces the projected fitted values") {
    SimulationSpec spec;
    spec.n1 = 4;
    spec.n2 = 3;
    spec.ranks = {2, 2, 2, 2};
    spec.p = 2;
    spec.T = 80;
    spec.seed = 541;
    SimulationResult sim = simulate(spec);
    const RRMARModel& m = sim.truth;

    const std::vector<Matrix> g = factor_var(m);
    REQUIRE(g.size() == 2);
    CHECK(g[0].rows() == 4);
    CHECK(g[0].cols() == 4);

    StackedLags lags = stack_lags(sim.series, m.p);
    DenseTensor fitted = predict(m, lags.predictors);
    DenseTensor pred_f = predictor_factors(m, sim.series);

    for (Index s = 0; s < lags.responses.dim(2); ++s) {
        // Response factors of the fitted value, via the factor VAR.
        Vector acc = Vector::Zero(4);
        for (Index l = 0; l < m.p; ++l) {
            Vector f(4);
            for (Index j = 0; j < 2; ++j) {
                for (Index i = 0; i < 2; ++i) f[i + 2 * j] = pred_f({i, j, l, s});
            }
            acc += g[static_cast<std::size_t>(l)] * f;
        }
        Matrix yhat(4, 3);
        for (Index j = 0; j < 3; ++j) {
            for (Index i = 0; i < 4; ++i) yhat(i, j) = fitted({i, j, s});
        }
        const Matrix proj = m.u1.transpose() * yhat * m.u2;
        for (Index j = 0; j < 2; ++j) {
            for (Index i = 0; i < 2; ++i) {
                CHECK(acc[i + 2 * j] == doctest::Approx(proj(i, j)).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("factor_var core shapes for ranks (3,1,4,3)") {
    Rng rng(547);
    RRMARModel m;
    m.ranks = {3, 1, 4, 3};
    m.p = 1;
    m.u1 = random_orthonormal(rng, 4, 3);
    m.u2 = random_orthonormal(rng, 5, 1);
    m.u3 = random_orthonormal(rng, 4, 4);
    m.u4 = random_orthonormal(rng, 5, 3);
    m.cores.push_back(DenseTensor({3, 1, 4, 3}));
    m.sigma_e = Matrix::Identity(20, 20);
    const std::vector<Matrix> g = factor_var(m);
    CHECK(g[0].rows() == 3);
    CHECK(g[0].cols() == 12);
}

TEST_CASE("projection: identity, defining properties, trace") {
    CHECK((projection(Matrix::Identity(4, 4)) - Matrix::Identity(4, 4)).norm() == 0.0);
    Rng rng(551);
    Matrix u = random_orthonormal(rng, 6, 3);
    Matrix p = projection(u);
    CHECK((p - p.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((p * p - p).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(p.trace() == doctest::Approx(3.0).epsilon(1e-10));
    Matrix bad = u;
    bad(0, 0) += 1.0;
    CHECK_THROWS_AS(projection(bad), std::invalid_argument);
}

TEST_CASE("projection matrices are rotation invariant") {
    Rng rng(557);
    Matrix u = random_orthonormal(rng, 5, 2);
    Matrix o = random_orthonormal(rng, 2, 2);
    CHECK((projection(u) - projection(u * o)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("comovement report invariants on a fitted model") {
    SimulationSpec spec;
    spec.n1 = 4;
    spec.n2 = 5;
    spec.ranks = {3, 1, 4, 3};
    spec.T = 400;
    spec.seed = 563;
    SimulationResult sim = simulate(spec);
    FitResult fr = fit(sim.series, spec.ranks, 1, FitConfig{});
    const RRMARModel& m = fr.model;
    ComovementReport rep = comovement_report(m, sim.series);

    // Null-space identities.
    CHECK((rep.delta.transpose() * m.u1).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((rep.gamma.transpose() * m.u2).cwiseAbs().maxCoeff() < 1e-8);
    const Matrix a = coefficient_matrix(m);
    CHECK((kron(rep.gamma, rep.delta).transpose() * a).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((kron(rep.gamma, rep.delta).transpose() * kron(m.u2, m.u1)).cwiseAbs().maxCoeff() <
          1e-8);
    // Right-side null relation through the predictor factor complement.
    const Matrix right = null_complement(kron(m.u4, m.u3));
    CHECK((a * kron(Matrix::Identity(m.p, m.p), right)).cwiseAbs().maxCoeff() < 1e-8);

    // Projection invariants with stated tolerances.
    const Index expected_trace[4] = {3, 1, 4, 3};
    for (int k = 0; k < 4; ++k) {
        const Matrix& p = rep.projections[static_cast<std::size_t>(k)];
        CHECK((p - p.transpose()).cwiseAbs().maxCoeff() < 1e-8);
        CHECK((p * p - p).cwiseAbs().maxCoeff() < 1e-8);
        CHECK(std::abs(p.trace() - expected_trace[k]) < 1e-6);
    }

    // Normalized variants keep the null property.
    CHECK((rep.delta_star.transpose() * m.u1).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(rep.gamma_star.rows() == 5);
    CHECK(rep.gamma_star.cols() == 4);
    CHECK(rep.response_factor_series.shape() == std::vector<Index>{3, 1, 400});
    CHECK(rep.predictor_factor_series.shape() == std::vector<Index>{4, 3, 1, 399});
    CHECK(rep.factor_var_cores.size() == 1);
}

TEST_CASE("factor series rotation-pair invariance through projected fits") {
    // Rotating (U3, core) jointly changes individual factor series but not the
    // projected fitted values they generate.
    Rng rng(569);
    SimulationSpec spec;
    spec.n1 = 3;
    spec.n2 = 2;
    spec.ranks = {2, 2, 2, 2};
    spec.T = 40;
    spec.seed = 571;
    SimulationResult sim = simulate(spec);
    RRMARModel m = sim.truth;

    Matrix o = random_orthonormal(rng, 2, 2);
    RRMARModel rotated = m;
    rotated.u3 = m.u3 * o.transpose();
    rotated.cores[0] = mode_product(m.cores[0], o, 2);

    StackedLags lags = stack_lags(sim.series, 1);
    DenseTensor f1 = predict(m, lags.predictors);
    DenseTensor f2 = predict(rotated, lags.predictors);
    CHECK((f1.data() - f2.data()).cwiseAbs().maxCoeff() < 1e-10);
}
