#include <random>

#include <gtest/gtest.h>

#include "latentedit/pca.hpp"
#include "test_util.hpp"

using namespace latentedit;

namespace {

Matrix planted_diag41(std::uint64_t seed, long n) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.0, 1.0);
    Matrix x(n, 2);
    for (long i = 0; i < n; ++i) {
        x(i, 0) = 2.0 * d(rng);
        x(i, 1) = d(rng);
    }
    return x;
}

Matrix correlated_data(std::uint64_t seed, long n, long m) {
    std::mt19937_64 rng(seed);
    const Matrix mixing = testutil::random_matrix(rng, m, m);
    Matrix x = testutil::random_matrix(rng, n, m) * mixing;
    x.rowwise() += testutil::random_matrix(rng, 1, m).row(0);
    return x;
}

}  // namespace

TEST(Pca, PlantedCovarianceIsRecovered) {
    const PcaModel model = fit_pca(planted_diag41(3, 1000), 1);
    EXPECT_NEAR(model.eigenvalues(0), 4.0, 0.15 * 4.0);
    EXPECT_NEAR(model.eigenvalues(1), 1.0, 0.15);
    EXPECT_NEAR(model.eigenvalues(0) / model.eigenvalues(1), 4.0, 0.15 * 4.0);
    EXPECT_GT(std::abs(model.basis(0, 0)), 0.99);
    EXPECT_GT(std::abs(model.basis(1, 1)), 0.99);
    EXPECT_NEAR(explained_variance_fraction(model, 1), 0.8, 0.05);
    EXPECT_DOUBLE_EQ(explained_variance_fraction(model, 2), 1.0);
}

TEST(Pca, SignConventionLargestEntryPositive) {
    const PcaModel model = fit_pca(correlated_data(4, 300, 12), 5);
    for (long j = 0; j < model.basis.cols(); ++j) {
        long arg = 0;
        model.basis.col(j).cwiseAbs().maxCoeff(&arg);
        EXPECT_GT(model.basis(arg, j), 0.0);
    }
}

TEST(Pca, InvariantsHoldOnRandomData) {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const long m = 4 + static_cast<long>(seed) * 3;
        const Matrix data = correlated_data(seed, 200 + 20 * static_cast<long>(seed), m);
        const PcaModel model = fit_pca(data, m / 2);
        const Matrix gram = model.basis.transpose() * model.basis;
        EXPECT_LE((gram - Matrix::Identity(m, m)).cwiseAbs().maxCoeff(), 1e-8);
        for (long i = 1; i < m; ++i) EXPECT_LE(model.eigenvalues(i), model.eigenvalues(i - 1));
        EXPECT_GE(model.eigenvalues.minCoeff(), 0.0);
        const double trace = covariance(data, model.mean).trace();
        EXPECT_LE(std::abs(model.eigenvalues.sum() - trace) / trace, 1e-6);
    }
}

TEST(Pca, ProjectReconstructRoundTrip) {
    std::mt19937_64 rng(9);
    const Matrix data = correlated_data(9, 400, 10);
    for (long d = 1; d <= 10; ++d) {
        const PcaModel model = fit_pca(data, d);
        for (int t = 0; t < 10; ++t) {
            const Vector w = testutil::random_matrix(rng, 10, 1, 3.0);
            const PcaSplit s = project(model, w);
            ASSERT_EQ(s.top.size(), d);
            ASSERT_EQ(s.residual.size(), 10 - d);
            EXPECT_LE((reconstruct(model, s) - w).cwiseAbs().maxCoeff(), 1e-8);
        }
    }
}

TEST(Pca, MeanAndBasisVectors) {
    const PcaModel model = fit_pca(correlated_data(2, 300, 6), 3);
    const PcaSplit at_mean = project(model, model.mean);
    EXPECT_LE(at_mean.top.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE(at_mean.residual.cwiseAbs().maxCoeff(), 1e-12);

    const PcaSplit first = project(model, model.mean + model.basis.col(0));
    EXPECT_NEAR(first.top(0), 1.0, 1e-12);
    EXPECT_LE(first.top.tail(2).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE(first.residual.cwiseAbs().maxCoeff(), 1e-12);

    EXPECT_LE((reconstruct(model, PcaSplit{Vector::Zero(3), Vector::Zero(3)}) - model.mean).norm(), 1e-12);
}

TEST(Pca, ReconstructIsLinearInTop) {
    std::mt19937_64 rng(1);
    const PcaModel model = fit_pca(correlated_data(1, 200, 5), 2);
    const Vector top = testutil::random_matrix(rng, 2, 1);
    const Vector a = reconstruct(model, {top, Vector::Zero(3)});
    const Vector b = reconstruct(model, {2.0 * top, Vector::Zero(3)});
    EXPECT_NEAR((b - model.mean).norm(), 2.0 * (a - model.mean).norm(), 1e-12);
}

TEST(Pca, TruncationParsevalAndIdempotence) {
    std::mt19937_64 rng(2);
    const PcaModel model = fit_pca(correlated_data(5, 300, 8), 3);
    for (int t = 0; t < 10; ++t) {
        const Vector w = testutil::random_matrix(rng, 8, 1, 2.0);
        const Vector tw = truncate_residual(model, w);
        const PcaSplit s = project(model, w);
        EXPECT_NEAR((tw - w).squaredNorm(), s.residual.squaredNorm(), 1e-9);
        EXPECT_LE((truncate_residual(model, tw) - tw).cwiseAbs().maxCoeff(), 1e-10);
    }
    EXPECT_LE((truncate_residual(model, model.mean) - model.mean).norm(), 1e-12);
    const Vector in_span = model.mean + model.basis.leftCols(3) * Vector::LinSpaced(3, -1.0, 2.0);
    EXPECT_LE((truncate_residual(model, in_span) - in_span).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Pca, ConstantDataFallsBackToIdentity) {
    Matrix data(5, 3);
    data.rowwise() = Eigen::RowVector3d(1.0, -2.0, 0.5);
    const PcaModel model = fit_pca(data, 2);
    EXPECT_EQ(model.eigenvalues, Vector::Zero(3));
    EXPECT_EQ(model.basis, Matrix::Identity(3, 3));
    EXPECT_EQ(model.mean, Vector(data.row(0).transpose()));
}

TEST(Pca, Deterministic) {
    const Matrix data = correlated_data(7, 150, 9);
    const PcaModel a = fit_pca(data, 4);
    const PcaModel b = fit_pca(data, 4);
    EXPECT_EQ(a.basis, b.basis);
    EXPECT_EQ(a.eigenvalues, b.eigenvalues);
    EXPECT_EQ(a.mean, b.mean);
}

TEST(Pca, Errors) {
    EXPECT_THROW_CODE(fit_pca(Matrix::Zero(1, 3), 1), ErrorCode::DegenerateData);
    EXPECT_THROW_CODE(fit_pca(Matrix::Zero(5, 3), 4), ErrorCode::ConfigInvalid);
    Matrix bad = Matrix::Zero(5, 3);
    bad(2, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW_CODE(fit_pca(bad, 1), ErrorCode::NonFinite);

    const PcaModel model = fit_pca(correlated_data(1, 50, 4), 2);
    EXPECT_THROW_CODE(project(model, Vector::Zero(5)), ErrorCode::DimensionMismatch);
    EXPECT_THROW_CODE(reconstruct(model, {Vector::Zero(3), Vector::Zero(2)}), ErrorCode::DimensionMismatch);
    EXPECT_THROW_CODE(truncate_residual(model, Vector::Zero(3)), ErrorCode::DimensionMismatch);
    EXPECT_THROW_CODE(explained_variance_fraction(model, 0), ErrorCode::OutOfRange);
}
