#pragma once

#include <Eigen/Eigenvalues>

#include "latentedit/types.hpp"

namespace latentedit {

/// Full orthogonal PCA basis with a split into `split` leading components
/// and the trailing complement.
struct PcaModel {
    Vector mean;         // m
    Matrix basis;        // m x m, columns are components, descending variance
    Vector eigenvalues;  // m, non-increasing, >= 0
    Index split = 0;     // d
    Index n_fit = 0;

    Index dim() const { return mean.size(); }
    Index residual_dim() const { return dim() - split; }
};

/// Coordinates of one latent in the PCA frame.
struct PcaSplit {
    Vector top;       // d leading coordinates
    Vector residual;  // m - d trailing coordinates
};

namespace pca_detail {

// Flip each column so that its largest-magnitude entry is positive.
inline void canonicalize_signs(Matrix& basis) {
    for (Index j = 0; j < basis.cols(); ++j) {
        Index arg = 0;
        basis.col(j).cwiseAbs().maxCoeff(&arg);
        if (basis(arg, j) < 0) basis.col(j) = -basis.col(j);
    }
}

}  // namespace pca_detail

/// Sample covariance with divisor n-1.
inline Matrix covariance(const Matrix& data, const Vector& mean) {
    Matrix centered = data.rowwise() - mean.transpose();
    Matrix cov = centered.transpose() * centered / static_cast<double>(data.rows() - 1);
    return (cov + cov.transpose()) * 0.5;
}

inline PcaModel fit_pca(const Matrix& data, Index d) {
    const Index n = data.rows();
    const Index m = data.cols();
    if (n < 2) fail(ErrorCode::DegenerateData, "PCA needs at least 2 samples, got " + std::to_string(n));
    if (d < 1 || d > m)
        fail(ErrorCode::ConfigInvalid, "PCA split d=" + std::to_string(d) + " outside [1, " + std::to_string(m) + "]");
    require(data.allFinite(), ErrorCode::NonFinite, "PCA input has non-finite entries");

    PcaModel model;
    model.split = d;
    model.n_fit = n;
    model.mean = data.colwise().mean().transpose();
    const Matrix cov = covariance(data, model.mean);

    if (cov.trace() <= 0.0) {
        model.basis = Matrix::Identity(m, m);
        model.eigenvalues = Vector::Zero(m);
        return model;
    }

    Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
    if (solver.info() != Eigen::Success) fail(ErrorCode::NonFinite, "covariance eigendecomposition did not converge");

    // Eigen returns ascending order.
    model.basis = solver.eigenvectors().rowwise().reverse();
    model.eigenvalues = solver.eigenvalues().reverse().cwiseMax(0.0);
    pca_detail::canonicalize_signs(model.basis);
    return model;
}

inline PcaSplit project(const PcaModel& model, const Vector& w) {
    require_dim(w.size(), model.dim(), "project: latent length");
    const Vector t = model.basis.transpose() * (w - model.mean);
    return {t.head(model.split), t.tail(model.residual_dim())};
}

/// Batched projection onto the leading components only (rows are samples).
inline Matrix project_top(const PcaModel& model, const Matrix& latents) {
    require_dim(latents.cols(), model.dim(), "project_top: latent length");
    return (latents.rowwise() - model.mean.transpose()) * model.basis.leftCols(model.split);
}

inline Vector reconstruct(const PcaModel& model, const PcaSplit& split) {
    require_dim(split.top.size(), model.split, "reconstruct: top length");
    require_dim(split.residual.size(), model.residual_dim(), "reconstruct: residual length");
    return model.mean + model.basis.leftCols(model.split) * split.top +
           model.basis.rightCols(model.residual_dim()) * split.residual;
}

inline double explained_variance_fraction(const PcaModel& model, Index d) {
    if (d < 1 || d > model.dim()) fail(ErrorCode::OutOfRange, "explained variance: d out of range");
    const double total = model.eigenvalues.sum();
    if (total <= 0.0) return 1.0;
    return model.eigenvalues.head(d).sum() / total;
}

/// Reconstruction with the trailing coordinates zeroed.
inline Vector truncate_residual(const PcaModel& model, const Vector& w) {
    PcaSplit s = project(model, w);
    s.residual.setZero();
    return reconstruct(model, s);
}

}  // namespace latentedit
