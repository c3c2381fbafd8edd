#pragma once

#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include <Eigen/Eigenvalues>

#include "latentedit/editor.hpp"
#include "latentedit/oracle.hpp"

namespace latentedit {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Edits of one attribute toward positive; only successful pairs are kept.
struct EditPairs {
    Index attribute = 0;
    Index sampled = 0;
    Index negatives = 0;
    Index successes = 0;
    std::vector<Vector> before;
    std::vector<Vector> after;

    /// Well-edited rate; NaN when no negatives were found.
    double rate() const {
        return negatives == 0 ? kNaN : static_cast<double>(successes) / static_cast<double>(negatives);
    }
};

/// Runs the editing protocol for attribute k over the given samples.
template <StepEditor E, typename Classifier>
EditPairs build_edit_pairs(const E& editor, const Matrix& samples, Index k, Classifier&& classify, double threshold = 0.9) {
    EditPairs out;
    out.attribute = k;
    out.sampled = samples.rows();
    for (Index i = 0; i < samples.rows(); ++i) {
        const Vector w = samples.row(i).transpose();
        const Vector a = classify(w);
        if (!std::isfinite(a(k))) fail(ErrorCode::OracleFailure, "classifier returned a non-finite value");
        if (!(a(k) < kNegativeBelow)) continue;
        ++out.negatives;
        SearchResult r = amplitude_search(editor, w, k, classify, threshold);
        if (!r.success) continue;
        ++out.successes;
        out.before.push_back(w);
        out.after.push_back(std::move(r.edited));
    }
    return out;
}

/// Synthetic-world variant: draws n latents with `seed`.
template <StepEditor E>
EditPairs build_edit_pairs(const E& editor, const SyntheticWorld& world, Index n, Index k, double threshold,
                           std::uint64_t seed) {
    const Matrix samples = sample_w(world, n, seed);
    return build_edit_pairs(editor, samples, k, [&world](const Vector& w) { return classify(world, w); }, threshold);
}

/// Row k holds the mean change of every attribute when attribute k is edited.
/// Rows without pairs are NaN. Divides by the kept pair count.
template <typename Classifier>
Matrix variation_matrix(const std::vector<EditPairs>& pairs, Index num_attributes, Classifier&& classify) {
    Matrix mat = Matrix::Constant(static_cast<Index>(pairs.size()), num_attributes, kNaN);
    for (std::size_t r = 0; r < pairs.size(); ++r) {
        const auto& p = pairs[r];
        if (p.before.empty()) continue;
        Vector acc = Vector::Zero(num_attributes);
        for (std::size_t i = 0; i < p.before.size(); ++i) acc += classify(p.after[i]) - classify(p.before[i]);
        mat.row(static_cast<Index>(r)) = acc.transpose() / static_cast<double>(p.before.size());
    }
    return mat;
}

inline double off_diagonal_sum(const Matrix& mat, const std::set<Index>& excluded_rows = {}) {
    require(mat.rows() == mat.cols(), ErrorCode::DimensionMismatch, "off_diagonal_sum needs a square matrix");
    double s = 0.0;
    for (Index k = 0; k < mat.rows(); ++k) {
        if (excluded_rows.count(k)) continue;
        for (Index l = 0; l < mat.cols(); ++l)
            if (l != k) s += std::abs(mat(k, l));
    }
    return s;
}

inline double mean_abs_off_diagonal(const Matrix& mat, const std::set<Index>& excluded_rows = {}) {
    const Index rows = mat.rows() - static_cast<Index>(excluded_rows.size());
    const Index count = rows * (mat.cols() - 1);
    return count > 0 ? off_diagonal_sum(mat, excluded_rows) / static_cast<double>(count) : kNaN;
}

struct IdentityScore {
    double mean_cosine = kNaN;
    Index used = 0;
    Index skipped = 0;  // pairs with a zero-norm embedding
};

/// Mean cosine between embeddings before and after each edit.
template <typename Embedder>
IdentityScore identity_similarity(const EditPairs& pairs, Embedder&& embed) {
    IdentityScore s;
    if (pairs.before.empty()) return s;
    double acc = 0.0;
    for (std::size_t i = 0; i < pairs.before.size(); ++i) {
        const Vector a = embed(pairs.before[i]);
        const Vector b = embed(pairs.after[i]);
        const double na = a.norm();
        const double nb = b.norm();
        if (na == 0.0 || nb == 0.0) {
            ++s.skipped;
            continue;
        }
        acc += a.dot(b) / (na * nb);
        ++s.used;
    }
    if (s.used == 0) fail(ErrorCode::AllZeroEmbeddings, "every embedding in the pair set has zero norm");
    s.mean_cosine = acc / static_cast<double>(s.used);
    return s;
}

/// Tolerance for negative eigenvalues clamped in the matrix square root.
inline constexpr double kPsdTolerance = 1e-6;

namespace eval_detail {

inline Eigen::SelfAdjointEigenSolver<Matrix> checked_eig(const Matrix& s, const char* what) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig((s + s.transpose()) * 0.5);
    if (eig.info() != Eigen::Success) fail(ErrorCode::NonFinite, std::string(what) + ": eigendecomposition failed");
    const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    if (eig.eigenvalues().minCoeff() < -kPsdTolerance * scale)
        fail(ErrorCode::NonPSD, std::string(what) + ": eigenvalue " + std::to_string(eig.eigenvalues().minCoeff()));
    return eig;
}

}  // namespace eval_detail

/// Frechet distance between Gaussian fits of two sample sets (rows are samples).
inline double frechet_distance(const Matrix& a, const Matrix& b) {
    require_dim(b.cols(), a.cols(), "frechet_distance: feature width");
    const Index dim = a.cols();
    if (a.rows() < dim + 1 || b.rows() < dim + 1)
        fail(ErrorCode::TooFewSamples, "frechet_distance needs at least dim + 1 samples per set");

    const Vector mu_a = a.colwise().mean().transpose();
    const Vector mu_b = b.colwise().mean().transpose();
    const Matrix ca = a.rowwise() - mu_a.transpose();
    const Matrix cb = b.rowwise() - mu_b.transpose();
    const Matrix sigma_a = ca.transpose() * ca / static_cast<double>(a.rows() - 1);
    const Matrix sigma_b = cb.transpose() * cb / static_cast<double>(b.rows() - 1);

    const auto eig_a = eval_detail::checked_eig(sigma_a, "covariance A");
    const Vector root_vals = eig_a.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Matrix sqrt_a = eig_a.eigenvectors() * root_vals.asDiagonal() * eig_a.eigenvectors().transpose();
    const auto eig_m = eval_detail::checked_eig(sqrt_a * sigma_b * sqrt_a, "sqrt(A) B sqrt(A)");
    const double trace_root = eig_m.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();

    const double fd = (mu_a - mu_b).squaredNorm() + sigma_a.trace() + sigma_b.trace() - 2.0 * trace_root;
    return std::max(0.0, fd);
}

}  // namespace latentedit
