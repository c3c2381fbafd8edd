#pragma once

// Linear editing directions: one L2-regularized logistic regression per
// attribute, used as the comparison baseline.

#include <cmath>
#include <vector>

#include "latentedit/editor.hpp"

namespace latentedit {

enum class DirectionSpace { W, WPca };

struct LinearDirection {
    Vector unit;  // unit-norm editing direction
    double bias = 0.0;
    DirectionSpace space = DirectionSpace::W;
};

struct LogisticConfig {
    double l2 = 1e-3;
    int iterations = 500;
    double learning_rate = 0.1;
};

/// Fits a separating direction for 0/1 labels by full-batch gradient descent
/// on standardized features; the weight vector is mapped back to the input
/// frame and normalized.
inline LinearDirection fit_direction(const Matrix& latents, const Vector& labels, const LogisticConfig& cfg = {},
                                     DirectionSpace space = DirectionSpace::W) {
    require_dim(labels.size(), latents.rows(), "fit_direction: label count");
    const Index n = latents.rows();
    const double positives = labels.sum();
    if (positives <= 0.0 || positives >= static_cast<double>(n))
        fail(ErrorCode::SingleClass, "both classes must be present to fit a direction");

    const Vector mean = latents.colwise().mean().transpose();
    const Matrix centered = latents.rowwise() - mean.transpose();
    Vector sd = (centered.colwise().squaredNorm() / static_cast<double>(n)).cwiseSqrt().transpose();
    for (Index j = 0; j < sd.size(); ++j)
        if (sd(j) <= 0.0) sd(j) = 1.0;
    const Matrix x = centered * sd.cwiseInverse().asDiagonal();

    Vector weight = Vector::Zero(x.cols());
    double bias = 0.0;
    const auto nn = static_cast<double>(n);
    for (int it = 0; it < cfg.iterations; ++it) {
        const Vector logits = (x * weight).array() + bias;
        const Vector residual = logits.unaryExpr([](double t) { return 1.0 / (1.0 + std::exp(-t)); }) - labels;
        const Vector grad_w = x.transpose() * residual / nn + cfg.l2 * weight;
        const double grad_b = residual.sum() / nn;
        weight -= cfg.learning_rate * grad_w;
        bias -= cfg.learning_rate * grad_b;
    }

    Vector raw = weight.cwiseQuotient(sd);
    double raw_bias = bias - raw.dot(mean);
    const double norm = raw.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) fail(ErrorCode::NonFinite, "degenerate logistic weight vector");
    return {raw / norm, raw_bias / norm, space};
}

/// Labels are raw attribute values thresholded at 0.5.
inline std::vector<LinearDirection> fit_directions(const Matrix& latents, const Matrix& raw_attrs,
                                                   const LogisticConfig& cfg = {}) {
    require_dim(raw_attrs.rows(), latents.rows(), "fit_directions: rows");
    std::vector<LinearDirection> dirs;
    for (Index k = 0; k < raw_attrs.cols(); ++k) {
        const Vector labels = raw_attrs.col(k).unaryExpr([](double a) { return a >= kNegativeBelow ? 1.0 : 0.0; });
        dirs.push_back(fit_direction(latents, labels, cfg));
    }
    return dirs;
}

inline Vector linear_edit(const Vector& w, const LinearDirection& dir, double amplitude) {
    require_dim(w.size(), dir.unit.size(), "linear_edit: latent length");
    return w + amplitude * dir.unit;
}

inline std::vector<double> default_amplitude_grid() {
    std::vector<double> g;
    for (int i = 1; i <= 80; ++i) g.push_back(0.1 * i);
    return g;
}

/// Moves along the fitted direction by each amplitude in turn.
struct LinearEditor {
    const std::vector<LinearDirection>* directions;
    std::vector<double> amplitudes = default_amplitude_grid();

    std::size_t steps() const { return amplitudes.size(); }
    Vector edit_step(const Vector& w, Index k, std::size_t step) const {
        return linear_edit(w, directions->at(static_cast<std::size_t>(k)), amplitudes.at(step));
    }
};

}  // namespace latentedit
