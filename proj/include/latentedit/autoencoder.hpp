#pragma once

// Reorganizing autoencoder over the leading PCA coordinates.
//
// The encoder maps w_pca (d) to a code c (dim_c). The first K code slots are
// trained to equal the gaussianized attributes; the remaining slots are free
// and shaped by reconstruction only. A batch-level Pearson correlation of the
// K attribute slots is pulled toward a reference matrix with an L1 penalty.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "latentedit/mlp.hpp"

namespace latentedit {

enum class CorrMode { None, Database, Identity };

inline std::string to_string(CorrMode m) {
    switch (m) {
        case CorrMode::None: return "none";
        case CorrMode::Database: return "database";
        case CorrMode::Identity: return "identity";
    }
    return "none";
}

inline CorrMode corr_mode_from_string(const std::string& s) {
    if (s == "none" || s == "A") return CorrMode::None;
    if (s == "database" || s == "B") return CorrMode::Database;
    if (s == "identity" || s == "C") return CorrMode::Identity;
    fail(ErrorCode::ConfigInvalid, "unknown correlation mode '" + s + "'");
}

/// Variance guard in the correlation denominator.
inline constexpr double kCorrVarianceGuard = 1e-8;

struct TrainConfig {
    double alpha = 1e-5;  // weight of the attribute loss
    double beta = 1e-5;   // weight of the correlation loss
    int epochs = 150;
    Index batch_size = 256;
    CorrMode corr_mode = CorrMode::Identity;
    double learning_rate = 1e-4;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 0;
    Index hidden_width = 512;
    int num_layers = 8;
    Index code_dim = 0;  // 0 means "same as the input width"
    double leaky_slope = 0.01;

    AdamConfig adam() const { return {learning_rate, adam_beta1, adam_beta2, adam_epsilon}; }
};

inline void validate(const TrainConfig& cfg) {
    require(cfg.alpha >= 0.0 && cfg.beta >= 0.0, ErrorCode::ConfigInvalid, "alpha and beta must be non-negative");
    require(cfg.epochs >= 1, ErrorCode::ConfigInvalid, "epochs must be >= 1");
    require(cfg.num_layers >= 1, ErrorCode::ConfigInvalid, "num_layers must be >= 1");
    require(cfg.hidden_width >= 1, ErrorCode::ConfigInvalid, "hidden_width must be >= 1");
    require(cfg.learning_rate > 0.0, ErrorCode::ConfigInvalid, "learning_rate must be positive");
    require(cfg.batch_size >= 1, ErrorCode::ConfigInvalid, "batch_size must be >= 1");
    if (cfg.corr_mode != CorrMode::None && cfg.beta > 0.0)
        require(cfg.batch_size >= 32, ErrorCode::ConfigInvalid,
                "batch_size must be >= 32 when the correlation loss is active (got " + std::to_string(cfg.batch_size) + ")");
}

/// Relative weights of the three loss terms.
struct LossWeights {
    double recons = 1.0;
    double attr = 0.0;
    double corr = 0.0;

    static LossWeights from(const TrainConfig& cfg) {
        return {1.0, cfg.alpha, cfg.corr_mode == CorrMode::None ? 0.0 : cfg.beta};
    }
};

struct LossBreakdown {
    double recons = 0.0;
    double attr = 0.0;
    double corr = 0.0;  // unweighted; 0 when the term is disabled
    double total = 0.0;
};

struct EncoderDecoder {
    MlpParams encoder;
    MlpParams decoder;
    double leaky_slope = 0.01;
    Index num_attributes = 0;  // K
    Index code_dim = 0;        // dim_c
    CorrMode corr_mode = CorrMode::Identity;
    Matrix gamma_ref;  // K x K, empty when corr_mode == None

    Index input_dim() const { return encoder.input_dim(); }
};

inline std::vector<Index> architecture(Index in, Index hidden, int num_layers, Index out) {
    std::vector<Index> sizes{in};
    for (int i = 0; i + 1 < num_layers; ++i) sizes.push_back(hidden);
    sizes.push_back(out);
    return sizes;
}

/// Mean over the batch of the per-sample squared l2 distance.
inline double loss_recons(const Matrix& w, const Matrix& w_hat) {
    require_dim(w_hat.rows(), w.rows(), "loss_recons: batch size");
    require_dim(w_hat.cols(), w.cols(), "loss_recons: width");
    return (w - w_hat).squaredNorm() / static_cast<double>(w.rows());
}

/// Mean over the batch of sum_k (a_k - c_k)^2 over the first K code slots.
inline double loss_attr(const Matrix& codes, const Matrix& attrs) {
    require_dim(codes.rows(), attrs.rows(), "loss_attr: batch size");
    require(codes.cols() >= attrs.cols(), ErrorCode::DimensionMismatch, "loss_attr: code narrower than K");
    return (codes.leftCols(attrs.cols()) - attrs).squaredNorm() / static_cast<double>(codes.rows());
}

/// Pearson correlation of the columns over the batch (covariance divisor = batch size).
inline Matrix batch_corr(const Matrix& codes) {
    if (codes.rows() < 2) fail(ErrorCode::BatchTooSmall, "batch_corr needs at least 2 rows");
    const Matrix centered = codes.rowwise() - codes.colwise().mean();
    const Matrix cov = centered.transpose() * centered / static_cast<double>(codes.rows());
    const Vector inv_sd = (cov.diagonal().array() + kCorrVarianceGuard).rsqrt();
    return inv_sd.asDiagonal() * cov * inv_sd.asDiagonal();
}

/// Elementwise L1 distance summed over all K*K entries.
inline double loss_corr(const Matrix& corr, const Matrix& gamma_ref) {
    require_dim(corr.rows(), gamma_ref.rows(), "loss_corr: rows");
    require_dim(corr.cols(), gamma_ref.cols(), "loss_corr: cols");
    return (corr - gamma_ref).cwiseAbs().sum();
}

/// Gradient of loss_corr(batch_corr(codes), gamma_ref) with respect to `codes`.
/// The L1 subgradient at zero is taken as 0.
inline Matrix corr_loss_grad(const Matrix& codes, const Matrix& gamma_ref) {
    const auto b = static_cast<double>(codes.rows());
    const Matrix centered = codes.rowwise() - codes.colwise().mean();
    const Matrix cov = centered.transpose() * centered / b;
    const Vector s = (cov.diagonal().array() + kCorrVarianceGuard).rsqrt();
    const Matrix corr = s.asDiagonal() * cov * s.asDiagonal();
    const Matrix sign = (corr - gamma_ref).unaryExpr([](double x) { return double((x > 0.0) - (x < 0.0)); });

    // dL/dCov: direct term plus the dependence of each scale s_i on Cov_ii.
    Matrix dcov = s.asDiagonal() * sign * s.asDiagonal();
    const Vector row_dot = sign.cwiseProduct(corr).rowwise().sum();
    dcov.diagonal() -= s.cwiseAbs2().cwiseProduct(row_dot);

    // Cov = X^T X / b with centered X; centering is absorbed since columns of X sum to 0.
    return 2.0 * centered * dcov / b;
}

inline LossBreakdown total_loss(const Matrix& w, const Matrix& w_hat, const Matrix& codes, const Matrix& attrs,
                                const LossWeights& weights, const Matrix& gamma_ref) {
    LossBreakdown l;
    l.recons = loss_recons(w, w_hat);
    l.attr = loss_attr(codes, attrs);
    if (weights.corr > 0.0) l.corr = loss_corr(batch_corr(codes.leftCols(attrs.cols())), gamma_ref);
    l.total = weights.recons * l.recons + weights.attr * l.attr + weights.corr * l.corr;
    return l;
}

inline LossBreakdown total_loss(const Matrix& w, const Matrix& w_hat, const Matrix& codes, const Matrix& attrs,
                                const TrainConfig& cfg, const Matrix& gamma_ref) {
    return total_loss(w, w_hat, codes, attrs, LossWeights::from(cfg), gamma_ref);
}

struct Gradients {
    MlpParams encoder;
    MlpParams decoder;
    LossBreakdown loss;
};

/// Analytic gradient of the weighted total loss for one batch.
inline Gradients backward(const EncoderDecoder& model, const Matrix& batch, const Matrix& attrs,
                          const LossWeights& weights, const Matrix& gamma_ref) {
    require_dim(batch.rows(), attrs.rows(), "backward: batch size");
    require_dim(attrs.cols(), model.num_attributes, "backward: attribute count");
    if (weights.corr > 0.0 && batch.rows() < 2) fail(ErrorCode::BatchTooSmall, "correlation loss needs batch >= 2");

    const auto b = static_cast<double>(batch.rows());
    const Index k = model.num_attributes;

    auto enc = mlp_forward(model.encoder, batch, model.leaky_slope);
    auto dec = mlp_forward(model.decoder, enc.output, model.leaky_slope);

    Gradients g;
    g.loss = total_loss(batch, dec.output, enc.output, attrs, weights, gamma_ref);

    const Matrix d_out = (2.0 * weights.recons / b) * (dec.output - batch);
    auto dec_back = mlp_backward(model.decoder, dec.cache, d_out, model.leaky_slope);

    Matrix d_codes = std::move(dec_back.input_grad);
    if (weights.attr > 0.0) d_codes.leftCols(k) += (2.0 * weights.attr / b) * (enc.output.leftCols(k) - attrs);
    if (weights.corr > 0.0) d_codes.leftCols(k) += weights.corr * corr_loss_grad(enc.output.leftCols(k), gamma_ref);

    auto enc_back = mlp_backward(model.encoder, enc.cache, d_codes, model.leaky_slope);
    g.encoder = std::move(enc_back.grads);
    g.decoder = std::move(dec_back.grads);
    return g;
}

inline Matrix encode_batch(const EncoderDecoder& model, const Matrix& w_pca) {
    return mlp_apply(model.encoder, w_pca, model.leaky_slope);
}

inline Matrix decode_batch(const EncoderDecoder& model, const Matrix& codes) {
    return mlp_apply(model.decoder, codes, model.leaky_slope);
}

/// Reference correlation for a mode; `attrs` are the (gaussianized) training attributes.
inline Matrix reference_correlation(CorrMode mode, const Matrix& attrs) {
    const Index k = attrs.cols();
    switch (mode) {
        case CorrMode::None: return Matrix();
        case CorrMode::Identity: return Matrix::Identity(k, k);
        case CorrMode::Database: {
            Matrix g = batch_corr(attrs);
            g = 0.5 * (g + g.transpose());
            g.diagonal().setOnes();
            return g.cwiseMax(-1.0).cwiseMin(1.0);
        }
    }
    return Matrix();
}

struct EpochLosses {
    int epoch = 0;
    double recons = 0.0;
    double attr = 0.0;
    double corr = 0.0;
    double total = 0.0;
};

struct TrainResult {
    EncoderDecoder model;
    std::vector<EpochLosses> history;
};

namespace ae_detail {

// splitmix64, used to derive independent sub-seeds from the user seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace ae_detail

inline EncoderDecoder init_model(Index input_dim, Index num_attributes, const TrainConfig& cfg, Matrix gamma_ref) {
    const Index code_dim = cfg.code_dim > 0 ? cfg.code_dim : input_dim;
    if (code_dim <= num_attributes)
        fail(ErrorCode::ConfigInvalid, "code size " + std::to_string(code_dim) + " must exceed attribute count " +
                                           std::to_string(num_attributes));
    EncoderDecoder model;
    model.encoder = init_params(ae_detail::mix_seed(cfg.seed * 4 + 1),
                                architecture(input_dim, cfg.hidden_width, cfg.num_layers, code_dim));
    model.decoder = init_params(ae_detail::mix_seed(cfg.seed * 4 + 2),
                                architecture(code_dim, cfg.hidden_width, cfg.num_layers, input_dim));
    model.leaky_slope = cfg.leaky_slope;
    model.num_attributes = num_attributes;
    model.code_dim = code_dim;
    model.corr_mode = cfg.corr_mode;
    model.gamma_ref = std::move(gamma_ref);
    return model;
}

/// Trains on leading PCA coordinates paired with gaussianized attributes.
/// Mini-batches are reshuffled every epoch; a trailing partial batch is dropped.
template <typename EpochCallback>
TrainResult train(const Matrix& w_pca, const Matrix& attrs, const TrainConfig& cfg, EpochCallback&& on_epoch) {
    validate(cfg);
    const Index n = w_pca.rows();
    require(n >= 1, ErrorCode::ConfigInvalid, "training set is empty");
    require_dim(attrs.rows(), n, "train: attribute rows");
    if (w_pca.cols() <= attrs.cols())
        fail(ErrorCode::ConfigInvalid, "latent width " + std::to_string(w_pca.cols()) + " must exceed attribute count " +
                                           std::to_string(attrs.cols()));
    const Index batch = std::min(cfg.batch_size, n);
    const LossWeights weights = LossWeights::from(cfg);
    if (weights.corr > 0.0 && batch < 2) fail(ErrorCode::ConfigInvalid, "batch size must be >= 2 with the correlation loss");

    TrainResult result;
    result.model = init_model(w_pca.cols(), attrs.cols(), cfg, reference_correlation(cfg.corr_mode, attrs));
    auto& model = result.model;
    const Matrix& gamma = model.gamma_ref;

    AdamState enc_state = AdamState::for_params(model.encoder);
    AdamState dec_state = AdamState::for_params(model.decoder);
    const AdamConfig adam = cfg.adam();

    std::mt19937_64 shuffle_rng(ae_detail::mix_seed(cfg.seed * 4 + 3));
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});

    Matrix xb(batch, w_pca.cols());
    Matrix ab(batch, attrs.cols());
    const Index batches = n / batch;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        EpochLosses acc;
        acc.epoch = epoch;
        for (Index bi = 0; bi < batches; ++bi) {
            for (Index r = 0; r < batch; ++r) {
                const Index src = order[static_cast<std::size_t>(bi * batch + r)];
                xb.row(r) = w_pca.row(src);
                ab.row(r) = attrs.row(src);
            }
            Gradients g = backward(model, xb, ab, weights, gamma);
            adam_step(model.encoder, g.encoder, enc_state, adam);
            adam_step(model.decoder, g.decoder, dec_state, adam);
            acc.recons += g.loss.recons;
            acc.attr += g.loss.attr;
            acc.corr += g.loss.corr;
            acc.total += g.loss.total;
        }
        const auto nb = static_cast<double>(batches);
        acc.recons /= nb;
        acc.attr /= nb;
        acc.corr /= nb;
        acc.total /= nb;
        require(std::isfinite(acc.total), ErrorCode::NonFinite, "training diverged at epoch " + std::to_string(epoch));
        result.history.push_back(acc);
        on_epoch(acc);
    }
    return result;
}

inline TrainResult train(const Matrix& w_pca, const Matrix& attrs, const TrainConfig& cfg) {
    return train(w_pca, attrs, cfg, [](const EpochLosses&) {});
}

}  // namespace latentedit
