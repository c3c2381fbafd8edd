#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "latentedit/types.hpp"

namespace latentedit {

struct DenseLayer {
    Matrix weight;  // out x in
    Vector bias;    // out
};

/// Fully connected network: LeakyReLU after every hidden layer, linear output.
struct MlpParams {
    std::vector<DenseLayer> layers;

    Index input_dim() const { return layers.front().weight.cols(); }
    Index output_dim() const { return layers.back().weight.rows(); }

    std::vector<Index> layer_sizes() const {
        std::vector<Index> sizes;
        if (layers.empty()) return sizes;
        sizes.push_back(input_dim());
        for (const auto& l : layers) sizes.push_back(l.weight.rows());
        return sizes;
    }

    Index parameter_count() const {
        Index n = 0;
        for (const auto& l : layers) n += l.weight.size() + l.bias.size();
        return n;
    }

    bool all_finite() const {
        for (const auto& l : layers)
            if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
        return true;
    }
};

/// Same shapes as `like`, every entry zero.
inline MlpParams zeros_like(const MlpParams& like) {
    MlpParams z;
    for (const auto& l : like.layers)
        z.layers.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
    return z;
}

/// He-normal weights N(0, 2/fan_in), zero biases.
inline MlpParams init_params(std::uint64_t seed, const std::vector<Index>& layer_sizes) {
    require(layer_sizes.size() >= 2, ErrorCode::ConfigInvalid, "an MLP needs at least input and output sizes");
    for (Index s : layer_sizes) require(s >= 1, ErrorCode::ConfigInvalid, "layer sizes must be >= 1");
    std::mt19937_64 rng(seed);
    MlpParams p;
    for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i) {
        const Index in = layer_sizes[i];
        const Index out = layer_sizes[i + 1];
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(in)));
        DenseLayer layer{Matrix(out, in), Vector::Zero(out)};
        for (Index j = 0; j < layer.weight.size(); ++j) layer.weight.data()[j] = dist(rng);
        p.layers.push_back(std::move(layer));
    }
    return p;
}

inline double leaky_relu(double t, double slope) { return t > 0.0 ? t : slope * t; }

/// Activations kept by the forward pass for the backward pass.
struct ForwardCache {
    std::vector<Matrix> inputs;       // input of each layer (batch x in)
    std::vector<Matrix> preactivate;  // pre-activation of each layer (batch x out)
};

struct ForwardResult {
    Matrix output;
    ForwardCache cache;
};

inline ForwardResult mlp_forward(const MlpParams& params, const Matrix& x, double leaky_slope) {
    require_dim(x.cols(), params.input_dim(), "mlp_forward: input width");
    ForwardResult r;
    Matrix h = x;
    const std::size_t last = params.layers.size() - 1;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const auto& layer = params.layers[l];
        Matrix z = h * layer.weight.transpose();
        z.rowwise() += layer.bias.transpose();
        r.cache.inputs.push_back(std::move(h));
        if (l == last) {
            h = z;
        } else {
            h = z.unaryExpr([leaky_slope](double t) { return leaky_relu(t, leaky_slope); });
        }
        r.cache.preactivate.push_back(std::move(z));
    }
    require(h.allFinite(), ErrorCode::NonFinite, "mlp_forward produced non-finite output");
    r.output = std::move(h);
    return r;
}

/// Inference-only forward pass.
inline Matrix mlp_apply(const MlpParams& params, const Matrix& x, double leaky_slope) {
    require_dim(x.cols(), params.input_dim(), "mlp_apply: input width");
    Matrix h = x;
    const std::size_t last = params.layers.size() - 1;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        Matrix z = h * params.layers[l].weight.transpose();
        z.rowwise() += params.layers[l].bias.transpose();
        if (l == last) h = std::move(z);
        else h = z.unaryExpr([leaky_slope](double t) { return leaky_relu(t, leaky_slope); });
    }
    require(h.allFinite(), ErrorCode::NonFinite, "mlp_apply produced non-finite output");
    return h;
}

struct BackwardResult {
    MlpParams grads;
    Matrix input_grad;  // dLoss/dx
};

/// Backpropagates dLoss/doutput through the cached forward pass.
inline BackwardResult mlp_backward(const MlpParams& params, const ForwardCache& cache, const Matrix& output_grad,
                                   double leaky_slope) {
    BackwardResult r;
    r.grads = zeros_like(params);
    Matrix delta = output_grad;
    for (std::size_t l = params.layers.size(); l-- > 0;) {
        if (l + 1 != params.layers.size()) {
            const Matrix& z = cache.preactivate[l];
            delta = delta.cwiseProduct(z.unaryExpr([leaky_slope](double t) { return t > 0.0 ? 1.0 : leaky_slope; }));
        }
        r.grads.layers[l].weight.noalias() = delta.transpose() * cache.inputs[l];
        r.grads.layers[l].bias = delta.colwise().sum().transpose();
        delta = delta * params.layers[l].weight;
    }
    require(delta.allFinite() && r.grads.all_finite(), ErrorCode::NonFinite, "mlp_backward produced non-finite gradients");
    r.input_grad = std::move(delta);
    return r;
}

struct AdamConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    MlpParams first_moment;
    MlpParams second_moment;
    long long step = 0;

    static AdamState for_params(const MlpParams& p) { return {zeros_like(p), zeros_like(p), 0}; }
};

namespace mlp_detail {

template <typename P, typename G, typename M>
void adam_update(P& param, const G& grad, M& m, M& v, const AdamConfig& cfg, double correction1, double correction2) {
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseAbs2();
    param.array() -= cfg.learning_rate * (m.array() / correction1) /
                     ((v.array() / correction2).sqrt() + cfg.epsilon);
}

}  // namespace mlp_detail

/// One bias-corrected Adam update; increments `state.step`.
inline void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state, const AdamConfig& cfg) {
    ++state.step;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        mlp_detail::adam_update(params.layers[l].weight, grads.layers[l].weight, state.first_moment.layers[l].weight,
                                state.second_moment.layers[l].weight, cfg, c1, c2);
        mlp_detail::adam_update(params.layers[l].bias, grads.layers[l].bias, state.first_moment.layers[l].bias,
                                state.second_moment.layers[l].bias, cfg, c1, c2);
    }
}

}  // namespace latentedit
