#pragma once

#include <random>

#include "latentedit/editor.hpp"
#include "test_util.hpp"

namespace testutil {

/// Untrained pipeline with m = 8, d = 5, K = 2 and a 6-wide code.
inline latentedit::EditPipeline small_pipeline(std::uint64_t seed) {
    using namespace latentedit;
    std::mt19937_64 rng(seed);
    const Matrix latents = random_matrix(rng, 200, 8);
    Matrix attrs = random_matrix(rng, 200, 2).unaryExpr([](double t) { return 1.0 / (1.0 + std::exp(-t)); });
    TrainConfig cfg;
    cfg.seed = seed;
    cfg.hidden_width = 8;
    cfg.num_layers = 3;
    cfg.code_dim = 6;
    return {fit_pca(latents, 5), fit_transform(attrs), init_model(5, 2, cfg, Matrix::Identity(2, 2))};
}

}  // namespace testutil
