#pragma once

// Seeded synthetic stand-in for "classifier applied to generator output".
//
// Latents are Gaussian in a random orthonormal frame. The first `lead_dim`
// frame axes have unit scale and the rest `tail_scale`, so a PCA split at
// lead_dim recovers the informative subspace. Attribute directions and the
// identity subspace are disjoint sets of leading frame axes, hence exactly
// orthogonal.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "latentedit/dataset.hpp"

namespace latentedit {

enum class MappingKind { Linear, TanhMixed };

inline std::string to_string(MappingKind k) { return k == MappingKind::Linear ? "linear" : "tanh-mixed"; }

inline MappingKind mapping_kind_from_string(const std::string& s) {
    if (s == "linear") return MappingKind::Linear;
    if (s == "tanh-mixed") return MappingKind::TanhMixed;
    fail(ErrorCode::ConfigInvalid, "unknown mapping kind '" + s + "'");
}

struct WorldOptions {
    Index lead_dim = 0;  // 0 means max(K + q, m / 2)
    double tail_scale = 0.25;
    double gain = 2.0;
    MappingKind mapping = MappingKind::Linear;
};

struct SyntheticWorld {
    Index m = 0;
    Index num_attributes = 0;  // K
    Index identity_dim = 0;    // q
    Index lead_dim = 0;
    bool correlated = false;
    double gain = 2.0;
    double tail_scale = 1.0;
    MappingKind mapping = MappingKind::Linear;
    std::uint64_t seed = 0;

    Matrix frame;           // m x m orthonormal, columns are the latent axes
    Vector scales;          // m, standard deviation along each frame axis
    Matrix directions;      // K x m, unit rows (planted attribute directions)
    Matrix mix;             // K x K unit lower-triangular correlation planting
    Matrix identity_basis;  // m x q orthonormal
    Matrix tanh_weights;    // m x m, used by the tanh-mixed mapping
};

namespace oracle_detail {

inline Matrix gaussian_matrix(std::mt19937_64& rng, Index rows, Index cols) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Matrix g(rows, cols);
    for (Index i = 0; i < g.size(); ++i) g.data()[i] = dist(rng);
    return g;
}

// Q factor of a Gaussian matrix with the sign ambiguity removed (diag(R) > 0).
inline Matrix random_orthonormal(std::mt19937_64& rng, Index m) {
    const Matrix g = gaussian_matrix(rng, m, m);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < m; ++j)
        if (r(j, j) < 0) q.col(j) = -q.col(j);
    return q;
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t x = seed ^ (salt * 0x9e3779b97f4a7c15ULL);
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace oracle_detail

inline SyntheticWorld make_world(Index m, Index num_attributes, Index identity_dim, bool correlated, std::uint64_t seed,
                                 const WorldOptions& opts = {}) {
    if (num_attributes < 1 || identity_dim < 0 || m <= num_attributes + identity_dim)
        fail(ErrorCode::DimensionError, "world needs m > K + q (m=" + std::to_string(m) + ", K=" +
                                            std::to_string(num_attributes) + ", q=" + std::to_string(identity_dim) + ")");
    const Index lead = opts.lead_dim > 0 ? opts.lead_dim : std::max(num_attributes + identity_dim, m / 2);
    if (lead < num_attributes + identity_dim || lead > m)
        fail(ErrorCode::DimensionError, "lead_dim must lie in [K + q, m]");
    require(opts.tail_scale >= 0.0 && opts.gain > 0.0, ErrorCode::ConfigInvalid, "tail_scale >= 0 and gain > 0 required");

    std::mt19937_64 rng(oracle_detail::stream_seed(seed, 1));
    SyntheticWorld w;
    w.m = m;
    w.num_attributes = num_attributes;
    w.identity_dim = identity_dim;
    w.lead_dim = lead;
    w.correlated = correlated;
    w.gain = opts.gain;
    w.tail_scale = opts.tail_scale;
    w.mapping = opts.mapping;
    w.seed = seed;

    w.frame = oracle_detail::random_orthonormal(rng, m);
    w.scales = Vector::Constant(m, opts.tail_scale);
    w.scales.head(lead).setOnes();
    w.directions = w.frame.leftCols(num_attributes).transpose();
    w.identity_basis = w.frame.middleCols(num_attributes, identity_dim);

    w.mix = Matrix::Identity(num_attributes, num_attributes);
    if (correlated)
        for (Index k = 1; k < num_attributes; ++k) w.mix(k, k - 1) = 0.5;

    w.tanh_weights = oracle_detail::gaussian_matrix(rng, m, m) / std::sqrt(static_cast<double>(m));
    return w;
}

/// n i.i.d. latents (rows).
inline Matrix sample_w(const SyntheticWorld& world, Index n, std::uint64_t seed) {
    require(n >= 1, ErrorCode::ConfigInvalid, "sample_w needs n >= 1");
    std::mt19937_64 rng(oracle_detail::stream_seed(seed, 2));
    Matrix z = oracle_detail::gaussian_matrix(rng, n, world.m);
    Matrix w = (z * world.scales.asDiagonal()) * world.frame.transpose();
    if (world.mapping == MappingKind::TanhMixed) {
        const Matrix pre = w * world.tanh_weights.transpose();
        w += 0.1 * pre.unaryExpr([](double t) { return std::tanh(t); });
    }
    return w;
}

inline double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

/// Raw attributes in (0, 1) for every row of `latents`.
inline Matrix classify_rows(const SyntheticWorld& world, const Matrix& latents) {
    require_dim(latents.cols(), world.m, "classify: latent length");
    const Matrix logits = world.gain * latents * (world.mix * world.directions).transpose();
    return logits.unaryExpr([](double t) { return sigmoid(t); });
}

inline Vector classify(const SyntheticWorld& world, const Vector& w) {
    require_dim(w.size(), world.m, "classify: latent length");
    const Vector logits = world.gain * (world.mix * (world.directions * w));
    return logits.unaryExpr([](double t) { return sigmoid(t); });
}

inline Vector embed_identity(const SyntheticWorld& world, const Vector& w) {
    require_dim(w.size(), world.m, "embed_identity: latent length");
    return world.identity_basis.transpose() * w;
}

inline Matrix embed_identity_rows(const SyntheticWorld& world, const Matrix& latents) {
    require_dim(latents.cols(), world.m, "embed_identity: latent length");
    return latents * world.identity_basis;
}

inline PairedDataset build_dataset(const SyntheticWorld& world, Index n, std::uint64_t seed) {
    require(n >= 2, ErrorCode::ConfigInvalid, "build_dataset needs n >= 2");
    PairedDataset ds;
    ds.latents = sample_w(world, n, seed);
    ds.attributes = classify_rows(world, ds.latents);
    return ds;
}

}  // namespace latentedit
