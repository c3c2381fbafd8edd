#pragma once

// On-disk layout of fitted artifacts: one .npy per array plus a JSON manifest.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "latentedit/baseline.hpp"
#include "latentedit/oracle.hpp"

namespace latentedit::io {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

inline void write_json(const Json& j, const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
    if (!out) fail(ErrorCode::IoError, "short write to " + path.string());
}

inline Json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::IoError, path.string() + ": " + e.what());
    }
}

template <typename T>
T field(const Json& j, const char* key, const fs::path& where) {
    if (!j.contains(key)) fail(ErrorCode::IoError, where.string() + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::IoError, where.string() + ": field '" + key + "': " + e.what());
    }
}

inline Json to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

// --- PCA -------------------------------------------------------------------

inline void save(const PcaModel& pca, const fs::path& dir) {
    fs::create_directories(dir);
    npy::write_vector(pca.mean, dir / "pca_mean.npy");
    npy::write_matrix(pca.basis, dir / "pca_basis.npy");
    npy::write_vector(pca.eigenvalues, dir / "pca_eigenvalues.npy");
    write_json(Json{{"d", pca.split}, {"m", pca.dim()}, {"n_fit", pca.n_fit}}, dir / "pca.json");
}

inline PcaModel load_pca(const fs::path& dir) {
    const Json j = read_json(dir / "pca.json");
    PcaModel p;
    p.mean = npy::read_vector(dir / "pca_mean.npy");
    p.basis = npy::read_matrix(dir / "pca_basis.npy");
    p.eigenvalues = npy::read_vector(dir / "pca_eigenvalues.npy");
    p.split = field<Index>(j, "d", dir / "pca.json");
    p.n_fit = field<Index>(j, "n_fit", dir / "pca.json");
    const auto m = field<Index>(j, "m", dir / "pca.json");
    require_dim(p.mean.size(), m, "pca mean");
    require_dim(p.basis.rows(), m, "pca basis rows");
    require_dim(p.basis.cols(), m, "pca basis cols");
    require_dim(p.eigenvalues.size(), m, "pca eigenvalues");
    require(p.split >= 1 && p.split <= m, ErrorCode::DimensionMismatch, "pca split outside [1, m]");
    return p;
}

// --- attribute transform ---------------------------------------------------

inline void save(const AttributeTransform& t, const fs::path& dir) {
    fs::create_directories(dir);
    npy::write_matrix(t.table, dir / "attr_table.npy");
    write_json(Json{{"n", t.num_samples()}, {"K", t.num_attributes()}}, dir / "attr_transform.json");
}

inline AttributeTransform load_transform(const fs::path& dir) {
    const Json j = read_json(dir / "attr_transform.json");
    AttributeTransform t{npy::read_matrix(dir / "attr_table.npy")};
    require_dim(t.num_samples(), field<Index>(j, "n", dir / "attr_transform.json"), "attribute table samples");
    require_dim(t.num_attributes(), field<Index>(j, "K", dir / "attr_transform.json"), "attribute table rows");
    require(t.num_samples() >= 2, ErrorCode::TooFewSamples, "attribute table needs n >= 2");
    return t;
}

// --- autoencoder -----------------------------------------------------------

inline Json to_json(const TrainConfig& c) {
    return Json{{"alpha", c.alpha},
                {"beta", c.beta},
                {"epochs", c.epochs},
                {"batch_size", c.batch_size},
                {"corr_mode", to_string(c.corr_mode)},
                {"learning_rate", c.learning_rate},
                {"adam_beta1", c.adam_beta1},
                {"adam_beta2", c.adam_beta2},
                {"adam_epsilon", c.adam_epsilon},
                {"seed", c.seed},
                {"hidden_width", c.hidden_width},
                {"num_layers", c.num_layers},
                {"code_dim", c.code_dim},
                {"leaky_slope", c.leaky_slope}};
}

namespace detail {

inline void save_mlp(const MlpParams& p, const std::string& prefix, const fs::path& dir) {
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        npy::write_matrix(p.layers[l].weight, dir / (prefix + "_" + std::to_string(l) + "_weight.npy"));
        npy::write_vector(p.layers[l].bias, dir / (prefix + "_" + std::to_string(l) + "_bias.npy"));
    }
}

inline MlpParams load_mlp(const std::vector<Index>& sizes, const std::string& prefix, const fs::path& dir) {
    require(sizes.size() >= 2, ErrorCode::IoError, prefix + ": layer_sizes needs at least two entries");
    MlpParams p;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        DenseLayer layer{npy::read_matrix(dir / (prefix + "_" + std::to_string(l) + "_weight.npy")),
                         npy::read_vector(dir / (prefix + "_" + std::to_string(l) + "_bias.npy"))};
        require_dim(layer.weight.cols(), sizes[l], "layer input width");
        require_dim(layer.weight.rows(), sizes[l + 1], "layer output width");
        require_dim(layer.bias.size(), sizes[l + 1], "layer bias length");
        p.layers.push_back(std::move(layer));
    }
    return p;
}

}  // namespace detail

inline void save(const EncoderDecoder& m, const fs::path& dir, const TrainConfig* cfg = nullptr) {
    fs::create_directories(dir);
    detail::save_mlp(m.encoder, "encoder", dir);
    detail::save_mlp(m.decoder, "decoder", dir);
    Json gamma = nullptr;
    if (m.gamma_ref.size() > 0) {
        npy::write_matrix(m.gamma_ref, dir / "gamma_ref.npy");
        gamma = "gamma_ref.npy";
    }
    Json j{{"encoder_layer_sizes", m.encoder.layer_sizes()},
           {"decoder_layer_sizes", m.decoder.layer_sizes()},
           {"K", m.num_attributes},
           {"dim_c", m.code_dim},
           {"leaky_slope", m.leaky_slope},
           {"corr_mode", to_string(m.corr_mode)},
           {"gamma_ref", gamma}};
    if (cfg) j["train_config"] = to_json(*cfg);
    write_json(j, dir / "model.json");
}

inline EncoderDecoder load_model(const fs::path& dir) {
    const fs::path manifest = dir / "model.json";
    const Json j = read_json(manifest);
    EncoderDecoder m;
    m.encoder = detail::load_mlp(field<std::vector<Index>>(j, "encoder_layer_sizes", manifest), "encoder", dir);
    m.decoder = detail::load_mlp(field<std::vector<Index>>(j, "decoder_layer_sizes", manifest), "decoder", dir);
    m.num_attributes = field<Index>(j, "K", manifest);
    m.code_dim = field<Index>(j, "dim_c", manifest);
    m.leaky_slope = field<double>(j, "leaky_slope", manifest);
    m.corr_mode = corr_mode_from_string(field<std::string>(j, "corr_mode", manifest));
    if (j.contains("gamma_ref") && !j["gamma_ref"].is_null())
        m.gamma_ref = npy::read_matrix(dir / j["gamma_ref"].get<std::string>());
    require_dim(m.encoder.output_dim(), m.code_dim, "encoder output vs dim_c");
    require_dim(m.decoder.input_dim(), m.code_dim, "decoder input vs dim_c");
    require_dim(m.decoder.output_dim(), m.encoder.input_dim(), "decoder output vs encoder input");
    require(m.code_dim > m.num_attributes, ErrorCode::DimensionMismatch, "dim_c must exceed K");
    return m;
}

// --- synthetic world -------------------------------------------------------

inline void save(const SyntheticWorld& w, const fs::path& dir) {
    fs::create_directories(dir);
    npy::write_matrix(w.frame, dir / "frame.npy");
    npy::write_vector(w.scales, dir / "scales.npy");
    npy::write_matrix(w.directions, dir / "directions.npy");
    npy::write_matrix(w.mix, dir / "mix.npy");
    npy::write_matrix(w.identity_basis, dir / "identity_basis.npy");
    npy::write_matrix(w.tanh_weights, dir / "tanh_weights.npy");
    write_json(Json{{"m", w.m},
                    {"K", w.num_attributes},
                    {"q", w.identity_dim},
                    {"lead_dim", w.lead_dim},
                    {"correlated", w.correlated},
                    {"gain", w.gain},
                    {"tail_scale", w.tail_scale},
                    {"mapping", to_string(w.mapping)},
                    {"seed", w.seed}},
               dir / "world.json");
}

inline SyntheticWorld load_world(const fs::path& dir) {
    const fs::path manifest = dir / "world.json";
    const Json j = read_json(manifest);
    SyntheticWorld w;
    w.m = field<Index>(j, "m", manifest);
    w.num_attributes = field<Index>(j, "K", manifest);
    w.identity_dim = field<Index>(j, "q", manifest);
    w.lead_dim = field<Index>(j, "lead_dim", manifest);
    w.correlated = field<bool>(j, "correlated", manifest);
    w.gain = field<double>(j, "gain", manifest);
    w.tail_scale = field<double>(j, "tail_scale", manifest);
    w.mapping = mapping_kind_from_string(field<std::string>(j, "mapping", manifest));
    w.seed = field<std::uint64_t>(j, "seed", manifest);
    w.frame = npy::read_matrix(dir / "frame.npy");
    w.scales = npy::read_vector(dir / "scales.npy");
    w.directions = npy::read_matrix(dir / "directions.npy");
    w.mix = npy::read_matrix(dir / "mix.npy");
    w.identity_basis = npy::read_matrix(dir / "identity_basis.npy");
    w.tanh_weights = npy::read_matrix(dir / "tanh_weights.npy");
    require_dim(w.frame.rows(), w.m, "world frame");
    require_dim(w.directions.rows(), w.num_attributes, "world directions rows");
    require_dim(w.directions.cols(), w.m, "world directions cols");
    require_dim(w.identity_basis.cols(), w.identity_dim, "world identity basis");
    return w;
}

// --- linear directions -----------------------------------------------------

inline void save(const std::vector<LinearDirection>& dirs, const fs::path& dir) {
    require(!dirs.empty(), ErrorCode::ConfigInvalid, "no directions to save");
    fs::create_directories(dir);
    Matrix units(static_cast<Index>(dirs.size()), dirs.front().unit.size());
    Json biases = Json::array();
    for (std::size_t k = 0; k < dirs.size(); ++k) {
        units.row(static_cast<Index>(k)) = dirs[k].unit.transpose();
        biases.push_back(dirs[k].bias);
    }
    npy::write_matrix(units, dir / "directions.npy");
    write_json(Json{{"K", dirs.size()},
                    {"m", units.cols()},
                    {"space", dirs.front().space == DirectionSpace::W ? "W" : "W_PCA"},
                    {"biases", biases}},
               dir / "directions.json");
}

inline std::vector<LinearDirection> load_directions(const fs::path& dir) {
    const fs::path manifest = dir / "directions.json";
    const Json j = read_json(manifest);
    const Matrix units = npy::read_matrix(dir / "directions.npy");
    const auto biases = field<std::vector<double>>(j, "biases", manifest);
    require_dim(static_cast<Index>(biases.size()), units.rows(), "direction biases");
    const DirectionSpace space = field<std::string>(j, "space", manifest) == "W" ? DirectionSpace::W : DirectionSpace::WPca;
    std::vector<LinearDirection> out;
    for (Index k = 0; k < units.rows(); ++k)
        out.push_back({units.row(k).transpose(), biases[static_cast<std::size_t>(k)], space});
    return out;
}

}  // namespace latentedit::io
