#pragma once

#include <filesystem>

#include "latentedit/npy.hpp"

namespace latentedit {

/// Latent vectors paired row-by-row with their attribute vectors.
struct PairedDataset {
    Matrix latents;     // n x m
    Matrix attributes;  // n x K

    Index size() const { return latents.rows(); }
    Index latent_dim() const { return latents.cols(); }
    Index num_attributes() const { return attributes.cols(); }
};

inline void validate(const PairedDataset& ds) {
    if (ds.latents.rows() != ds.attributes.rows())
        fail(ErrorCode::RowCountMismatch, std::to_string(ds.latents.rows()) + " latents vs " +
                                              std::to_string(ds.attributes.rows()) + " attribute rows");
    require(ds.attributes.cols() >= 1, ErrorCode::DimensionMismatch, "dataset needs at least one attribute");
    require(ds.latents.allFinite() && ds.attributes.allFinite(), ErrorCode::NonFinite, "dataset has non-finite entries");
}

inline PairedDataset load_dataset(const std::filesystem::path& latent_path, const std::filesystem::path& attr_path) {
    PairedDataset ds{npy::read_matrix(latent_path), npy::read_matrix(attr_path)};
    validate(ds);
    return ds;
}

inline PairedDataset rows_of(const PairedDataset& ds, Index begin, Index end) {
    return {ds.latents.middleRows(begin, end - begin), ds.attributes.middleRows(begin, end - begin)};
}

}  // namespace latentedit
