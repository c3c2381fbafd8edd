#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <vector>

#include "latentedit/autoencoder.hpp"
#include "latentedit/gaussianize.hpp"
#include "latentedit/pca.hpp"

namespace latentedit {

/// PCA split, attribute transform and trained autoencoder chained together.
struct EditPipeline {
    PcaModel pca;
    AttributeTransform transform;
    EncoderDecoder model;

    Index num_attributes() const { return model.num_attributes; }
};

inline void validate(const EditPipeline& p) {
    require_dim(p.model.input_dim(), p.pca.split, "pipeline: autoencoder input vs PCA split");
    require_dim(p.transform.num_attributes(), p.model.num_attributes, "pipeline: transform K vs model K");
}

/// One latent expressed as attribute slots, free slots and the PCA residual.
/// Attribute indices are 0-based.
struct EditableCode {
    Vector attr_slots;  // K, gaussianized scale
    Vector free_slots;  // dim_c - K
    Vector residual;    // m - d
};

inline EditableCode encode(const EditPipeline& p, const Vector& w) {
    const PcaSplit split = project(p.pca, w);
    const Vector code = encode_batch(p.model, split.top.transpose()).row(0).transpose();
    const Index k = p.model.num_attributes;
    return {code.head(k), code.tail(code.size() - k), split.residual};
}

inline EditableCode set_attribute(EditableCode code, Index k, double value_gaussianized) {
    if (k < 0 || k >= code.attr_slots.size())
        fail(ErrorCode::IndexOutOfRange, "attribute index " + std::to_string(k) + " outside [0, " +
                                             std::to_string(code.attr_slots.size()) + ")");
    code.attr_slots(k) = value_gaussianized;
    return code;
}

inline EditableCode set_attribute_raw(const EditPipeline& p, EditableCode code, Index k, double value_raw) {
    if (!(value_raw >= 0.0 && value_raw <= 1.0))
        fail(ErrorCode::OutOfRange, "raw attribute value must lie in [0, 1], got " + std::to_string(value_raw));
    if (k < 0 || k >= p.num_attributes()) fail(ErrorCode::IndexOutOfRange, "attribute index " + std::to_string(k));
    return set_attribute(std::move(code), k, to_gaussian(p.transform, k, value_raw));
}

inline Vector decode(const EditPipeline& p, const EditableCode& code) {
    require_dim(code.attr_slots.size() + code.free_slots.size(), p.model.code_dim, "decode: code length");
    Matrix c(1, p.model.code_dim);
    c << code.attr_slots.transpose(), code.free_slots.transpose();
    const Vector top = decode_batch(p.model, c).row(0).transpose();
    return reconstruct(p.pca, PcaSplit{top, code.residual});
}

inline Vector edit(const EditPipeline& p, const Vector& w, Index k, double target_gaussianized) {
    return decode(p, set_attribute(encode(p, w), k, target_gaussianized));
}

/// An editor walks a fixed, increasing list of edit strengths for attribute k.
template <typename E>
concept StepEditor = requires(const E& e, const Vector& w, Index k, std::size_t step) {
    { e.steps() } -> std::convertible_to<std::size_t>;
    { e.edit_step(w, k, step) } -> std::convertible_to<Vector>;
};

/// Probabilities whose normal quantiles form the default slider schedule.
inline std::vector<double> default_quantile_schedule() {
    return {0.55, 0.65, 0.75, 0.85, 0.95, 0.975, 0.99, 0.995, 0.999, 0.9995};
}

inline std::vector<double> gaussian_grid(const std::vector<double>& quantiles) {
    std::vector<double> g;
    g.reserve(quantiles.size());
    for (double q : quantiles) g.push_back(inv_norm_cdf(q));
    return g;
}

/// Sets the attribute slot to each gaussianized target in turn.
struct AutoencoderEditor {
    const EditPipeline* pipeline;
    std::vector<double> targets = gaussian_grid(default_quantile_schedule());

    std::size_t steps() const { return targets.size(); }
    Vector edit_step(const Vector& w, Index k, std::size_t step) const { return edit(*pipeline, w, k, targets.at(step)); }
};

struct SearchResult {
    Vector edited;
    bool success = false;
    double reached = 0.0;  // oracle output for the returned latent
    std::size_t step = 0;
};

/// Raw oracle outputs below this count as "negative" for an attribute.
inline constexpr double kNegativeBelow = 0.5;

/// Walks the editor's schedule until the classifier's attribute k reaches
/// `threshold`. On failure returns the edit with the highest output seen.
template <StepEditor E, typename Classifier>
SearchResult amplitude_search(const E& editor, const Vector& w, Index k, Classifier&& classify, double threshold = 0.9) {
    const Vector before = classify(w);
    if (k < 0 || k >= before.size()) fail(ErrorCode::IndexOutOfRange, "attribute index " + std::to_string(k));
    if (!std::isfinite(before(k))) fail(ErrorCode::OracleFailure, "classifier returned a non-finite value");
    if (!(before(k) < kNegativeBelow))
        fail(ErrorCode::OutOfRange, "sample is not negative for attribute " + std::to_string(k) + " (output " +
                                        std::to_string(before(k)) + ")");
    SearchResult best;
    best.reached = -1.0;
    for (std::size_t s = 0; s < editor.steps(); ++s) {
        Vector candidate = editor.edit_step(w, k, s);
        const double out = classify(candidate)(k);
        if (!std::isfinite(out)) fail(ErrorCode::OracleFailure, "classifier returned a non-finite value");
        if (out >= threshold) return {std::move(candidate), true, out, s};
        if (out > best.reached) best = {std::move(candidate), false, out, s};
    }
    return best;
}

}  // namespace latentedit
